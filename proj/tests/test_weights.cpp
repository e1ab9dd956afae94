#include <doctest.h>

#include <cmath>

#include "heatctl/geometry.hpp"
#include "heatctl/weights.hpp"

using namespace heatctl;

namespace {

SpaceTimeGrid grid_1d(int nx = 33, int nt = 16, double T = 1.0, Face ctl = Face::XHigh) {
    return build_grid(Domain::interval(0.0, 1.0, ctl), nx, nt, T);
}

}  // namespace

TEST_CASE("eta ramp in 1D: gamma at the right endpoint") {
    SpaceTimeGrid g = grid_1d();
    EtaFunction eta = build_eta(g);
    CHECK(eta.values[0] == doctest::Approx(0.0));
    CHECK(eta.values[g.nx - 1] == doctest::Approx(1.0));
    CHECK(eta.c0 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eta.sup_norm == doctest::Approx(1.0));
    // reflection: gamma at the left endpoint
    SpaceTimeGrid gl = grid_1d(33, 16, 1.0, Face::XLow);
    EtaFunction el = build_eta(gl);
    CHECK(el.values[0] == doctest::Approx(1.0));
    CHECK(el.values[gl.nx - 1] == doctest::Approx(0.0));
    CHECK(el.c0 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("eta audit passes in 2D for gamma = half a face") {
    Domain d = Domain::rectangle(0.0, 1.0, 0.0, 1.0, {{Face::YHigh, 0.0, 0.5}});
    SpaceTimeGrid g = build_grid(d, 33, 4, 1.0, 33);
    EtaFunction eta = build_eta(g);
    EtaCheckResult r = verify_eta(g, eta);
    CHECK(r.ok);
    CHECK(r.c0_gradient > 0.0);
    CHECK(r.c0_normal > 0.0);
    CHECK(r.max_eta_on_rest <= 1e-10);
    CHECK(r.max_tangential_on_rest <= 1e-10);
    CHECK(eta.sup_norm == doctest::Approx(1.0));
}

TEST_CASE("eta candidates violating the properties are rejected") {
    SpaceTimeGrid g = grid_1d(17, 8);
    EtaFunction eta = build_eta(g);
    SUBCASE("nonzero on Gamma\\gamma") {
        eta.values[0] = 0.5;
        EtaCheckResult r = verify_eta(g, eta);
        CHECK(!r.ok);
        CHECK(r.violated.find("(i") != std::string::npos);
    }
    SUBCASE("interior critical point kills the gradient bound") {
        EtaFunction cand;
        cand.values.resize(g.nx);
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i);
            cand.values[i] = 4.0 * x * (1.0 - x);  // peak at x = 1/2
        }
        compute_eta_tables(g, cand);
        EtaCheckResult r = verify_eta(g, cand);
        CHECK(!r.ok);
        CHECK(r.violated.find("(ii)") != std::string::npos);
    }
    SUBCASE("missing outward slope on Gamma\\gamma") {
        EtaFunction cand;
        cand.values.resize(g.nx);
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i);
            cand.values[i] = x * x;  // eta'(0) = 0
        }
        compute_eta_tables(g, cand);
        EtaCheckResult r = verify_eta(g, cand);
        CHECK(!r.ok);
        CHECK(r.violated.find("(ii") != std::string::npos);  // fails (ii) first at x=0
    }
}

TEST_CASE("alpha and xi match the closed form") {
    SpaceTimeGrid g = grid_1d(5, 4, 1.0);
    WeightSystem ws(g, build_eta(g), /*lambda=*/1.0, /*s=*/1.0);
    // frozen values from direct evaluation of the weight formulas
    CHECK(ws.alpha(0.5, 0) == doctest::Approx(25.5562243957226).epsilon(1e-12));
    CHECK(ws.xi(0.5, 0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(ws.alpha(0.5, g.nx - 1) == doctest::Approx(18.683097081886423).epsilon(1e-12));
    CHECK(ws.xi(0.5, g.nx - 1) == doctest::Approx(10.87312731383618).epsilon(1e-12));
    CHECK_THROWS_AS(ws.alpha(0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(ws.alpha(1.0, 0), std::invalid_argument);
}

TEST_CASE("alpha blows up monotonically toward t = 0") {
    SpaceTimeGrid g = grid_1d(9, 32, 1.0);
    WeightSystem ws(g, build_eta(g), 1.0, 1.0);
    double prev_a = 0.0, prev_x = 0.0;
    for (int k = g.nt / 2 - 1; k >= 0; --k) {  // midpoints strictly left of T/2
        double a = ws.alpha(g.tau(k), 3);
        double x = ws.xi(g.tau(k), 3);
        if (k < g.nt / 2 - 1) {
            CHECK(a > prev_a);
            CHECK(x > prev_x);
        }
        prev_a = a;
        prev_x = x;
    }
}

TEST_CASE("time symmetry of alpha and xi") {
    SpaceTimeGrid g = grid_1d(9, 16, 2.0);
    WeightSystem ws(g, build_eta(g), 1.5, 2.0);
    for (int k = 0; k < g.nt; ++k) {
        double t = g.tau(k);
        double tr = g.T - t;
        CHECK(ws.alpha(t, 4) == doctest::Approx(ws.alpha(tr, 4)).epsilon(1e-13));
        CHECK(ws.xi(t, 4) == doctest::Approx(ws.xi(tr, 4)).epsilon(1e-13));
    }
}

TEST_CASE("rho family: combined exponents and frozen example values") {
    SpaceTimeGrid g = grid_1d(5, 4, 1.0);
    WeightSystem ws(g, build_eta(g), 1.0, 1.0);
    RhoLogs lg = ws.log_rho(0.5, 0);
    CHECK(lg.rho == doctest::Approx(25.5562243957226).epsilon(1e-12));  // s*alpha
    RhoInvSq r = ws.rho_inv_sq(0.5, 0);
    CHECK(r.rho == doctest::Approx(6.340821583890487e-23).epsilon(1e-12));
    CHECK(r.rho0 == doctest::Approx(4.0581258136899115e-21).epsilon(1e-12));
    // rho1^{-2} = s lambda^2 xi rho^{-2}, equality by definition
    CHECK(r.rho1 == doctest::Approx(1.0 * 1.0 * 4.0 * r.rho).epsilon(1e-12));
    CHECK(r.rho2 == doctest::Approx(16.0 * r.rho).epsilon(1e-12));
    CHECK(r.rho3 == doctest::Approx(4.0 * r.rho).epsilon(1e-12));
}

TEST_CASE("rho family never yields NaN/Inf; underflow clamps to zero") {
    SpaceTimeGrid g = grid_1d(9, 256, 1.0);
    WeightSystem ws(g, build_eta(g), 2.0, 8.0);
    for (int k = 0; k < g.nt; ++k)
        for (int i = 0; i < g.num_nodes(); ++i) {
            RhoInvSq r = ws.rho_inv_sq(g.tau(k), i);
            for (double v : {r.rho, r.rho0, r.rho1, r.rho2, r.rho3}) {
                CHECK(std::isfinite(v));
                CHECK(v >= 0.0);
            }
            RhoLogs lg = ws.log_rho(g.tau(k), i);
            CHECK(std::isfinite(lg.rho));
            CHECK(std::isfinite(lg.rho0));
        }
}

TEST_CASE("sup of rho0/rho is attained at minimal xi") {
    SpaceTimeGrid g = grid_1d(17, 64, 1.0);
    WeightSystem ws(g, build_eta(g), 1.0, 1.0);
    double analytic = ws.sup_rho0_over_rho();
    double swept = 0.0;
    for (int k = 0; k < g.nt; ++k)
        for (int i = 0; i < g.num_nodes(); ++i) {
            RhoLogs lg = ws.log_rho(g.tau(k), i);
            swept = std::max(swept, std::exp(lg.rho0 - lg.rho));
        }
    CHECK(swept <= analytic * (1.0 + 1e-12));
    CHECK(swept > 0.98 * analytic);  // lattice comes close to the analytic sup
}

TEST_CASE("weight-bound audit: gradient, time derivative, eq45a") {
    SpaceTimeGrid g = grid_1d(65, 64, 1.0);
    EtaFunction eta = build_eta(g);
    double s0 = WeightSystem::s_threshold(1.0);
    SUBCASE("m = 0: ratio reduces to 2|grad eta| and is s-independent") {
        WeightSystem ws(g, eta, 2.0, s0);
        BoundReport rep = check_weight_bounds(g, ws, 0.0, 0.0);
        // |grad(e^{2 s alpha})|/(s lambda e^{2 s alpha} xi) = 2 |grad eta|,
        // up to the O((lambda h)^2) truncation of the centred stencil
        CHECK(rep.c_grad == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(rep.eq45a_value == doctest::Approx(1.0 / (4.0 * s0)).epsilon(1e-12));
        CHECK(rep.eq45a_value == doctest::Approx(rep.eq45a_expected).epsilon(1e-12));
    }
    SUBCASE("constants do not grow when s doubles") {
        double prev_grad = 0.0, prev_time = 0.0;
        bool first = true;
        for (double s : {s0, 2.0 * s0, 4.0 * s0}) {
            WeightSystem ws(g, eta, 2.0, s);
            BoundReport rep = check_weight_bounds(g, ws, -1.0, 3.0);
            if (!first) {
                CHECK(rep.c_grad <= prev_grad * (1.0 + 1e-9));
                CHECK(rep.c_time <= prev_time * (1.0 + 1e-9));
            }
            prev_grad = rep.c_grad;
            prev_time = rep.c_time;
            first = false;
        }
    }
}

TEST_CASE("flat-start profile is bounded on the first half") {
    SpaceTimeGrid g = grid_1d(9, 32, 1.0);
    WeightSystem ws(g, build_eta(g), 1.0, 1.0, TimeProfile::FlatStart);
    double a_ref = ws.alpha(0.5 * g.T - 1e-9, 4);
    for (int k = 0; k < g.nt / 2; ++k)
        CHECK(ws.alpha(g.tau(k), 4) == doctest::Approx(a_ref).epsilon(1e-6));
    // second half follows the symmetric profile
    WeightSystem sym(g, build_eta(g), 1.0, 1.0);
    for (int k = g.nt / 2; k < g.nt; ++k)
        CHECK(ws.alpha(g.tau(k), 4) == doctest::Approx(sym.alpha(g.tau(k), 4)));
}
