#include <doctest.h>

#include <cmath>

#include "heatctl/fields.hpp"
#include "heatctl/geometry.hpp"

using namespace heatctl;

TEST_CASE("interval grid: steps and boundary tagging") {
    Domain d = Domain::interval(0.0, 1.0, Face::XHigh);
    SpaceTimeGrid g = build_grid(d, 5, 4, 1.0);
    CHECK(g.hx == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(g.dt == doctest::Approx(0.25).epsilon(1e-14));
    REQUIRE(g.num_trace() == 2);
    CHECK(!g.boundary[0].on_gamma());  // x = 0 is Gamma \ gamma
    CHECK(g.boundary[1].on_gamma());   // x = 1 is gamma
    CHECK(g.boundary[0].sigma == doctest::Approx(1.0));
}

TEST_CASE("rectangle gamma measure: half of one face") {
    Domain d = Domain::rectangle(0.0, 1.0, 0.0, 1.0, {{Face::YHigh, 0.25, 0.75}});
    SpaceTimeGrid g = build_grid(d, 9, 4, 1.0, 9);
    CHECK(d.boundary_measure() == doctest::Approx(4.0));
    CHECK(d.gamma_measure() == doctest::Approx(0.5));
    double sg = 0.0, st = 0.0;
    for (const auto& bn : g.boundary) {
        sg += bn.sigma_gamma;
        st += bn.sigma;
    }
    CHECK(sg == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(st == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("invalid domains and grids are rejected") {
    CHECK_THROWS_AS(Domain::interval(1.0, 1.0, Face::XHigh), std::invalid_argument);
    // gamma = whole boundary in 1D
    Domain both = Domain::interval(0.0, 1.0, Face::XHigh);
    both.gamma.push_back({Face::XLow, 0.0, 0.0});
    CHECK_THROWS_AS(both.validate(), std::invalid_argument);
    // gamma covering the full rectangle boundary
    CHECK_THROWS_AS(Domain::rectangle(0, 1, 0, 1,
                                      {{Face::XLow, 0, 1},
                                       {Face::XHigh, 0, 1},
                                       {Face::YLow, 0, 1},
                                       {Face::YHigh, 0, 1}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Domain::rectangle(0, 1, 0, 1, {}), std::invalid_argument);
    // overlapping segments
    CHECK_THROWS_AS(
        Domain::rectangle(0, 1, 0, 1, {{Face::YHigh, 0.2, 0.6}, {Face::YHigh, 0.5, 0.9}}),
        std::invalid_argument);
    Domain ok = Domain::interval(0.0, 1.0, Face::XHigh);
    CHECK_THROWS_AS(build_grid(ok, 2, 4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(ok, 5, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(ok, 5, 4, -1.0), std::invalid_argument);
}

TEST_CASE("quadrature measures: Q, Sigma and gamma") {
    Domain d = Domain::interval(0.0, 1.0, Face::XHigh);
    SpaceTimeGrid g = build_grid(d, 17, 8, 2.0);
    Field one(g);
    one.vec().setOnes();
    CHECK(integrate_Q(g, one) == doctest::Approx(2.0).epsilon(1e-13));
    TraceField tone(g);
    tone.vec().setOnes();
    CHECK(integrate_Sigma(g, tone) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(integrate_gamma(g, tone) == doctest::Approx(2.0).epsilon(1e-13));

    Domain r = Domain::rectangle(0.0, 2.0, 0.0, 1.0, {{Face::YHigh, 0.5, 1.5}});
    SpaceTimeGrid gr = build_grid(r, 9, 4, 3.0, 5);
    Field onef(gr);
    onef.vec().setOnes();
    CHECK(integrate_Q(gr, onef) == doctest::Approx(2.0 * 3.0).epsilon(1e-13));
    TraceField tonef(gr);
    tonef.vec().setOnes();
    CHECK(integrate_Sigma(gr, tonef) == doctest::Approx(6.0 * 3.0).epsilon(1e-13));
    CHECK(integrate_gamma(gr, tonef) == doctest::Approx(1.0 * 3.0).epsilon(1e-13));
}

TEST_CASE("quadrature is exact for bilinear integrands") {
    // f(t,x) = t x on (0,1)x(0,1): exact integral 1/4 (midpoint and
    // trapezoid rules are both exact on degree-1 factors).
    Domain d = Domain::interval(0.0, 1.0, Face::XHigh);
    SpaceTimeGrid g = build_grid(d, 7, 5, 1.0);
    Field f(g);
    for (int k = 0; k < g.nt; ++k)
        for (int i = 0; i < g.num_nodes(); ++i) f(k, i) = g.tau(k) * g.x(i);
    CHECK(integrate_Q(g, f) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("refinement consistency for a smooth integrand") {
    Domain d = Domain::interval(0.0, 1.0, Face::XHigh);
    auto value = [&](int nx, int nt) {
        SpaceTimeGrid g = build_grid(d, nx, nt, 1.0);
        Field f(g);
        for (int k = 0; k < g.nt; ++k)
            for (int i = 0; i < g.num_nodes(); ++i)
                f(k, i) = std::sin(3.0 * g.x(i)) * std::exp(-g.tau(k));
        return integrate_Q(g, f);
    };
    double exact = (1.0 - std::cos(3.0)) / 3.0 * (1.0 - std::exp(-1.0));
    double e1 = std::abs(value(9, 8) - exact);
    double e2 = std::abs(value(17, 16) - exact);
    CHECK(e2 < 0.3 * e1);  // O(h^2 + dt^2)
}

TEST_CASE("shape mismatch raises") {
    Domain d = Domain::interval(0.0, 1.0, Face::XHigh);
    SpaceTimeGrid g = build_grid(d, 5, 4, 1.0);
    SpaceTimeGrid g2 = build_grid(d, 7, 4, 1.0);
    Field f(g2);
    CHECK_THROWS_AS(integrate_Q(g, f), std::invalid_argument);
}
