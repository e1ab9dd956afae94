#include <doctest.h>

#include <cmath>

#include "heatctl/carleman.hpp"
#include "heatctl/heat_ops.hpp"
#include "heatctl/probes.hpp"

using namespace heatctl;

namespace {

struct Setup {
    SpaceTimeGrid grid;
    EtaFunction eta;
};

Setup make_setup(int nx = 33, int nt = 32) {
    Setup s{build_grid(Domain::interval(0.0, 1.0, Face::XHigh), nx, nt, 1.0), {}};
    s.eta = build_eta(s.grid, 0.25);
    return s;
}

Field neumann_probe(const SpaceTimeGrid& grid, std::uint64_t seed) {
    ProblemSpec spec;
    spec.b = Eigen::VectorXd::Zero(grid.num_trace());
    return solve_adjoint(grid, spec, smooth_random_omega(grid, seed));
}

}  // namespace

TEST_CASE("zero probe is reported indeterminate") {
    Setup s = make_setup(17, 8);
    WeightSystem ws(s.grid, s.eta, 2.0, WeightSystem::s_threshold(1.0));
    Field zero(s.grid);
    CarlemanReport rep = eval_carleman_thm1(s.grid, ws, zero);
    CHECK(rep.indeterminate);
    CHECK(rep.ratio == 0.0);
    CHECK(rep.lhs_total == 0.0);
    CarlemanReport rn = eval_carleman_neumann(s.grid, ws, zero);
    CHECK(rn.indeterminate);
}

TEST_CASE("all terms are nonnegative and the ratio is finite") {
    Setup s = make_setup();
    double s0 = WeightSystem::s_threshold(1.0);
    WeightSystem ws(s.grid, s.eta, 2.0, s0);
    Field psi = neumann_probe(s.grid, 3);
    CarlemanReport rep = eval_carleman_thm1(s.grid, ws, psi);
    for (double v : {rep.lhs_grad, rep.lhs_state, rep.lhs_boundary, rep.rhs_residual,
                     rep.rhs_obs, rep.lhs_total, rep.rhs_total})
        CHECK(v >= 0.0);
    CHECK(!rep.indeterminate);
    CHECK(std::isfinite(rep.ratio));
    CHECK(rep.ratio > 0.0);
    CHECK(!rep.below_threshold);

    CarlemanReport rn = eval_carleman_neumann(s.grid, ws, psi);
    CHECK(std::isfinite(rn.ratio));
    CHECK(rn.ratio > 0.0);
    // the probe solves the equation, so the residual term cannot dominate
    // the observation term
    CHECK(rn.rhs_residual < rn.rhs_obs);
}

TEST_CASE("below-threshold parameters are flagged") {
    Setup s = make_setup(17, 8);
    double s0 = WeightSystem::s_threshold(1.0);
    WeightSystem ws(s.grid, s.eta, 2.0, 0.25 * s0);
    Field psi = neumann_probe(s.grid, 4);
    CHECK(eval_carleman_thm1(s.grid, ws, psi).below_threshold);
    WeightSystem wl(s.grid, s.eta, 0.5, s0);  // lambda below lambda_min = 2
    CHECK(eval_carleman_thm1(s.grid, wl, psi).below_threshold);
}

TEST_CASE("every weighted term decreases when s doubles, fixed probe") {
    Setup s = make_setup();
    double s0 = WeightSystem::s_threshold(1.0);
    Field psi = neumann_probe(s.grid, 5);
    WeightSystem w1(s.grid, s.eta, 2.0, s0);
    WeightSystem w2(s.grid, s.eta, 2.0, 2.0 * s0);
    CarlemanReport a = eval_carleman_thm1(s.grid, w1, psi);
    CarlemanReport b = eval_carleman_thm1(s.grid, w2, psi);
    CHECK(b.lhs_grad < a.lhs_grad);
    CHECK(b.lhs_state < a.lhs_state);
    CHECK(b.lhs_boundary < a.lhs_boundary);
    CHECK(b.rhs_residual < a.rhs_residual);
    CHECK(b.rhs_obs < a.rhs_obs);
    CarlemanReport an = eval_carleman_neumann(s.grid, w1, psi);
    CarlemanReport bn = eval_carleman_neumann(s.grid, w2, psi);
    CHECK(bn.lhs_total < an.lhs_total);
    CHECK(bn.rhs_total < an.rhs_total);
}

TEST_CASE("printed-form residual switch is available") {
    Setup s = make_setup(17, 16);
    WeightSystem ws(s.grid, s.eta, 2.0, WeightSystem::s_threshold(1.0));
    Field psi = neumann_probe(s.grid, 6);
    CarlemanReport sq = eval_carleman_thm1(s.grid, ws, psi, nullptr, nullptr, nullptr, true);
    CarlemanReport pr = eval_carleman_thm1(s.grid, ws, psi, nullptr, nullptr, nullptr, false);
    CHECK(std::isfinite(pr.rhs_residual));
    CHECK(pr.rhs_residual != sq.rhs_residual);
}

TEST_CASE("sweep ratios stay bounded as s grows") {
    Setup s = make_setup();
    double s0 = WeightSystem::s_threshold(1.0);
    auto rows = carleman_sweep(s.grid, s.eta, 2.0, {s0, 2.0 * s0, 4.0 * s0}, 5);
    auto sums = summarize_sweep(rows);
    REQUIRE(sums.size() == 6);  // 2 evaluators x 3 s values
    for (const char* ev : {"thm1", "neumann"}) {
        double prev = -1.0;
        for (double sv : {s0, 2.0 * s0, 4.0 * s0}) {
            for (const auto& sum : sums) {
                if (sum.evaluator != ev || sum.s != sv) continue;
                CHECK(std::isfinite(sum.max_ratio));
                if (prev > 0.0) CHECK(sum.max_ratio <= 1.10 * prev);
                prev = sum.max_ratio;
            }
        }
    }
}

TEST_CASE("adjoint data terms land in the right buckets") {
    Setup s = make_setup(17, 16);
    WeightSystem ws(s.grid, s.eta, 2.0, WeightSystem::s_threshold(1.0));
    ProblemSpec spec;
    spec.b = Eigen::VectorXd::Zero(s.grid.num_trace());
    Field F1 = smooth_random_field(s.grid, 9);
    TraceField F3 = smooth_random_trace(s.grid, 10);
    Field psi = solve_adjoint(s.grid, spec, smooth_random_omega(s.grid, 11), &F1, nullptr, &F3);
    CarlemanReport rep = eval_carleman_thm1(s.grid, ws, psi, &F1, nullptr, &F3);
    CHECK(rep.rhs_f1 > 0.0);
    CHECK(rep.rhs_f3 > 0.0);
    CHECK(rep.rhs_f2 == 0.0);
}
