// scratch calibration driver (not part of the suite)
#include <cmath>
#include <cstdio>

#include "heatctl/nullcontrol.hpp"

using namespace heatctl;

static double run_case(int nx, int nt, double amp, double s, double s_scale, bool print = true) {
    SpaceTimeGrid g = build_grid(Domain::interval(0.0, 1.0, Face::XHigh), nx, nt, 1.0);
    ProblemSpec spec;
    spec.b = Eigen::VectorXd::Constant(g.num_trace(), 1.0);
    spec.y0.resize(g.num_nodes());
    for (int i = 0; i < g.num_nodes(); ++i) spec.y0[i] = std::sin(M_PI * g.x(i));
    EtaFunction eta = build_eta(g, amp);
    WeightSystem ws(g, eta, 2.0, s, TimeProfile::FlatStart, s_scale);
    ControlSolution sol = solve_null_control(g, ws, spec);
    if (print)
        std::printf("nx=%3d nt=%4d amp=%.3f s=%6.3f ratio=%.4e gal=%.0e\n", nx, nt, amp, s,
                    sol.terminal_ratio, sol.diag.galerkin_rel);
    return sol.terminal_ratio;
}

int main() {
    std::puts("--- ratio(s) curve, amp=0.05, 64x128 ---");
    for (double s : {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0})
        run_case(64, 128, 0.05, s, 2.0);
    std::puts("--- ratio(s) curve, amp=0.10, 64x128 ---");
    for (double s : {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0})
        run_case(64, 128, 0.10, s, 2.0);
    std::puts("--- ratio(s) curve, amp=0.20, 64x128 ---");
    for (double s : {0.0625, 0.125, 0.25, 0.5, 1.0})
        run_case(64, 128, 0.20, s, 2.0);
    std::puts("--- refinement path at candidate (amp, s_scale) ---");
    for (double amp : {0.05, 0.10}) {
        for (double sc : {0.0625, 0.125, 0.25}) {
            double s0 = WeightSystem::s_threshold(1.0, sc);
            double r1 = run_case(32, 64, amp, s0, sc, false);
            double r2 = run_case(64, 128, amp, s0, sc, false);
            double r3 = run_case(128, 256, amp, s0, sc, false);
            double d1 = run_case(64, 128, amp, 2.0 * s0, sc, false);
            std::printf(
                "amp=%.2f sc=%.4f s0=%.3f: refine %.3e -> %.3e -> %.3e | 2x s: %.3e\n", amp,
                sc, s0, r1, r2, r3, d1);
        }
    }
    return 0;
}
