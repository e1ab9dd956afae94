#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "heatctl/heat_ops.hpp"
#include "heatctl/weights.hpp"

namespace heatctl {

/// Discrete weighted variational system
///   B = D_test^T W_Q D_trial + T_gamma^T W_gamma T_gamma + eps I,
///   rhs(q) = <g,q>_Q + <y0, q(first cell)>_Omega,
/// where D_* are L* stencil matrices and the weights are the rho^{-2} /
/// rho_0^{-2} quadrature diagonals. All weights carry a common normalization
/// factor e^{shift} (shift = 2 s min alpha) so that the largest weight is
/// O(1); the reconstruction formulas below are invariant under that shift.
struct VariationalSystem {
    Eigen::SparseMatrix<double> B;
    Eigen::VectorXd rhs;
    Eigen::SparseMatrix<double> D_test, D_trial;
    Eigen::VectorXd wq;            // dt w_i rho^{-2} (normalized), lattice
    Eigen::VectorXd wq_point;      // rho^{-2} (normalized), lattice
    Eigen::VectorXd wgamma;        // dt sigma_gamma rho_0^{-2} (normalized), nt x ntrace
    Eigen::VectorXd wgamma_point;  // rho_0^{-2} (normalized), nt x ntrace
    double log_shift = 0.0;        // the common factor: true weight = e^{-shift} * stored
    double eps = 0.0;
    bool symmetric = true;
    double symmetry_error = 0.0;
};

struct SolveOptions {
    double eps = 0.0;        // Tikhonov shift added at assembly
    double cg_tol = 1e-10;   // fallback CG relative tolerance
    int cg_max_iters = 0;    // 0: 10 * n
};

struct SolveDiagnostics {
    std::string solver;          // "ldlt", "ldlt+shift", "cg", "lu", ...
    double eps_used = 0.0;       // equilibrated retry shift, if any
    double galerkin_rel = 0.0;   // equilibrated residual, relative
    double energy_lhs = 0.0;     // p^T B p   (normalized scale)
    double energy_rhs = 0.0;     // rhs^T p   (normalized scale)
    double q_energy = 0.0;       // p^T D^T W_Q D p (normalized)
    double gamma_energy = 0.0;   // trace part (normalized)
    int cg_iterations = 0;
    double normalization_shift = 0.0;
};

/// Multiplier, reconstructed state, control and the diagnostic record of a
/// linear null-control solve.
struct ControlSolution {
    Field p;       // multiplier (normalized scale: p_true = e^{shift} p)
    Field y;       // reconstructed state rho^{-2} L*(p), shift-invariant
    TraceField f;  // control, exactly zero outside gamma
    double terminal_norm = 0.0;   // replayed ||y(T)||_{L2}
    double terminal_ratio = 0.0;  // replayed ||y(T)|| / ||y0||
    double y_norm_Y = 0.0;        // ||rho y||_{L2(Q)}
    double f_norm_F = 0.0;        // ||rho_0 f||_{L2(gamma x (0,T))}
    double log_y_norm_Y = 0.0;    // log of the above (computed first, overflow-safe)
    double log_f_norm_F = 0.0;
    std::vector<double> replay_l2;  // ||y(t_k)||_{L2} at node times from the replay
    SolveDiagnostics diag;
};

VariationalSystem assemble_B(const SpaceTimeGrid& grid, const WeightSystem& ws,
                             const ProblemSpec& spec, double eps = 0.0);

/// Generic assembly with distinct test/trial L* coefficient sets (the
/// semilinear iteration pairs different linearizations).
VariationalSystem assemble_variational(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                       const LstarCoefficients& test,
                                       const LstarCoefficients& trial, const Field* g,
                                       const Eigen::VectorXd* y0, double eps);

/// Equilibrated direct solve (LDLT, or LU when nonsymmetric) with one step
/// of iterative refinement; retries once with a relative Tikhonov shift on
/// breakdown and falls back to a Jacobi-preconditioned CG for symmetric
/// systems.
Eigen::VectorXd solve_variational(const VariationalSystem& sys, const SolveOptions& opts,
                                  SolveDiagnostics& diag);

/// Full linear pipeline: assemble, solve, reconstruct y = rho^{-2} L*(p) and
/// f = -rho_0^{-2} p 1_gamma, then replay f through the forward solver and
/// record the terminal norm.
ControlSolution solve_null_control(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                   const ProblemSpec& spec, const SolveOptions& opts = {});

struct OptimalityResidual {
    double interior = 0.0;  // L2 norm of (forward operator y - g) over interior nodes
    double boundary = 0.0;  // L2 norm of (d_nu y + b y - f) over Sigma
    double total = 0.0;
};

OptimalityResidual check_optimality_residual(const SpaceTimeGrid& grid, const ProblemSpec& spec,
                                             const ControlSolution& sol);

/// log S(f) = log(1/2 ||rho y||^2 + 1/2 ||rho_0 f||^2_gamma), accumulated in
/// log space (the rho^2 factors overflow doubles near t = T).
double log_functional_S(const SpaceTimeGrid& grid, const WeightSystem& ws, const Field& y,
                        const TraceField& f);

struct NormBoundCase {
    std::uint64_t seed = 0;
    double data_norm = 0.0;      // ||g|| + ||y0||
    double weighted_norm = 0.0;  // ||rho y|| + ||rho_0 f||
    double ratio = 0.0;
    double terminal_ratio = 0.0;
};

struct NormBoundReport {
    std::vector<NormBoundCase> cases;
    double c_hat = 0.0;  // max ratio over the batch
};

/// Empirical constant of the data-to-solution bound over a batch of random
/// (g, y0) pairs. Sources are modulated by e^{-s(alpha - min alpha)} so that
/// the weighted source norm is finite.
NormBoundReport check_norm_bound(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                 const ProblemSpec& spec, int num_pairs,
                                 std::uint64_t seed_base = 500, const SolveOptions& opts = {});

}  // namespace heatctl
