#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "heatctl/fields.hpp"
#include "heatctl/geometry.hpp"
#include "heatctl/weights.hpp"

namespace heatctl {

/// Both sides of a Carleman inequality evaluated on one adjoint solution.
/// Every term is a weighted squared norm, hence nonnegative; a vanishing
/// right-hand side together with a vanishing left-hand side is reported as
/// indeterminate rather than as a NaN ratio.
struct CarlemanReport {
    std::string evaluator;  // "thm1" or "neumann"
    double s = 0.0;
    double lambda = 0.0;

    double lhs_grad = 0.0;      // weighted |grad psi|^2 over Q
    double lhs_state = 0.0;     // weighted |psi|^2 over Q
    double lhs_boundary = 0.0;  // weighted |psi|^2 over Sigma
    double lhs_timepair = 0.0;  // s^{-1} xi^{-1} (|p_t|^2 + |Lap p|^2), neumann only

    double rhs_residual = 0.0;  // weighted |psi_t + Lap psi|^2 (or |.| if requested)
    double rhs_f1 = 0.0;
    double rhs_f2 = 0.0;
    double rhs_f3 = 0.0;
    double rhs_obs = 0.0;  // gamma observation term

    double lhs_total = 0.0;
    double rhs_total = 0.0;
    double ratio = 0.0;
    bool indeterminate = false;
    bool below_threshold = false;
};

/// Theorem-style inequality for the general adjoint system. psi must be a
/// discrete adjoint solution for the given right-hand sides (the residual
/// term measures exactly the stencil mismatch of such solutions).
/// squared_residual=false evaluates the integrand |psi_t + Lap psi| without
/// the square, as printed in the source inequality, for comparison.
CarlemanReport eval_carleman_thm1(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                  const Field& psi, const Field* F1 = nullptr,
                                  const std::array<Field, 2>* F2 = nullptr,
                                  const TraceField* F3 = nullptr,
                                  bool squared_residual = true);

/// Neumann-adjoint inequality: p is a discrete backward solution with
/// homogeneous Neumann boundary data and terminal datum p(T).
CarlemanReport eval_carleman_neumann(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                     const Field& p);

struct CarlemanSweepRow {
    std::string evaluator;
    double s = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool indeterminate = false;
    bool below_threshold = false;
};

/// Monte-Carlo estimate of the empirical constants: for each s value and
/// each seed, evolves a unit-norm random terminal datum backward with
/// homogeneous Neumann data and evaluates both inequalities.
std::vector<CarlemanSweepRow> carleman_sweep(const SpaceTimeGrid& grid, const EtaFunction& eta,
                                             double lambda, const std::vector<double>& s_values,
                                             int num_seeds, std::uint64_t seed_base = 1000);

/// Max ratio per (evaluator, s) in sweep order, for stability checks.
struct CarlemanSummary {
    std::string evaluator;
    double s = 0.0;
    double max_ratio = 0.0;
};
std::vector<CarlemanSummary> summarize_sweep(const std::vector<CarlemanSweepRow>& rows);

}  // namespace heatctl
