#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <memory>
#include <optional>

#include "heatctl/fields.hpp"
#include "heatctl/geometry.hpp"

namespace heatctl {

enum class TimeScheme { CrankNicolson, BackwardEuler };

/// Scalar coefficient on Q: a constant or a full midpoint-lattice field.
struct Coefficient {
    double constant = 0.0;
    std::optional<Field> field;

    Coefficient() = default;
    Coefficient(double c) : constant(c) {}  // NOLINT: implicit by design
    static Coefficient of_field(Field f) {
        Coefficient c;
        c.field = std::move(f);
        return c;
    }
    bool is_field() const { return field.has_value(); }
    bool is_zero() const { return !field && constant == 0.0; }
    double at(int k, int i) const { return field ? (*field)(k, i) : constant; }
};

/// Data of the linear state equation: y_t - Lap y + A.grad y + a y = g with
/// Robin boundary condition d_nu y + b y = f and initial datum y0. The
/// optional nonlinearity F (with F(0) = 0) is consumed by the semilinear
/// driver; the plain solvers ignore it unless a lagged potential is passed.
struct ProblemSpec {
    Coefficient a;
    std::array<Coefficient, 2> drift{};  // A components; [1] unused in 1D
    Eigen::VectorXd b;                   // Robin coefficient per trace dof
    Field g;
    Eigen::VectorXd y0;
    TimeScheme scheme = TimeScheme::CrankNicolson;

    std::function<double(double)> F;       // optional, F(0) = 0
    std::function<double(double)> Fprime;  // optional analytic derivative

    bool has_drift() const { return !drift[0].is_zero() || !drift[1].is_zero(); }
};

/// Throws std::invalid_argument when shapes mismatch, samples are not finite,
/// or a supplied F violates F(0) = 0.
void validate_problem(const SpaceTimeGrid& grid, const ProblemSpec& spec);

/// Sampled Lipschitz estimate sup |F'| over [-range, range].
double estimate_lipschitz(const std::function<double(double)>& F, double range = 4.0,
                          int samples = 4096);

struct ForwardResult {
    Field y;                        // midpoint-lattice values (z_k + z_{k+1})/2
    Eigen::VectorXd terminal;       // y(T)
    std::vector<double> l2_at_nodes;  // ||y(t_k)||_{L2(Omega)}, k = 0..nt
    double peclet = 0.0;            // max |A| h / 2
};

/// Time stepper for the theta-scheme written in weighted form:
///   (W - theta dt K) z_{k+1} = (W + (1-theta) dt K) z_k + dt (W g_k + R f_k)
/// where W is the spatial quadrature diagonal, K = W.(Lap_fold - A.grad - a)
/// (symmetric when A = 0) and R injects boundary data with surface weights.
/// The adjoint sweep is the exact algebraic transpose of the forward map, so
/// the discrete duality identities hold to rounding.
class TimeStepper {
public:
    TimeStepper(const SpaceTimeGrid& grid, const ProblemSpec& spec);

    ForwardResult forward(const Eigen::VectorXd& y0, const Field* g, const TraceField* f,
                          const std::function<double(double)>* lag_potential = nullptr) const;

    /// Transpose sweep: mu_{nt} = 0 and for k = nt-1 .. 0
    ///   Mplus^T mu_k = Mminus^T mu_{k+1} + dt W (psi_k + psi_{k+1})/2
    ///                + dt R (F3_k + F3_{k+1})/2 + [k = nt-1] W p0,
    /// with psi_nt := 0. Returns mu as a midpoint field (the exact adjoint
    /// representer of the forward output in the Q inner product); its trace
    /// is the adjoint representer on Sigma.
    Field adjoint(const Field* psi, const Eigen::VectorXd* terminal,
                  const TraceField* f3) const;

    const SpaceTimeGrid& grid() const { return grid_; }
    bool symmetric() const { return symmetric_; }

private:
    struct StepMatrices;
    std::shared_ptr<const StepMatrices> static_mats_;
    std::shared_ptr<StepMatrices> build_step(int k,
                                             const std::function<double(double)>* lag,
                                             const Eigen::VectorXd* prev) const;

    const SpaceTimeGrid& grid_;
    const ProblemSpec& spec_;
    double theta_ = 0.5;
    bool symmetric_ = false;
    bool time_dependent_ = false;
    double peclet_ = 0.0;
};

/// Forward solve of the state equation; f may be null (zero boundary data).
/// When lag_potential is non-null each step adds lag_potential(z_k) node-wise
/// to the reaction coefficient (the lagged linearization of a semilinear
/// term F(y) = F0(y) y).
ForwardResult solve_forward(const SpaceTimeGrid& grid, const ProblemSpec& spec,
                            const TraceField* f = nullptr,
                            const std::function<double(double)>* lag_potential = nullptr);

/// Backward solve of the adjoint system
///   -psi_t - Lap psi - div(A psi) + a psi = div F2 + F1,
///   d_nu psi + psi (A + F2).nu + b psi = F3,  psi(T) = terminal.
/// Realized as the transpose sweep of the forward stepper (plus the strong
/// form of the div F2 source), so source-to-solution duality with
/// solve_forward is exact.
Field solve_adjoint(const SpaceTimeGrid& grid, const ProblemSpec& spec,
                    const Eigen::VectorXd& terminal, const Field* F1 = nullptr,
                    const std::array<Field, 2>* F2 = nullptr, const TraceField* F3 = nullptr);

/// The operator quadruple on homogeneous data (A = 0, a = 0, Robin b):
///   H0: q -> z,   z_t - Lap z = q,        d_nu z + b z = 0,    z(0) = 0
///   G:  beta -> u, u_t - Lap u = 0,       d_nu u + b u = beta, u(0) = 0
/// H0* and G* are the exact discrete transposes (one shared backward sweep;
/// G* is its boundary trace).
class HeatOperators {
public:
    HeatOperators(const SpaceTimeGrid& grid, Eigen::VectorXd b,
                  TimeScheme scheme = TimeScheme::CrankNicolson);

    Field H0(const Field& q) const;
    Field H0_star(const Field& psi) const;
    Field G(const TraceField& beta) const;
    TraceField G_star(const Field& w) const;

    const SpaceTimeGrid& grid() const { return grid_; }

private:
    const SpaceTimeGrid& grid_;
    ProblemSpec spec_;
    std::unique_ptr<TimeStepper> stepper_;
};

/// Coefficients of the formal adjoint operator
///   L* p = -p_t - Lap p - div(A p) + a p
/// with the multiplier-space constraint d_nu p + p (b + A.nu) = 0 folded into
/// the Laplacian stencil (homogeneous ghost elimination).
struct LstarCoefficients {
    Coefficient a;
    std::array<Coefficient, 2> drift{};
    Eigen::VectorXd b_eff;  // b + A.nu per trace dof
};

LstarCoefficients lstar_coefficients(const SpaceTimeGrid& grid, const ProblemSpec& spec);

/// Assembles L* as a sparse matrix on the midpoint lattice: centred space
/// stencils, centred time differences with first-order one-sided closures at
/// the extremal midpoints.
Eigen::SparseMatrix<double> build_lstar_matrix(const SpaceTimeGrid& grid,
                                               const LstarCoefficients& coeffs);

Field apply_Lstar(const SpaceTimeGrid& grid, const LstarCoefficients& coeffs, const Field& p);

/// Q and Sigma inner products (quadrature-weighted).
double inner_Q(const SpaceTimeGrid& grid, const Field& u, const Field& v);
double inner_Sigma(const SpaceTimeGrid& grid, const TraceField& u, const TraceField& v);

/// ||v||_{L2(Omega)} with the spatial quadrature weights.
double l2_omega(const SpaceTimeGrid& grid, const Eigen::VectorXd& v);

double l2_Q(const SpaceTimeGrid& grid, const Field& u);

/// Restriction of a midpoint field to the boundary trace dofs.
TraceField trace_of(const SpaceTimeGrid& grid, const Field& u);

}  // namespace heatctl
