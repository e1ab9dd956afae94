#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "heatctl/geometry.hpp"

namespace heatctl {

/// exp with the exponent clipped to [-700, 700]; the clipped low range maps
/// to weights below 1e-304, which are numerically zero in every integral.
double safe_exp(double exponent);

/// Auxiliary weight-shape function: positive inside Omega, vanishing with
/// zero tangential gradient on Gamma \ gamma, with strictly negative outward
/// slope there. Constants are the realized node-wise minima, not a-priori
/// values; construction is propose-then-verify.
struct EtaFunction {
    Eigen::VectorXd values;              // eta at spatial nodes
    Eigen::MatrixXd gradient;            // N x dim, finite-difference gradient
    std::vector<double> normal_deriv;    // per trace dof; corners: worst face
    double c0_gradient = 0.0;            // min |grad eta| over checked nodes
    double c0_normal = 0.0;              // min of -d_nu eta over Gamma\gamma
    double c0 = 0.0;                     // min(c0_gradient, c0_normal)
    double laplacian_bound = 0.0;        // max |Lap eta| over interior nodes
    double sup_norm = 0.0;

    double operator()(int node) const { return values[node]; }
};

struct EtaCheckResult {
    bool ok = true;
    std::string violated;  // name of the first violated property, empty if ok
    double c0_gradient = 0.0;
    double c0_normal = 0.0;
    double max_eta_on_rest = 0.0;        // max |eta| on Gamma\gamma
    double max_tangential_on_rest = 0.0; // max |grad_Gamma eta| on Gamma\gamma
    double min_eta_interior = 0.0;
};

/// Fills gradient, normal derivatives, Laplacian bound and sup norm from the
/// nodal values (finite differences, second-order one-sided at the ends).
void compute_eta_tables(const SpaceTimeGrid& grid, EtaFunction& eta);

/// Node-wise audit of the four eta properties. In 2D the gradient of any
/// admissible eta vanishes at corners between two Gamma\gamma faces, so
/// corner nodes are excluded from the gradient and normal-slope checks.
EtaCheckResult verify_eta(const SpaceTimeGrid& grid, const EtaFunction& eta,
                          double flatness_tol = 1e-10);

/// 1D: affine ramp vanishing on the uncontrolled endpoint. 2D: discrete
/// harmonic lifting of a smooth bump supported on gamma (zero Dirichlet data
/// on Gamma\gamma), rescaled to the requested amplitude. Throws if the
/// verification rejects the candidate, naming the violated property.
EtaFunction build_eta(const SpaceTimeGrid& grid, double amplitude = 1.0);

enum class TimeProfile {
    Symmetric,  // theta(t) = t(T-t): blow-up at both ends
    FlatStart   // theta(t) = T^2/4 on (0,T/2], t(T-t) on [T/2,T): blow-up at T only
};

struct RhoLogs {
    double rho = 0.0;   // log rho   = s*alpha
    double rho0 = 0.0;  // log rho_0 = s*alpha - (3/2)log(s xi) - 2 log lambda
    double rho1 = 0.0;  // log rho_1 = s*alpha - (1/2)log(s xi) - log lambda
    double rho2 = 0.0;  // log rho_2 = s*alpha - log(s xi) - log lambda
    double rho3 = 0.0;  // log rho_3 = s*alpha - (1/2)log(s xi) - (1/2)log lambda
};

struct RhoInvSq {
    double rho = 0.0;   // e^{-2 s alpha}
    double rho0 = 0.0;  // (s xi)^3 lambda^4 e^{-2 s alpha}
    double rho1 = 0.0;  // (s xi)   lambda^2 e^{-2 s alpha}
    double rho2 = 0.0;  // (s xi)^2 lambda^2 e^{-2 s alpha}
    double rho3 = 0.0;  // (s xi)   lambda   e^{-2 s alpha}
};

/// Carleman weight system: alpha, xi and the rho family built from eta and
/// the parameters (s, lambda). Evaluators are pure; all blow-up quantities
/// are produced from a single combined exponent. Immutable after build.
class WeightSystem {
public:
    WeightSystem(const SpaceTimeGrid& grid, EtaFunction eta, double lambda, double s,
                 TimeProfile profile = TimeProfile::Symmetric, double s_scale = 2.0,
                 double lambda_min = 2.0);

    /// Threshold proxy s_min = s_scale * (T + T^{8/3}).
    static double s_threshold(double T, double s_scale = 2.0) {
        return s_scale * (T + std::pow(T, 8.0 / 3.0));
    }

    const EtaFunction& eta() const { return eta_; }
    double s() const { return s_; }
    double lambda() const { return lambda_; }
    double T() const { return T_; }
    double s_min() const { return s_min_; }
    double lambda_min() const { return lambda_min_; }
    TimeProfile profile() const { return profile_; }
    bool below_threshold() const { return s_ < s_min_ || lambda_ < lambda_min_; }
    double sup_eta() const { return eta_.sup_norm; }
    double min_eta() const { return min_eta_; }

    /// theta(t): the time denominator of the weights under the profile.
    double theta(double t) const;

    double alpha(double t, int node) const;
    double xi(double t, int node) const;
    double log_xi(double t, int node) const;

    RhoLogs log_rho(double t, int node) const;
    RhoInvSq rho_inv_sq(double t, int node) const;

    /// min over the midpoint lattice of alpha (used to normalize the
    /// variational weights; cached on first use).
    double alpha_min_lattice(const SpaceTimeGrid& grid) const;

    /// sup_Q rho_0/rho = sup (s xi)^{-3/2} lambda^{-2}, attained where xi is
    /// minimal (theta maximal, eta minimal); the time sup is analytic.
    double sup_rho0_over_rho() const;

private:
    void require_inside(double t) const;

    EtaFunction eta_;
    double lambda_ = 0.0;
    double s_ = 0.0;
    double T_ = 0.0;
    double s_min_ = 0.0;
    double lambda_min_ = 0.0;
    TimeProfile profile_ = TimeProfile::Symmetric;
    double exp_two_lambda_sup_ = 0.0;  // e^{2 lambda ||eta||_inf}
    double min_eta_ = 0.0;
    mutable double alpha_min_cache_ = -1.0;
    mutable bool alpha_min_valid_ = false;
};

/// Empirical constants for the weight-derivative bounds. Gradients are
/// centred finite differences of the combined log-exponent, so the ratios
/// never form the exponentials themselves.
struct BoundReport {
    double m = 0.0;       // xi power in the gradient bound
    double k = 0.0;       // xi power in the time-derivative bound
    double c_grad = 0.0;  // max |grad(2 s alpha + m log xi)| / (s lambda xi)
    double c_time = 0.0;  // max |d/dt(2 s alpha + k log xi)| / (T s xi e^{2 lambda sup eta})
    double eq45a_value = 0.0;     // sup s^{-1} xi^{-1} (time sup analytic)
    double eq45a_expected = 0.0;  // T^2 e^{-lambda min eta} / (4 s)
};

BoundReport check_weight_bounds(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                double m = 0.0, double k = 0.0);

}  // namespace heatctl
