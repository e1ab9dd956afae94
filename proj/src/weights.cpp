#include "heatctl/weights.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

namespace heatctl {

double safe_exp(double exponent) {
    if (exponent > 700.0) exponent = 700.0;
    if (exponent < -700.0) return 0.0;
    return std::exp(exponent);
}

namespace {

/// Finite-difference gradient of nodal values: centred inside, second-order
/// one-sided on the axis ends.
Eigen::MatrixXd fd_gradient(const SpaceTimeGrid& grid, const Eigen::VectorXd& v) {
    const int n = grid.num_nodes();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, grid.dim());
    auto deriv = [](double vm, double v0, double vp, double h, int kind) {
        if (kind == 0) return (vp - vm) / (2.0 * h);
        if (kind < 0) return (-3.0 * v0 + 4.0 * vp - vm) / (2.0 * h);  // vm = v at +2
        return (3.0 * v0 - 4.0 * vm + vp) / (2.0 * h);                 // vp = v at -2
    };
    for (int i = 0; i < n; ++i) {
        int ix = i % grid.nx;
        int iy = i / grid.nx;
        if (ix == 0)
            g(i, 0) = deriv(v[i + 2], v[i], v[i + 1], grid.hx, -1);
        else if (ix == grid.nx - 1)
            g(i, 0) = deriv(v[i - 1], v[i], v[i - 2], grid.hx, +1);
        else
            g(i, 0) = deriv(v[i - 1], v[i], v[i + 1], grid.hx, 0);
        if (grid.dim() == 2) {
            const int s = grid.nx;
            if (iy == 0)
                g(i, 1) = deriv(v[i + 2 * s], v[i], v[i + s], grid.hy, -1);
            else if (iy == grid.ny - 1)
                g(i, 1) = deriv(v[i - s], v[i], v[i - 2 * s], grid.hy, +1);
            else
                g(i, 1) = deriv(v[i - s], v[i], v[i + s], grid.hy, 0);
        }
    }
    return g;
}

int face_axis(Face f) { return (f == Face::XLow || f == Face::XHigh) ? 0 : 1; }
double face_sign(Face f) { return (f == Face::XLow || f == Face::YLow) ? -1.0 : 1.0; }

}  // namespace

void compute_eta_tables(const SpaceTimeGrid& grid, EtaFunction& eta) {
    const int n = grid.num_nodes();
    eta.gradient = fd_gradient(grid, eta.values);
    eta.sup_norm = eta.values.cwiseAbs().maxCoeff();

    eta.normal_deriv.assign(grid.num_trace(), 0.0);
    for (int j = 0; j < grid.num_trace(); ++j) {
        const BoundaryNode& bn = grid.boundary[j];
        double worst = -std::numeric_limits<double>::infinity();
        for (int q = 0; q < bn.num_faces; ++q) {
            Face f = bn.faces[q];
            double d = face_sign(f) * eta.gradient(bn.node, face_axis(f));
            worst = std::max(worst, d);
        }
        eta.normal_deriv[j] = worst;
    }

    // max |Lap eta| over interior nodes (5-point / 3-point stencil)
    double lb = 0.0;
    for (int i = 0; i < n; ++i) {
        int ix = i % grid.nx;
        int iy = i / grid.nx;
        if (ix == 0 || ix == grid.nx - 1) continue;
        if (grid.dim() == 2 && (iy == 0 || iy == grid.ny - 1)) continue;
        double lap =
            (eta.values[i - 1] - 2.0 * eta.values[i] + eta.values[i + 1]) / (grid.hx * grid.hx);
        if (grid.dim() == 2) {
            const int s = grid.nx;
            lap += (eta.values[i - s] - 2.0 * eta.values[i] + eta.values[i + s]) /
                   (grid.hy * grid.hy);
        }
        lb = std::max(lb, std::abs(lap));
    }
    eta.laplacian_bound = lb;
}

EtaCheckResult verify_eta(const SpaceTimeGrid& grid, const EtaFunction& eta,
                          double flatness_tol) {
    EtaCheckResult r;
    const int n = grid.num_nodes();

    r.min_eta_interior = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        if (grid.is_boundary_node(i)) continue;
        r.min_eta_interior = std::min(r.min_eta_interior, eta.values[i]);
    }
    if (!(r.min_eta_interior > 0.0)) {
        r.ok = false;
        r.violated = "(i) eta > 0 in Omega";
        return r;
    }

    // (ii): |grad eta| over all nodes, excluding 2D corners where the value
    // is forced to zero by the boundary conditions on the adjacent faces.
    r.c0_gradient = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        int j = grid.trace_of_node[i];
        if (j >= 0 && grid.boundary[j].num_faces > 1) continue;
        r.c0_gradient = std::min(r.c0_gradient, eta.gradient.row(i).norm());
    }
    if (!(r.c0_gradient > 1e-12)) {
        r.ok = false;
        r.violated = "(ii) |grad eta| >= c0 on closure";
        return r;
    }

    // (iii): outward slope on Gamma\gamma, corners excluded.
    r.c0_normal = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.num_trace(); ++j) {
        const BoundaryNode& bn = grid.boundary[j];
        if (bn.on_gamma() || bn.num_faces > 1) continue;
        r.c0_normal = std::min(r.c0_normal, -eta.normal_deriv[j]);
    }
    if (!(r.c0_normal > 1e-12)) {
        r.ok = false;
        r.violated = "(iii) d_nu eta <= -c0 on Gamma\\gamma";
        return r;
    }

    // (iv): eta and its tangential gradient vanish on Gamma\gamma.
    for (int j = 0; j < grid.num_trace(); ++j) {
        const BoundaryNode& bn = grid.boundary[j];
        if (bn.on_gamma()) continue;
        r.max_eta_on_rest = std::max(r.max_eta_on_rest, std::abs(eta.values[bn.node]));
        for (int q = 0; q < bn.num_faces; ++q) {
            int tangent = 1 - face_axis(bn.faces[q]);
            if (tangent >= grid.dim()) continue;  // no tangential direction in 1D
            r.max_tangential_on_rest =
                std::max(r.max_tangential_on_rest, std::abs(eta.gradient(bn.node, tangent)));
        }
    }
    if (r.max_eta_on_rest > flatness_tol || r.max_tangential_on_rest > flatness_tol) {
        r.ok = false;
        r.violated = "(iv) eta = 0, grad_Gamma eta = 0 on Gamma\\gamma";
        return r;
    }
    return r;
}

namespace {

Eigen::VectorXd harmonic_lift_2d(const SpaceTimeGrid& grid) {
    const int nx = grid.nx, ny = grid.ny, n = nx * ny;

    // Dirichlet data: smooth bump along each gamma segment, zero elsewhere.
    Eigen::VectorXd bc = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < grid.num_trace(); ++j) {
        const BoundaryNode& bn = grid.boundary[j];
        if (!bn.on_gamma() || bn.num_faces > 1) continue;
        Face f = bn.faces[0];
        // coordinate along the face (tangent axis)
        double pos = (face_axis(f) == 0) ? grid.y(bn.node) : grid.x(bn.node);
        double value = 0.0;
        for (const auto& seg : grid.domain.gamma) {
            if (seg.face != f) continue;
            if (pos < seg.lo - 1e-12 || pos > seg.hi + 1e-12) continue;
            double z = (pos - seg.lo) / (seg.hi - seg.lo);
            double sp = std::sin(M_PI * z);
            value = std::max(value, sp * sp);
        }
        bc[bn.node] = value;
    }

    std::vector<int> unknown_of(n, -1);
    std::vector<int> node_of;
    for (int i = 0; i < n; ++i)
        if (!grid.is_boundary_node(i)) {
            unknown_of[i] = static_cast<int>(node_of.size());
            node_of.push_back(i);
        }
    const int m = static_cast<int>(node_of.size());

    const double cx = 1.0 / (grid.hx * grid.hx);
    const double cy = 1.0 / (grid.hy * grid.hy);
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r) {
        int i = node_of[r];
        trips.emplace_back(r, r, 2.0 * (cx + cy));
        auto couple = [&](int nb, double c) {
            if (unknown_of[nb] >= 0)
                trips.emplace_back(r, unknown_of[nb], -c);
            else
                rhs[r] += c * bc[nb];
        };
        couple(i - 1, cx);
        couple(i + 1, cx);
        couple(i - nx, cy);
        couple(i + nx, cy);
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("build_eta: harmonic lift factorization failed");
    Eigen::VectorXd u = solver.solve(rhs);

    Eigen::VectorXd values = bc;
    for (int r = 0; r < m; ++r) values[node_of[r]] = u[r];
    return values;
}

}  // namespace

EtaFunction build_eta(const SpaceTimeGrid& grid, double amplitude) {
    if (!(amplitude > 0.0)) throw std::invalid_argument("build_eta: amplitude must be positive");
    EtaFunction eta;
    const int n = grid.num_nodes();
    eta.values.resize(n);

    if (grid.dim() == 1) {
        bool control_high = grid.boundary[1].on_gamma();
        double len = grid.domain.length_x();
        for (int i = 0; i < n; ++i) {
            double rel = (grid.x(i) - grid.domain.ax) / len;
            eta.values[i] = amplitude * (control_high ? rel : 1.0 - rel);
        }
    } else {
        Eigen::VectorXd v = harmonic_lift_2d(grid);
        double vmax = v.maxCoeff();
        if (!(vmax > 0.0)) throw std::runtime_error("build_eta: harmonic lift is not positive");
        eta.values = (amplitude / vmax) * v;
    }

    compute_eta_tables(grid, eta);
    EtaCheckResult check = verify_eta(grid, eta);
    if (!check.ok)
        throw std::runtime_error("build_eta: candidate rejected, violated property " +
                                 check.violated);
    eta.c0_gradient = check.c0_gradient;
    eta.c0_normal = check.c0_normal;
    eta.c0 = std::min(check.c0_gradient, check.c0_normal);
    return eta;
}

WeightSystem::WeightSystem(const SpaceTimeGrid& grid, EtaFunction eta, double lambda, double s,
                           TimeProfile profile, double s_scale, double lambda_min)
    : eta_(std::move(eta)),
      lambda_(lambda),
      s_(s),
      T_(grid.T),
      lambda_min_(lambda_min),
      profile_(profile) {
    if (!(lambda_ > 0.0) || !(s_ > 0.0))
        throw std::invalid_argument("WeightSystem: s and lambda must be positive");
    if (eta_.values.size() != grid.num_nodes())
        throw std::invalid_argument("WeightSystem: eta not shaped for grid");
    if (2.0 * lambda_ * eta_.sup_norm > 600.0)
        throw std::invalid_argument("WeightSystem: 2*lambda*sup(eta) exceeds exp range");
    s_min_ = s_threshold(T_, s_scale);
    exp_two_lambda_sup_ = std::exp(2.0 * lambda_ * eta_.sup_norm);
    min_eta_ = eta_.values.minCoeff();
}

void WeightSystem::require_inside(double t) const {
    if (!(t > 0.0) || !(t < T_))
        throw std::invalid_argument("WeightSystem: t must lie strictly inside (0,T)");
}

double WeightSystem::theta(double t) const {
    require_inside(t);
    if (profile_ == TimeProfile::FlatStart && t <= 0.5 * T_) return 0.25 * T_ * T_;
    return t * (T_ - t);
}

double WeightSystem::alpha(double t, int node) const {
    return (exp_two_lambda_sup_ - std::exp(lambda_ * eta_.values[node])) / theta(t);
}

double WeightSystem::xi(double t, int node) const {
    return std::exp(lambda_ * eta_.values[node]) / theta(t);
}

double WeightSystem::log_xi(double t, int node) const {
    return lambda_ * eta_.values[node] - std::log(theta(t));
}

RhoLogs WeightSystem::log_rho(double t, int node) const {
    RhoLogs r;
    const double la = s_ * alpha(t, node);
    const double lsxi = std::log(s_) + log_xi(t, node);
    const double ll = std::log(lambda_);
    r.rho = la;
    r.rho0 = la - 1.5 * lsxi - 2.0 * ll;
    r.rho1 = la - 0.5 * lsxi - ll;
    r.rho2 = la - lsxi - ll;
    r.rho3 = la - 0.5 * lsxi - 0.5 * ll;
    return r;
}

RhoInvSq WeightSystem::rho_inv_sq(double t, int node) const {
    RhoLogs lg = log_rho(t, node);
    RhoInvSq r;
    r.rho = safe_exp(-2.0 * lg.rho);
    r.rho0 = safe_exp(-2.0 * lg.rho0);
    r.rho1 = safe_exp(-2.0 * lg.rho1);
    r.rho2 = safe_exp(-2.0 * lg.rho2);
    r.rho3 = safe_exp(-2.0 * lg.rho3);
    return r;
}

double WeightSystem::alpha_min_lattice(const SpaceTimeGrid& grid) const {
    if (!alpha_min_valid_) {
        double amin = std::numeric_limits<double>::infinity();
        for (int k = 0; k < grid.nt; ++k) {
            double th = theta(grid.tau(k));
            for (int i = 0; i < grid.num_nodes(); ++i) {
                double a = (exp_two_lambda_sup_ - std::exp(lambda_ * eta_.values[i])) / th;
                amin = std::min(amin, a);
            }
        }
        alpha_min_cache_ = amin;
        alpha_min_valid_ = true;
    }
    return alpha_min_cache_;
}

double WeightSystem::sup_rho0_over_rho() const {
    // rho0/rho = (s xi)^{-3/2} lambda^{-2}; xi_min = e^{lambda min eta} * 4/T^2.
    const double xi_min = std::exp(lambda_ * min_eta_) * 4.0 / (T_ * T_);
    return std::pow(s_ * xi_min, -1.5) / (lambda_ * lambda_);
}

BoundReport check_weight_bounds(const SpaceTimeGrid& grid, const WeightSystem& ws, double m,
                                double k) {
    BoundReport rep;
    rep.m = m;
    rep.k = k;
    const int n = grid.num_nodes();
    const double s = ws.s();
    const double lambda = ws.lambda();
    const double e2l = std::exp(2.0 * lambda * ws.sup_eta());

    // Gradient bound: |grad(e^{2 s alpha} xi^m)| = e^{2 s alpha} xi^m |grad phi|
    // with phi = 2 s alpha + m log xi, so the audited ratio is
    // |grad phi| / (s lambda xi).
    Eigen::VectorXd phi(n);
    for (int kk = 0; kk < grid.nt; ++kk) {
        const double t = grid.tau(kk);
        for (int i = 0; i < n; ++i)
            phi[i] = 2.0 * s * ws.alpha(t, i) + m * ws.log_xi(t, i);
        // same stencils as the eta gradients: centred inside, one-sided at ends
        auto grad_at = [&](int i, int axis) {
            int stride = (axis == 0) ? 1 : grid.nx;
            int pos = (axis == 0) ? i % grid.nx : i / grid.nx;
            int last = (axis == 0) ? grid.nx - 1 : grid.ny - 1;
            double h = (axis == 0) ? grid.hx : grid.hy;
            if (pos == 0) return (-3.0 * phi[i] + 4.0 * phi[i + stride] - phi[i + 2 * stride]) /
                                 (2.0 * h);
            if (pos == last) return (3.0 * phi[i] - 4.0 * phi[i - stride] + phi[i - 2 * stride]) /
                                    (2.0 * h);
            return (phi[i + stride] - phi[i - stride]) / (2.0 * h);
        };
        for (int i = 0; i < n; ++i) {
            double g2 = grad_at(i, 0) * grad_at(i, 0);
            if (grid.dim() == 2) {
                double gy = grad_at(i, 1);
                g2 += gy * gy;
            }
            double ratio = std::sqrt(g2) / (s * lambda * ws.xi(t, i));
            rep.c_grad = std::max(rep.c_grad, ratio);
        }
    }

    // Time-derivative bound: |d/dt(xi^k e^{2 s alpha})| ratio with
    // 2 s alpha + k log xi differentiated across midpoints.
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd series(grid.nt);
        for (int kk = 0; kk < grid.nt; ++kk)
            series[kk] = 2.0 * s * ws.alpha(grid.tau(kk), i) + k * ws.log_xi(grid.tau(kk), i);
        for (int kk = 0; kk < grid.nt; ++kk) {
            double d;
            if (kk == 0)
                d = (series[1] - series[0]) / grid.dt;
            else if (kk == grid.nt - 1)
                d = (series[kk] - series[kk - 1]) / grid.dt;
            else
                d = (series[kk + 1] - series[kk - 1]) / (2.0 * grid.dt);
            double denom = grid.T * s * ws.xi(grid.tau(kk), i) * e2l;
            rep.c_time = std::max(rep.c_time, std::abs(d) / denom);
        }
    }

    // Eq. (45a): sup of s^{-1} xi^{-1}; the sup over time is analytic
    // (theta attains T^2/4 at t = T/2), the sup over x is node-wise.
    double emax = 0.0;
    for (int i = 0; i < n; ++i) emax = std::max(emax, std::exp(-lambda * ws.eta()(i)));
    rep.eq45a_value = emax * grid.T * grid.T / (4.0 * s);
    rep.eq45a_expected = std::exp(-lambda * ws.min_eta()) * grid.T * grid.T / (4.0 * s);
    return rep;
}

}  // namespace heatctl
