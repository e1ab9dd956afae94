#include "heatctl/carleman.hpp"

#include <cmath>

#include "heatctl/heat_ops.hpp"
#include "heatctl/probes.hpp"

namespace heatctl {

namespace {

int face_axis(Face f) { return (f == Face::XLow || f == Face::XHigh) ? 0 : 1; }
double face_sign(Face f) { return (f == Face::XLow || f == Face::YLow) ? -1.0 : 1.0; }

/// Discrete derivatives of a midpoint field with the boundary condition
/// d_nu psi + bc_coeff psi = bc_data folded into the boundary stencils, the
/// same closure the solvers use.
struct FieldCalculus {
    Field dt;
    Field lap;
    std::array<Field, 2> grad;
};

FieldCalculus compute_calculus(const SpaceTimeGrid& grid, const Field& psi,
                               const Eigen::VectorXd& bc_coeff, const TraceField* bc_data) {
    const int n = grid.num_nodes();
    const int nt = grid.nt;
    FieldCalculus c;
    c.dt = Field(grid);
    c.lap = Field(grid);
    c.grad[0] = Field(grid);
    if (grid.dim() == 2) c.grad[1] = Field(grid);

    for (int k = 0; k < nt; ++k) {
        for (int i = 0; i < n; ++i) {
            if (k == 0)
                c.dt(k, i) = (psi(1, i) - psi(0, i)) / grid.dt;
            else if (k == nt - 1)
                c.dt(k, i) = (psi(nt - 1, i) - psi(nt - 2, i)) / grid.dt;
            else
                c.dt(k, i) = (psi(k + 1, i) - psi(k - 1, i)) / (2.0 * grid.dt);
        }
        for (int i = 0; i < n; ++i) {
            double lap = 0.0;
            for (int d = 0; d < grid.dim(); ++d) {
                const int s = (d == 0) ? 1 : grid.nx;
                const int pos = (d == 0) ? i % grid.nx : i / grid.nx;
                const int last = (d == 0) ? grid.nx - 1 : grid.ny - 1;
                const double h = (d == 0) ? grid.hx : grid.hy;
                if (pos == 0)
                    lap += 2.0 * (psi(k, i + s) - psi(k, i)) / (h * h);
                else if (pos == last)
                    lap += 2.0 * (psi(k, i - s) - psi(k, i)) / (h * h);
                else
                    lap += (psi(k, i - s) - 2.0 * psi(k, i) + psi(k, i + s)) / (h * h);
                // interior gradient; boundary normal component set below
                if (pos == 0)
                    c.grad[d](k, i) = 0.0;
                else if (pos == last)
                    c.grad[d](k, i) = 0.0;
                else
                    c.grad[d](k, i) = (psi(k, i + s) - psi(k, i - s)) / (2.0 * h);
            }
            c.lap(k, i) = lap;
        }
        // boundary closure: d_nu psi = bc_data - bc_coeff * psi
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            const int i = bn.node;
            double dnu = -bc_coeff[j] * psi(k, i);
            if (bc_data) dnu += (*bc_data)(k, j);
            for (int q = 0; q < bn.num_faces; ++q) {
                Face f = bn.faces[q];
                const int d = face_axis(f);
                const double h = (d == 0) ? grid.hx : grid.hy;
                c.lap(k, i) += (2.0 / h) * dnu;
                c.grad[d](k, i) = face_sign(f) * dnu;
            }
            // tangential component along the face stays centred where possible
            for (int q = 0; q < bn.num_faces; ++q) {
                Face f = bn.faces[q];
                const int d = 1 - face_axis(f);
                if (d >= grid.dim() || bn.num_faces > 1) continue;  // corners keep normals
                const int s = (d == 0) ? 1 : grid.nx;
                const int pos = (d == 0) ? i % grid.nx : i / grid.nx;
                const int last = (d == 0) ? grid.nx - 1 : grid.ny - 1;
                const double h = (d == 0) ? grid.hx : grid.hy;
                if (pos > 0 && pos < last)
                    c.grad[d](k, i) = (psi(k, i + s) - psi(k, i - s)) / (2.0 * h);
            }
        }
    }
    return c;
}

}  // namespace

CarlemanReport eval_carleman_thm1(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                  const Field& psi, const Field* F1,
                                  const std::array<Field, 2>* F2, const TraceField* F3,
                                  bool squared_residual) {
    psi.require_shape(grid, "eval_carleman_thm1");
    CarlemanReport rep;
    rep.evaluator = "thm1";
    rep.s = ws.s();
    rep.lambda = ws.lambda();
    rep.below_threshold = ws.below_threshold();

    Eigen::VectorXd bc = Eigen::VectorXd::Zero(grid.num_trace());
    if (F2) {
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            for (int q = 0; q < bn.num_faces; ++q) {
                Face f = bn.faces[q];
                bc[j] += face_sign(f) * (*F2)[face_axis(f)](0, bn.node);
            }
        }
    }
    FieldCalculus c = compute_calculus(grid, psi, bc, F3);

    const int n = grid.num_nodes();
    for (int k = 0; k < grid.nt; ++k) {
        const double t = grid.tau(k);
        for (int i = 0; i < n; ++i) {
            RhoInvSq w = ws.rho_inv_sq(t, i);
            const double dv = grid.dt * grid.wq[i];
            double g2 = c.grad[0](k, i) * c.grad[0](k, i);
            if (grid.dim() == 2) g2 += c.grad[1](k, i) * c.grad[1](k, i);
            rep.lhs_grad += dv * w.rho1 * g2;
            rep.lhs_state += dv * w.rho1 * psi(k, i) * psi(k, i);
            double res = c.dt(k, i) + c.lap(k, i);
            rep.rhs_residual += dv * w.rho * (squared_residual ? res * res : std::abs(res));
            if (F1) rep.rhs_f1 += dv * w.rho * (*F1)(k, i) * (*F1)(k, i);
            if (F2) {
                double f2sq = (*F2)[0](k, i) * (*F2)[0](k, i);
                if (grid.dim() == 2) f2sq += (*F2)[1](k, i) * (*F2)[1](k, i);
                rep.rhs_f2 += dv * w.rho2 * f2sq;
            }
        }
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            RhoInvSq w = ws.rho_inv_sq(t, bn.node);
            const double v = psi(k, bn.node);
            rep.lhs_boundary += grid.dt * bn.sigma * w.rho0 * v * v;
            rep.rhs_obs += grid.dt * bn.sigma_gamma * w.rho0 * v * v;
            if (F3) rep.rhs_f3 += grid.dt * bn.sigma * w.rho3 * (*F3)(k, j) * (*F3)(k, j);
        }
    }
    rep.lhs_total = rep.lhs_grad + rep.lhs_state + rep.lhs_boundary;
    rep.rhs_total = rep.rhs_residual + rep.rhs_f1 + rep.rhs_f2 + rep.rhs_f3 + rep.rhs_obs;
    const double tiny = 1e-300;
    rep.indeterminate = (rep.rhs_total <= tiny && rep.lhs_total <= tiny);
    rep.ratio = rep.indeterminate ? 0.0 : rep.lhs_total / std::max(rep.rhs_total, tiny);
    return rep;
}

CarlemanReport eval_carleman_neumann(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                     const Field& p) {
    p.require_shape(grid, "eval_carleman_neumann");
    CarlemanReport rep;
    rep.evaluator = "neumann";
    rep.s = ws.s();
    rep.lambda = ws.lambda();
    rep.below_threshold = ws.below_threshold();

    Eigen::VectorXd bc = Eigen::VectorXd::Zero(grid.num_trace());
    FieldCalculus c = compute_calculus(grid, p, bc, nullptr);

    const double s = ws.s();
    const double l = ws.lambda();
    const int n = grid.num_nodes();
    for (int k = 0; k < grid.nt; ++k) {
        const double t = grid.tau(k);
        for (int i = 0; i < n; ++i) {
            const double e2sa = safe_exp(-2.0 * s * ws.alpha(t, i));
            const double xi = ws.xi(t, i);
            const double dv = grid.dt * grid.wq[i];
            const double pt = c.dt(k, i);
            const double lap = c.lap(k, i);
            rep.lhs_timepair += dv * e2sa * (pt * pt + lap * lap) / (s * xi);
            double g2 = c.grad[0](k, i) * c.grad[0](k, i);
            if (grid.dim() == 2) g2 += c.grad[1](k, i) * c.grad[1](k, i);
            rep.lhs_grad += dv * s * l * l * e2sa * xi * g2;
            rep.lhs_state += dv * s * l * l * e2sa * xi * p(k, i) * p(k, i);
            const double res = pt + lap;
            rep.rhs_residual += dv * e2sa * res * res;
        }
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            const double e2sa = safe_exp(-2.0 * s * ws.alpha(t, bn.node));
            const double xi = ws.xi(t, bn.node);
            const double xi3 = xi * xi * xi;
            const double v = p(k, bn.node);
            rep.lhs_boundary += grid.dt * bn.sigma * s * s * s * l * l * l * e2sa * xi3 * v * v;
            rep.rhs_obs +=
                grid.dt * bn.sigma_gamma * s * s * s * l * l * l * l * e2sa * xi3 * v * v;
        }
    }
    rep.lhs_total = rep.lhs_timepair + rep.lhs_grad + rep.lhs_state + rep.lhs_boundary;
    rep.rhs_total = rep.rhs_residual + rep.rhs_obs;
    const double tiny = 1e-300;
    rep.indeterminate = (rep.rhs_total <= tiny && rep.lhs_total <= tiny);
    rep.ratio = rep.indeterminate ? 0.0 : rep.lhs_total / std::max(rep.rhs_total, tiny);
    return rep;
}

std::vector<CarlemanSweepRow> carleman_sweep(const SpaceTimeGrid& grid, const EtaFunction& eta,
                                             double lambda, const std::vector<double>& s_values,
                                             int num_seeds, std::uint64_t seed_base) {
    std::vector<CarlemanSweepRow> rows;
    ProblemSpec neumann;
    neumann.b = Eigen::VectorXd::Zero(grid.num_trace());
    for (double s : s_values) {
        WeightSystem ws(grid, eta, lambda, s);
        for (int q = 0; q < num_seeds; ++q) {
            std::uint64_t seed = seed_base + q;
            Eigen::VectorXd psi0 = smooth_random_omega(grid, seed);
            Field psi = solve_adjoint(grid, neumann, psi0);
            for (const char* which : {"thm1", "neumann"}) {
                CarlemanReport rep = (which[0] == 't')
                                         ? eval_carleman_thm1(grid, ws, psi)
                                         : eval_carleman_neumann(grid, ws, psi);
                CarlemanSweepRow row;
                row.evaluator = rep.evaluator;
                row.s = s;
                row.lambda = lambda;
                row.seed = seed;
                row.lhs = rep.lhs_total;
                row.rhs = rep.rhs_total;
                row.ratio = rep.ratio;
                row.indeterminate = rep.indeterminate;
                row.below_threshold = rep.below_threshold;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::vector<CarlemanSummary> summarize_sweep(const std::vector<CarlemanSweepRow>& rows) {
    std::vector<CarlemanSummary> out;
    for (const auto& row : rows) {
        if (row.indeterminate) continue;
        bool found = false;
        for (auto& s : out) {
            if (s.evaluator == row.evaluator && s.s == row.s) {
                s.max_ratio = std::max(s.max_ratio, row.ratio);
                found = true;
            }
        }
        if (!found) out.push_back({row.evaluator, row.s, row.ratio});
    }
    return out;
}

}  // namespace heatctl
