#include "heatctl/nullcontrol.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "heatctl/probes.hpp"

namespace heatctl {

namespace {

double sparse_abs_max(const Eigen::SparseMatrix<double>& m) {
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            v = std::max(v, std::abs(it.value()));
    return v;
}

}  // namespace

VariationalSystem assemble_variational(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                       const LstarCoefficients& test,
                                       const LstarCoefficients& trial, const Field* g,
                                       const Eigen::VectorXd* y0, double eps) {
    VariationalSystem sys;
    const int n = grid.num_nodes();
    const int nt = grid.nt;
    const int sz = grid.lattice_size();
    const double s = ws.s();
    const double lambda = ws.lambda();

    sys.log_shift = 2.0 * s * ws.alpha_min_lattice(grid);
    sys.eps = eps;

    sys.wq.resize(sz);
    sys.wq_point.resize(sz);
    sys.wgamma.resize(static_cast<Eigen::Index>(nt) * grid.num_trace());
    sys.wgamma_point.resize(sys.wgamma.size());
    for (int k = 0; k < nt; ++k) {
        const double t = grid.tau(k);
        for (int i = 0; i < n; ++i) {
            const double ex = safe_exp(-(2.0 * s * ws.alpha(t, i) - sys.log_shift));
            sys.wq_point[grid.lattice_index(k, i)] = ex;
            sys.wq[grid.lattice_index(k, i)] = grid.dt * grid.wq[i] * ex;
        }
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            // rho_0^{-2} = (s xi)^3 lambda^4 e^{-2 s alpha}, one combined exponent
            const double expo = -(2.0 * s * ws.alpha(t, bn.node) - sys.log_shift) +
                                3.0 * (std::log(s) + ws.log_xi(t, bn.node)) +
                                4.0 * std::log(lambda);
            const double ex = safe_exp(expo);
            sys.wgamma_point[k * grid.num_trace() + j] = ex;
            sys.wgamma[k * grid.num_trace() + j] = grid.dt * bn.sigma_gamma * ex;
        }
    }

    sys.D_test = build_lstar_matrix(grid, test);
    sys.symmetric = (&test == &trial);
    if (!sys.symmetric) {
        sys.D_trial = build_lstar_matrix(grid, trial);
    } else {
        sys.D_trial = sys.D_test;
    }

    Eigen::SparseMatrix<double> Wq(sz, sz);
    {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(sz);
        for (int r = 0; r < sz; ++r)
            if (sys.wq[r] != 0.0) t.emplace_back(r, r, sys.wq[r]);
        Wq.setFromTriplets(t.begin(), t.end());
    }
    sys.B = sys.D_test.transpose() * Wq * sys.D_trial;

    // gamma observation term (diagonal in the lattice numbering)
    {
        Eigen::SparseMatrix<double> T(sz, sz);
        std::vector<Eigen::Triplet<double>> t;
        for (int k = 0; k < nt; ++k)
            for (int j = 0; j < grid.num_trace(); ++j) {
                const double w = sys.wgamma[k * grid.num_trace() + j];
                if (w == 0.0) continue;
                const int r = grid.lattice_index(k, grid.boundary[j].node);
                t.emplace_back(r, r, w);
            }
        T.setFromTriplets(t.begin(), t.end());
        sys.B += T;
    }
    if (eps > 0.0) {
        Eigen::SparseMatrix<double> I(sz, sz);
        I.setIdentity();
        sys.B += eps * I;
    }

    if (sys.symmetric) {
        Eigen::SparseMatrix<double> Bt = sys.B.transpose();
        Eigen::SparseMatrix<double> diff = sys.B - Bt;
        sys.symmetry_error = sparse_abs_max(diff) / std::max(sparse_abs_max(sys.B), 1e-300);
        if (sys.symmetry_error > 1e-12)
            throw std::runtime_error("assemble_variational: system lost symmetry (" +
                                     std::to_string(sys.symmetry_error) + ")");
        sys.B = 0.5 * (sys.B + Bt);
    }

    sys.rhs = Eigen::VectorXd::Zero(sz);
    if (g) {
        g->require_shape(grid, "assemble rhs g");
        for (int k = 0; k < nt; ++k)
            for (int i = 0; i < n; ++i)
                sys.rhs[grid.lattice_index(k, i)] = grid.dt * grid.wq[i] * (*g)(k, i);
    }
    if (y0 && y0->size() > 0) {
        if (y0->size() != n)
            throw std::invalid_argument("assemble rhs: y0 size mismatch");
        // <y0, q(0)>: q at t=0 extrapolated from the first two cells,
        // q(0) ~ (3 q_0 - q_1)/2
        for (int i = 0; i < n; ++i) {
            sys.rhs[grid.lattice_index(0, i)] += 1.5 * grid.wq[i] * (*y0)[i];
            sys.rhs[grid.lattice_index(1, i)] -= 0.5 * grid.wq[i] * (*y0)[i];
        }
    }
    return sys;
}

VariationalSystem assemble_B(const SpaceTimeGrid& grid, const WeightSystem& ws,
                             const ProblemSpec& spec, double eps) {
    validate_problem(grid, spec);
    LstarCoefficients lc = lstar_coefficients(grid, spec);
    const Field* g = (spec.g.vec().size() > 0) ? &spec.g : nullptr;
    const Eigen::VectorXd* y0 = (spec.y0.size() > 0) ? &spec.y0 : nullptr;
    return assemble_variational(grid, ws, lc, lc, g, y0, eps);
}

Eigen::VectorXd solve_variational(const VariationalSystem& sys, const SolveOptions& opts,
                                  SolveDiagnostics& diag) {
    const Eigen::Index sz = sys.B.rows();
    diag.normalization_shift = sys.log_shift;

    // Symmetric diagonal equilibration. Dead unknowns (zero diagonal: all
    // incident weights underflowed) are pinned to zero.
    Eigen::VectorXd d = sys.B.diagonal();
    double dmax = d.cwiseAbs().maxCoeff();
    if (dmax <= 0.0) throw std::runtime_error("solve_variational: zero system");
    Eigen::VectorXd scale(sz);
    std::vector<char> dead(sz, 0);
    for (Eigen::Index i = 0; i < sz; ++i) {
        if (std::abs(d[i]) <= dmax * 1e-290) {
            dead[i] = 1;
            scale[i] = 1.0;
        } else {
            scale[i] = 1.0 / std::sqrt(std::abs(d[i]));
        }
    }
    Eigen::SparseMatrix<double> Bs = sys.B;
    // Bs = S B S
    for (int k = 0; k < Bs.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Bs, k); it; ++it)
            it.valueRef() *= scale[it.row()] * scale[it.col()];
    // identity rows for dead unknowns
    {
        std::vector<Eigen::Triplet<double>> t;
        for (Eigen::Index i = 0; i < sz; ++i)
            if (dead[i]) t.emplace_back(i, i, 1.0);
        if (!t.empty()) {
            Eigen::SparseMatrix<double> P(sz, sz);
            P.setFromTriplets(t.begin(), t.end());
            Bs += P;
        }
    }
    Eigen::VectorXd rs = sys.rhs;
    for (Eigen::Index i = 0; i < sz; ++i) rs[i] = dead[i] ? 0.0 : rs[i] * scale[i];

    Eigen::VectorXd x;
    auto finish = [&](Eigen::VectorXd xin) {
        Eigen::VectorXd r = rs - Bs * xin;
        diag.galerkin_rel = r.norm() / std::max(rs.norm(), 1e-300);
        Eigen::VectorXd p = xin;
        for (Eigen::Index i = 0; i < sz; ++i) p[i] = dead[i] ? 0.0 : p[i] * scale[i];
        return p;
    };

    if (sys.symmetric) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Bs);
        if (ldlt.info() == Eigen::Success) {
            x = ldlt.solve(rs);
            Eigen::VectorXd r = rs - Bs * x;
            x += ldlt.solve(r);  // one refinement pass
            if (x.allFinite()) {
                diag.solver = "ldlt";
                return finish(std::move(x));
            }
        }
        // retry with a relative shift (the equilibrated diagonal is ~1)
        diag.eps_used = 1e-12;
        Eigen::SparseMatrix<double> I(sz, sz);
        I.setIdentity();
        Eigen::SparseMatrix<double> Bshift = Bs + diag.eps_used * I;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt2(Bshift);
        if (ldlt2.info() == Eigen::Success) {
            x = ldlt2.solve(rs);
            Eigen::VectorXd r = rs - Bshift * x;
            x += ldlt2.solve(r);
            if (x.allFinite()) {
                diag.solver = "ldlt+shift";
                return finish(std::move(x));
            }
        }
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
            cg(Bs);
        cg.setTolerance(opts.cg_tol);
        cg.setMaxIterations(opts.cg_max_iters > 0 ? opts.cg_max_iters : 10 * sz);
        x = cg.solve(rs);
        diag.solver = "cg";
        diag.cg_iterations = static_cast<int>(cg.iterations());
        if (cg.info() != Eigen::Success)
            throw std::runtime_error("solve_variational: CG did not converge, residual " +
                                     std::to_string(cg.error()));
        return finish(std::move(x));
    }

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(Bs);
    if (lu.info() != Eigen::Success) {
        diag.eps_used = 1e-12;
        Eigen::SparseMatrix<double> I(sz, sz);
        I.setIdentity();
        Eigen::SparseMatrix<double> Bshift = Bs + diag.eps_used * I;
        lu.compute(Bshift);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("solve_variational: LU factorization failed");
        diag.solver = "lu+shift";
    } else {
        diag.solver = "lu";
    }
    x = lu.solve(rs);
    Eigen::VectorXd r = rs - Bs * x;
    x += lu.solve(r);
    if (!x.allFinite()) throw std::runtime_error("solve_variational: LU produced non-finite p");
    return finish(std::move(x));
}

namespace {

void fill_energies(const VariationalSystem& sys, const Eigen::VectorXd& p,
                   SolveDiagnostics& diag) {
    Eigen::VectorXd Dp = sys.D_trial * p;
    Eigen::VectorXd Dtp = sys.symmetric ? Dp : Eigen::VectorXd(sys.D_test * p);
    diag.q_energy = 0.0;
    for (Eigen::Index r = 0; r < Dp.size(); ++r) diag.q_energy += sys.wq[r] * Dp[r] * Dtp[r];
    diag.energy_lhs = p.dot(sys.B * p);
    diag.energy_rhs = sys.rhs.dot(p);
}

}  // namespace

ControlSolution solve_null_control(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                   const ProblemSpec& spec, const SolveOptions& opts) {
    VariationalSystem sys = assemble_B(grid, ws, spec, opts.eps);
    ControlSolution sol;
    Eigen::VectorXd p = solve_variational(sys, opts, sol.diag);
    sol.p = Field(grid.nt, grid.num_nodes(), p);

    // y = rho^{-2} L*(p), f = -rho_0^{-2} p on gamma; both invariant under
    // the weight normalization shift.
    Eigen::VectorXd Lp = sys.D_trial * p;
    sol.y = Field(grid);
    for (Eigen::Index r = 0; r < Lp.size(); ++r) sol.y.vec()[r] = sys.wq_point[r] * Lp[r];
    sol.f = TraceField(grid);
    double gamma_energy = 0.0;
    for (int k = 0; k < grid.nt; ++k)
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            if (bn.sigma_gamma <= 0.0) continue;  // exactly zero off gamma
            const double pv = sol.p(k, bn.node);
            sol.f(k, j) = -sys.wgamma_point[k * grid.num_trace() + j] * pv;
            gamma_energy += sys.wgamma[k * grid.num_trace() + j] * pv * pv;
        }
    fill_energies(sys, p, sol.diag);
    sol.diag.gamma_energy = gamma_energy;

    // Weighted norms: ||rho y||^2 = e^{shift} q_energy, ||rho_0 f||^2 =
    // e^{shift} gamma_energy (log form first; plain value when representable).
    sol.log_y_norm_Y = 0.5 * (sys.log_shift + std::log(std::max(sol.diag.q_energy, 1e-300)));
    sol.log_f_norm_F = 0.5 * (sys.log_shift + std::log(std::max(gamma_energy, 1e-300)));
    sol.y_norm_Y = safe_exp(sol.log_y_norm_Y);
    sol.f_norm_F = safe_exp(sol.log_f_norm_F);

    // Terminal replay through the forward solver.
    ForwardResult replay = solve_forward(grid, spec, &sol.f);
    sol.terminal_norm = l2_omega(grid, replay.terminal);
    double y0n = (spec.y0.size() > 0) ? l2_omega(grid, spec.y0) : 0.0;
    sol.terminal_ratio = (y0n > 0.0) ? sol.terminal_norm / y0n : sol.terminal_norm;
    sol.replay_l2 = replay.l2_at_nodes;
    return sol;
}

OptimalityResidual check_optimality_residual(const SpaceTimeGrid& grid, const ProblemSpec& spec,
                                             const ControlSolution& sol) {
    OptimalityResidual res;
    const Field& y = sol.y;
    const int n = grid.num_nodes();
    const int nt = grid.nt;

    // interior residual of the forward operator applied to the
    // reconstructed state
    double acc = 0.0;
    for (int k = 0; k < nt; ++k) {
        for (int i = 0; i < n; ++i) {
            if (grid.is_boundary_node(i)) continue;
            double yt;
            if (k == 0)
                yt = (y(1, i) - y(0, i)) / grid.dt;
            else if (k == nt - 1)
                yt = (y(nt - 1, i) - y(nt - 2, i)) / grid.dt;
            else
                yt = (y(k + 1, i) - y(k - 1, i)) / (2.0 * grid.dt);
            double lap = 0.0, adv = 0.0;
            for (int d = 0; d < grid.dim(); ++d) {
                const int s = (d == 0) ? 1 : grid.nx;
                const double h = (d == 0) ? grid.hx : grid.hy;
                lap += (y(k, i - s) - 2.0 * y(k, i) + y(k, i + s)) / (h * h);
                if (!spec.drift[d].is_zero())
                    adv += spec.drift[d].at(k, i) * (y(k, i + s) - y(k, i - s)) / (2.0 * h);
            }
            double r = yt - lap + adv + spec.a.at(k, i) * y(k, i);
            if (spec.g.vec().size() > 0) r -= spec.g(k, i);
            acc += grid.dt * grid.wq[i] * r * r;
        }
    }
    res.interior = std::sqrt(acc);

    // boundary mismatch d_nu y + b y - f with a second-order one-sided
    // normal derivative from interior values
    acc = 0.0;
    for (int k = 0; k < nt; ++k)
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            double dnu = 0.0;
            for (int q = 0; q < bn.num_faces; ++q) {
                Face f = bn.faces[q];
                const int d = (f == Face::XLow || f == Face::XHigh) ? 0 : 1;
                const int s = (d == 0) ? 1 : grid.nx;
                const int pos = (d == 0) ? bn.node % grid.nx : bn.node / grid.nx;
                const int last = (d == 0) ? grid.nx - 1 : grid.ny - 1;
                const double h = (d == 0) ? grid.hx : grid.hy;
                double der;
                if (pos == 0)
                    der = (-3.0 * y(k, bn.node) + 4.0 * y(k, bn.node + s) -
                           y(k, bn.node + 2 * s)) /
                          (2.0 * h);
                else
                    der = (3.0 * y(k, bn.node) - 4.0 * y(k, bn.node - s) +
                           y(k, bn.node - 2 * s)) /
                          (2.0 * h);
                const double sign = (f == Face::XLow || f == Face::YLow) ? -1.0 : 1.0;
                (void)last;
                dnu += sign * der;
            }
            double r = dnu + spec.b[j] * y(k, bn.node) - sol.f(k, j);
            acc += grid.dt * bn.sigma * r * r;
        }
    res.boundary = std::sqrt(acc);
    res.total = res.interior + res.boundary;
    return res;
}

double log_functional_S(const SpaceTimeGrid& grid, const WeightSystem& ws, const Field& y,
                        const TraceField& f) {
    y.require_shape(grid, "log_functional_S");
    f.require_shape(grid, "log_functional_S");
    // log-sum-exp over all weighted squared entries
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> expo;
    expo.reserve(static_cast<size_t>(grid.lattice_size()));
    for (int k = 0; k < grid.nt; ++k) {
        const double t = grid.tau(k);
        for (int i = 0; i < grid.num_nodes(); ++i) {
            double v = std::abs(y(k, i));
            if (v == 0.0) continue;
            RhoLogs lg = ws.log_rho(t, i);
            double e = 2.0 * lg.rho + std::log(0.5 * grid.dt * grid.wq[i]) + 2.0 * std::log(v);
            expo.push_back(e);
            m = std::max(m, e);
        }
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            double v = std::abs(f(k, j));
            if (v == 0.0 || bn.sigma_gamma <= 0.0) continue;
            RhoLogs lg = ws.log_rho(t, bn.node);
            double e = 2.0 * lg.rho0 + std::log(0.5 * grid.dt * bn.sigma_gamma) +
                       2.0 * std::log(v);
            expo.push_back(e);
            m = std::max(m, e);
        }
    }
    if (expo.empty()) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (double e : expo) acc += std::exp(e - m);
    return m + std::log(acc);
}

NormBoundReport check_norm_bound(const SpaceTimeGrid& grid, const WeightSystem& ws,
                                 const ProblemSpec& spec, int num_pairs,
                                 std::uint64_t seed_base, const SolveOptions& opts) {
    NormBoundReport rep;
    const double aref = ws.alpha_min_lattice(grid);
    for (int q = 0; q < num_pairs; ++q) {
        std::uint64_t seed = seed_base + q;
        ProblemSpec case_spec = spec;
        // alternate pure-y0, pure-g and mixed cases
        const int kind = q % 3;
        if (kind != 1) case_spec.y0 = smooth_random_omega(grid, seed);
        if (kind != 0) {
            Field noise = smooth_random_field(grid, seed + 7777);
            case_spec.g = Field(grid);
            for (int k = 0; k < grid.nt; ++k) {
                const double t = grid.tau(k);
                for (int i = 0; i < grid.num_nodes(); ++i) {
                    double decay = safe_exp(-(ws.s() * ws.alpha(t, i) - ws.s() * aref));
                    case_spec.g(k, i) = noise(k, i) * decay;
                }
            }
        }
        ControlSolution sol = solve_null_control(grid, ws, case_spec, opts);
        NormBoundCase c;
        c.seed = seed;
        double gn = (case_spec.g.vec().size() > 0) ? l2_Q(grid, case_spec.g) : 0.0;
        double yn = (case_spec.y0.size() > 0) ? l2_omega(grid, case_spec.y0) : 0.0;
        c.data_norm = gn + yn;
        c.weighted_norm = sol.y_norm_Y + sol.f_norm_F;
        c.terminal_ratio = sol.terminal_ratio;
        if (c.data_norm > 0.0) {
            c.ratio = c.weighted_norm / c.data_norm;
            rep.c_hat = std::max(rep.c_hat, c.ratio);
        }
        rep.cases.push_back(c);
    }
    return rep;
}

}  // namespace heatctl
