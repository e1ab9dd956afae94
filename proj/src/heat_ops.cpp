#include "heatctl/heat_ops.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace heatctl {

namespace {

int axis_stride(const SpaceTimeGrid& grid, int axis) { return axis == 0 ? 1 : grid.nx; }
int axis_pos(const SpaceTimeGrid& grid, int node, int axis) {
    return axis == 0 ? node % grid.nx : node / grid.nx;
}
int axis_last(const SpaceTimeGrid& grid, int axis) {
    return axis == 0 ? grid.nx - 1 : grid.ny - 1;
}
double axis_step(const SpaceTimeGrid& grid, int axis) { return axis == 0 ? grid.hx : grid.hy; }

double face_sign(Face f) { return (f == Face::XLow || f == Face::YLow) ? -1.0 : 1.0; }
int face_axis(Face f) { return (f == Face::XLow || f == Face::XHigh) ? 0 : 1; }

}  // namespace

void validate_problem(const SpaceTimeGrid& grid, const ProblemSpec& spec) {
    if (spec.b.size() != grid.num_trace())
        throw std::invalid_argument("ProblemSpec: b must have one value per boundary node");
    if (!spec.b.allFinite()) throw std::invalid_argument("ProblemSpec: b has non-finite entries");
    if (spec.a.is_field()) {
        spec.a.field->require_shape(grid, "ProblemSpec a");
        if (!spec.a.field->all_finite())
            throw std::invalid_argument("ProblemSpec: a has non-finite entries");
    }
    for (int d = 0; d < grid.dim(); ++d) {
        if (spec.drift[d].is_field()) {
            spec.drift[d].field->require_shape(grid, "ProblemSpec A");
            if (!spec.drift[d].field->all_finite())
                throw std::invalid_argument("ProblemSpec: A has non-finite entries");
        }
    }
    if (spec.g.vec().size() > 0) {
        spec.g.require_shape(grid, "ProblemSpec g");
        if (!spec.g.all_finite())
            throw std::invalid_argument("ProblemSpec: g has non-finite entries");
    }
    if (spec.y0.size() > 0) {
        if (spec.y0.size() != grid.num_nodes())
            throw std::invalid_argument("ProblemSpec: y0 must have one value per spatial node");
        if (!spec.y0.allFinite())
            throw std::invalid_argument("ProblemSpec: y0 has non-finite entries");
    }
    if (spec.F && std::abs(spec.F(0.0)) > 1e-12)
        throw std::invalid_argument("ProblemSpec: nonlinearity must satisfy F(0) = 0");
}

double estimate_lipschitz(const std::function<double(double)>& F, double range, int samples) {
    double m = 0.0;
    const double h = 2.0 * range / samples;
    for (int i = 0; i < samples; ++i) {
        double v = -range + i * h;
        m = std::max(m, std::abs(F(v + h) - F(v)) / h);
    }
    return m;
}

namespace {

/// K = W (Lap_fold - A.grad - a): the weighted semi-discrete generator.
Eigen::SparseMatrix<double> build_generator(const SpaceTimeGrid& grid, const ProblemSpec& spec,
                                            int k, const std::function<double(double)>* lag,
                                            const Eigen::VectorXd* prev) {
    const int n = grid.num_nodes();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n) * (grid.dim() == 1 ? 4 : 7));

    for (int i = 0; i < n; ++i) {
        const double w = grid.wq[i];
        for (int d = 0; d < grid.dim(); ++d) {
            const int s = axis_stride(grid, d);
            const int pos = axis_pos(grid, i, d);
            const int last = axis_last(grid, d);
            const double h = axis_step(grid, d);
            const double c = w / (h * h);
            if (pos == 0) {
                trips.emplace_back(i, i + s, 2.0 * c);
                trips.emplace_back(i, i, -2.0 * c);
            } else if (pos == last) {
                trips.emplace_back(i, i - s, 2.0 * c);
                trips.emplace_back(i, i, -2.0 * c);
            } else {
                trips.emplace_back(i, i - s, c);
                trips.emplace_back(i, i + s, c);
                trips.emplace_back(i, i, -2.0 * c);
            }
            const Coefficient& A = spec.drift[d];
            if (!A.is_zero()) {
                const double av = A.at(k, i);
                const double cd = w * av / (2.0 * h);
                if (pos == 0) {  // -w A (-3u_i + 4u_{i+s} - u_{i+2s})/(2h)
                    trips.emplace_back(i, i, 3.0 * cd);
                    trips.emplace_back(i, i + s, -4.0 * cd);
                    trips.emplace_back(i, i + 2 * s, cd);
                } else if (pos == last) {
                    trips.emplace_back(i, i, -3.0 * cd);
                    trips.emplace_back(i, i - s, 4.0 * cd);
                    trips.emplace_back(i, i - 2 * s, -cd);
                } else {
                    trips.emplace_back(i, i + s, -cd);
                    trips.emplace_back(i, i - s, cd);
                }
            }
        }
        double react = spec.a.at(k, i);
        if (lag) react += (*lag)((*prev)[i]);
        if (react != 0.0) trips.emplace_back(i, i, -w * react);
    }
    // Robin fold: ghost elimination yields -sigma_j b_j on the diagonal of
    // the weighted operator (both incident faces of a corner included).
    for (int j = 0; j < grid.num_trace(); ++j) {
        const BoundaryNode& bn = grid.boundary[j];
        if (spec.b[j] != 0.0) trips.emplace_back(bn.node, bn.node, -bn.sigma * spec.b[j]);
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

}  // namespace

struct TimeStepper::StepMatrices {
    Eigen::SparseMatrix<double> Mp, Mm;
    bool symmetric = false;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    void factor() {
        if (symmetric) {
            ldlt.compute(Mp);
            if (ldlt.info() != Eigen::Success)
                throw std::runtime_error("time step factorization failed (LDLT)");
        } else {
            lu.compute(Mp);
            if (lu.info() != Eigen::Success)
                throw std::runtime_error("time step factorization failed (LU)");
        }
    }
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        if (symmetric) return ldlt.solve(rhs);
        return lu.solve(rhs);
    }
};

TimeStepper::TimeStepper(const SpaceTimeGrid& grid, const ProblemSpec& spec)
    : grid_(grid), spec_(spec) {
    theta_ = (spec.scheme == TimeScheme::BackwardEuler) ? 1.0 : 0.5;
    symmetric_ = !spec.has_drift();
    time_dependent_ = spec.a.is_field();
    for (int d = 0; d < grid.dim(); ++d)
        if (spec.drift[d].is_field()) time_dependent_ = true;
    for (int d = 0; d < grid.dim(); ++d) {
        if (spec.drift[d].is_zero()) continue;
        double amax = 0.0;
        if (spec.drift[d].is_field())
            amax = spec.drift[d].field->vec().cwiseAbs().maxCoeff();
        else
            amax = std::abs(spec.drift[d].constant);
        peclet_ = std::max(peclet_, amax * axis_step(grid, d) / 2.0);
    }
    if (!time_dependent_) {
        auto mats = build_step(0, nullptr, nullptr);
        static_mats_ = mats;
    }
}

std::shared_ptr<TimeStepper::StepMatrices> TimeStepper::build_step(
    int k, const std::function<double(double)>* lag, const Eigen::VectorXd* prev) const {
    auto mats = std::make_shared<StepMatrices>();
    Eigen::SparseMatrix<double> K = build_generator(grid_, spec_, k, lag, prev);
    const int n = grid_.num_nodes();
    Eigen::SparseMatrix<double> W(n, n);
    std::vector<Eigen::Triplet<double>> wt;
    wt.reserve(n);
    for (int i = 0; i < n; ++i) wt.emplace_back(i, i, grid_.wq[i]);
    W.setFromTriplets(wt.begin(), wt.end());
    mats->Mp = W - theta_ * grid_.dt * K;
    mats->Mm = W + (1.0 - theta_) * grid_.dt * K;
    mats->symmetric = symmetric_;
    mats->factor();
    return mats;
}

ForwardResult TimeStepper::forward(const Eigen::VectorXd& y0, const Field* g,
                                   const TraceField* f,
                                   const std::function<double(double)>* lag) const {
    const int n = grid_.num_nodes();
    const int nt = grid_.nt;
    if (g) g->require_shape(grid_, "solve_forward g");
    if (f) f->require_shape(grid_, "solve_forward f");

    ForwardResult res;
    res.peclet = peclet_;
    res.y = Field(grid_);
    res.l2_at_nodes.resize(nt + 1);

    Eigen::VectorXd z = (y0.size() > 0) ? y0 : Eigen::VectorXd::Zero(n);
    if (z.size() != n) throw std::invalid_argument("solve_forward: y0 size mismatch");
    res.l2_at_nodes[0] = l2_omega(grid_, z);

    const bool rebuild = time_dependent_ || lag != nullptr;
    for (int k = 0; k < nt; ++k) {
        std::shared_ptr<const StepMatrices> mats = static_mats_;
        if (rebuild) mats = build_step(k, lag, &z);

        Eigen::VectorXd rhs = mats->Mm * z;
        if (g)
            for (int i = 0; i < n; ++i) rhs[i] += grid_.dt * grid_.wq[i] * (*g)(k, i);
        if (f)
            for (int j = 0; j < grid_.num_trace(); ++j)
                rhs[grid_.boundary[j].node] += grid_.dt * grid_.boundary[j].sigma * (*f)(k, j);
        Eigen::VectorXd znew = mats->solve(rhs);
        for (int i = 0; i < n; ++i) res.y(k, i) = 0.5 * (z[i] + znew[i]);
        z.swap(znew);
        res.l2_at_nodes[k + 1] = l2_omega(grid_, z);
    }
    res.terminal = z;
    return res;
}

Field TimeStepper::adjoint(const Field* psi, const Eigen::VectorXd* terminal,
                           const TraceField* f3) const {
    if (time_dependent_)
        throw std::runtime_error("adjoint sweep requires time-independent coefficients");
    if (psi) psi->require_shape(grid_, "adjoint psi");
    if (f3) f3->require_shape(grid_, "adjoint F3");
    const int n = grid_.num_nodes();
    const int nt = grid_.nt;

    // Transposed matrices; for the symmetric case these are the forward ones.
    const StepMatrices& fwd = *static_mats_;
    Eigen::SparseMatrix<double> MpT, MmT;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> luT;
    if (!symmetric_) {
        MpT = fwd.Mp.transpose();
        MmT = fwd.Mm.transpose();
        luT.compute(MpT);
        if (luT.info() != Eigen::Success)
            throw std::runtime_error("adjoint factorization failed (LU)");
    }

    Field mu(grid_);
    Eigen::VectorXd mu_next = Eigen::VectorXd::Zero(n);
    for (int k = nt - 1; k >= 0; --k) {
        Eigen::VectorXd rhs =
            symmetric_ ? Eigen::VectorXd(fwd.Mm * mu_next) : Eigen::VectorXd(MmT * mu_next);
        if (psi) {
            for (int i = 0; i < n; ++i) {
                double bar = (*psi)(k, i);
                if (k + 1 < nt) bar = 0.5 * (bar + (*psi)(k + 1, i));
                else bar = 0.5 * bar;
                rhs[i] += grid_.dt * grid_.wq[i] * bar;
            }
        }
        if (f3) {
            for (int j = 0; j < grid_.num_trace(); ++j) {
                double bar = (*f3)(k, j);
                if (k + 1 < nt) bar = 0.5 * (bar + (*f3)(k + 1, j));
                else bar = 0.5 * bar;
                rhs[grid_.boundary[j].node] += grid_.dt * grid_.boundary[j].sigma * bar;
            }
        }
        if (k == nt - 1 && terminal) {
            for (int i = 0; i < n; ++i) rhs[i] += grid_.wq[i] * (*terminal)[i];
        }
        Eigen::VectorXd mk = symmetric_ ? fwd.solve(rhs) : luT.solve(rhs);
        for (int i = 0; i < n; ++i) mu(k, i) = mk[i];
        mu_next.swap(mk);
    }
    return mu;
}

ForwardResult solve_forward(const SpaceTimeGrid& grid, const ProblemSpec& spec,
                            const TraceField* f,
                            const std::function<double(double)>* lag_potential) {
    validate_problem(grid, spec);
    TimeStepper stepper(grid, spec);
    const Field* g = (spec.g.vec().size() > 0) ? &spec.g : nullptr;
    return stepper.forward(spec.y0, g, f, lag_potential);
}

namespace {

/// Centred (one-sided at axis ends) divergence of a vector field slice.
void add_divergence(const SpaceTimeGrid& grid, const std::array<Field, 2>& F2, int k,
                    Eigen::VectorXd& out) {
    const int n = grid.num_nodes();
    for (int d = 0; d < grid.dim(); ++d) {
        const int s = axis_stride(grid, d);
        const int last = axis_last(grid, d);
        const double h = axis_step(grid, d);
        for (int i = 0; i < n; ++i) {
            const int pos = axis_pos(grid, i, d);
            double v;
            if (pos == 0)
                v = (-3.0 * F2[d](k, i) + 4.0 * F2[d](k, i + s) - F2[d](k, i + 2 * s)) /
                    (2.0 * h);
            else if (pos == last)
                v = (3.0 * F2[d](k, i) - 4.0 * F2[d](k, i - s) + F2[d](k, i - 2 * s)) /
                    (2.0 * h);
            else
                v = (F2[d](k, i + s) - F2[d](k, i - s)) / (2.0 * h);
            out[i] += v;
        }
    }
}

}  // namespace

Field solve_adjoint(const SpaceTimeGrid& grid, const ProblemSpec& spec,
                    const Eigen::VectorXd& terminal, const Field* F1,
                    const std::array<Field, 2>* F2, const TraceField* F3) {
    if (terminal.size() != grid.num_nodes())
        throw std::invalid_argument("solve_adjoint: terminal datum size mismatch");

    if (!F2) {
        TimeStepper stepper(grid, spec);
        return stepper.adjoint(F1, &terminal, F3);
    }

    // General right-hand sides of the adjoint system: the flux F2 enters the
    // boundary condition as a Robin coefficient and the volume source as its
    // divergence. Matrices are rebuilt per step (F2 may depend on time).
    (*F2)[0].require_shape(grid, "solve_adjoint F2");
    if (grid.dim() == 2) (*F2)[1].require_shape(grid, "solve_adjoint F2");
    const int n = grid.num_nodes();
    const int nt = grid.nt;
    const double theta = (spec.scheme == TimeScheme::BackwardEuler) ? 1.0 : 0.5;

    Eigen::SparseMatrix<double> W(n, n);
    {
        std::vector<Eigen::Triplet<double>> wt;
        for (int i = 0; i < n; ++i) wt.emplace_back(i, i, grid.wq[i]);
        W.setFromTriplets(wt.begin(), wt.end());
    }
    auto robin_at = [&](int k) {
        Eigen::VectorXd b = spec.b;
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            for (int q = 0; q < bn.num_faces; ++q) {
                Face f = bn.faces[q];
                double flux = (*F2)[face_axis(f)](k, bn.node) * face_sign(f);
                if (!spec.drift[face_axis(f)].is_zero())
                    flux += spec.drift[face_axis(f)].at(k, bn.node) * face_sign(f);
                b[j] += flux;
            }
        }
        return b;
    };

    Field mu(grid);
    Eigen::VectorXd mu_next = Eigen::VectorXd::Zero(n);
    ProblemSpec base = spec;
    base.drift = {};  // Eq. (3) carries no drift in the principal part
    for (int k = nt - 1; k >= 0; --k) {
        ProblemSpec sk = base;
        sk.b = robin_at(k);
        Eigen::SparseMatrix<double> K = build_generator(grid, sk, k, nullptr, nullptr);
        Eigen::SparseMatrix<double> Mp = W - theta * grid.dt * K;
        Eigen::SparseMatrix<double> Mm = W + (1.0 - theta) * grid.dt * K;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Mp);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("solve_adjoint: factorization failed");

        Eigen::VectorXd src = Eigen::VectorXd::Zero(n);
        if (F1)
            for (int i = 0; i < n; ++i) src[i] += (*F1)(k, i);
        add_divergence(grid, *F2, k, src);
        Eigen::VectorXd src_next = Eigen::VectorXd::Zero(n);
        if (k + 1 < nt) {
            if (F1)
                for (int i = 0; i < n; ++i) src_next[i] += (*F1)(k + 1, i);
            add_divergence(grid, *F2, k + 1, src_next);
        }

        Eigen::VectorXd rhs = Mm * mu_next;
        for (int i = 0; i < n; ++i)
            rhs[i] += grid.dt * grid.wq[i] * 0.5 * (src[i] + src_next[i]);
        if (F3) {
            for (int j = 0; j < grid.num_trace(); ++j) {
                double bar = (*F3)(k, j);
                if (k + 1 < nt) bar = 0.5 * (bar + (*F3)(k + 1, j));
                else bar = 0.5 * bar;
                rhs[grid.boundary[j].node] += grid.dt * grid.boundary[j].sigma * bar;
            }
        }
        if (k == nt - 1)
            for (int i = 0; i < n; ++i) rhs[i] += grid.wq[i] * terminal[i];

        Eigen::VectorXd mk = solver.solve(rhs);
        for (int i = 0; i < n; ++i) mu(k, i) = mk[i];
        mu_next.swap(mk);
    }
    return mu;
}

HeatOperators::HeatOperators(const SpaceTimeGrid& grid, Eigen::VectorXd b, TimeScheme scheme)
    : grid_(grid) {
    spec_.b = std::move(b);
    spec_.scheme = scheme;
    validate_problem(grid, spec_);
    stepper_ = std::make_unique<TimeStepper>(grid_, spec_);
}

Field HeatOperators::H0(const Field& q) const {
    q.require_shape(grid_, "H0");
    return stepper_->forward(Eigen::VectorXd(), &q, nullptr).y;
}

Field HeatOperators::H0_star(const Field& psi) const {
    psi.require_shape(grid_, "H0_star");
    return stepper_->adjoint(&psi, nullptr, nullptr);
}

Field HeatOperators::G(const TraceField& beta) const {
    beta.require_shape(grid_, "G");
    return stepper_->forward(Eigen::VectorXd(), nullptr, &beta).y;
}

TraceField HeatOperators::G_star(const Field& w) const {
    w.require_shape(grid_, "G_star");
    return trace_of(grid_, stepper_->adjoint(&w, nullptr, nullptr));
}

LstarCoefficients lstar_coefficients(const SpaceTimeGrid& grid, const ProblemSpec& spec) {
    LstarCoefficients c;
    c.a = spec.a;
    c.drift = spec.drift;
    c.b_eff = spec.b;
    for (int j = 0; j < grid.num_trace(); ++j) {
        const BoundaryNode& bn = grid.boundary[j];
        for (int q = 0; q < bn.num_faces; ++q) {
            Face f = bn.faces[q];
            const Coefficient& A = spec.drift[face_axis(f)];
            if (!A.is_zero()) c.b_eff[j] += A.at(0, bn.node) * face_sign(f);
        }
    }
    return c;
}

Eigen::SparseMatrix<double> build_lstar_matrix(const SpaceTimeGrid& grid,
                                               const LstarCoefficients& coeffs) {
    const int n = grid.num_nodes();
    const int nt = grid.nt;
    const int sz = grid.lattice_size();
    if (coeffs.b_eff.size() != grid.num_trace())
        throw std::invalid_argument("build_lstar_matrix: b_eff size mismatch");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(sz) * 8);
    auto at = [&](int k, int i) { return grid.lattice_index(k, i); };

    for (int k = 0; k < nt; ++k) {
        for (int i = 0; i < n; ++i) {
            const int row = at(k, i);
            // -d_t p: centred across midpoints, one-sided at the extremes.
            if (k == 0) {
                trips.emplace_back(row, at(1, i), -1.0 / grid.dt);
                trips.emplace_back(row, at(0, i), 1.0 / grid.dt);
            } else if (k == nt - 1) {
                trips.emplace_back(row, at(nt - 1, i), -1.0 / grid.dt);
                trips.emplace_back(row, at(nt - 2, i), 1.0 / grid.dt);
            } else {
                trips.emplace_back(row, at(k + 1, i), -0.5 / grid.dt);
                trips.emplace_back(row, at(k - 1, i), 0.5 / grid.dt);
            }
            // -Lap p with the multiplier boundary constraint folded in.
            for (int d = 0; d < grid.dim(); ++d) {
                const int s = axis_stride(grid, d);
                const int pos = axis_pos(grid, i, d);
                const int last = axis_last(grid, d);
                const double h = axis_step(grid, d);
                const double c = 1.0 / (h * h);
                if (pos == 0) {
                    trips.emplace_back(row, at(k, i + s), -2.0 * c);
                    trips.emplace_back(row, at(k, i), 2.0 * c);
                } else if (pos == last) {
                    trips.emplace_back(row, at(k, i - s), -2.0 * c);
                    trips.emplace_back(row, at(k, i), 2.0 * c);
                } else {
                    trips.emplace_back(row, at(k, i - s), -c);
                    trips.emplace_back(row, at(k, i + s), -c);
                    trips.emplace_back(row, at(k, i), 2.0 * c);
                }
                // -div(A p): centred, one-sided at the ends.
                const Coefficient& A = coeffs.drift[d];
                if (!A.is_zero()) {
                    if (pos == 0) {
                        trips.emplace_back(row, at(k, i), 3.0 * A.at(k, i) / (2.0 * h));
                        trips.emplace_back(row, at(k, i + s), -4.0 * A.at(k, i + s) / (2.0 * h));
                        trips.emplace_back(row, at(k, i + 2 * s),
                                           A.at(k, i + 2 * s) / (2.0 * h));
                    } else if (pos == last) {
                        trips.emplace_back(row, at(k, i), -3.0 * A.at(k, i) / (2.0 * h));
                        trips.emplace_back(row, at(k, i - s), 4.0 * A.at(k, i - s) / (2.0 * h));
                        trips.emplace_back(row, at(k, i - 2 * s),
                                           -A.at(k, i - 2 * s) / (2.0 * h));
                    } else {
                        trips.emplace_back(row, at(k, i + s), -A.at(k, i + s) / (2.0 * h));
                        trips.emplace_back(row, at(k, i - s), A.at(k, i - s) / (2.0 * h));
                    }
                }
            }
            // + a p
            double av = coeffs.a.at(k, i);
            if (av != 0.0) trips.emplace_back(row, row, av);
        }
        // Robin part of the fold: + (sigma_j / w_i) b_eff_j p_i.
        for (int j = 0; j < grid.num_trace(); ++j) {
            const BoundaryNode& bn = grid.boundary[j];
            if (coeffs.b_eff[j] == 0.0) continue;
            trips.emplace_back(at(k, bn.node), at(k, bn.node),
                               bn.sigma * coeffs.b_eff[j] / grid.wq[bn.node]);
        }
    }
    Eigen::SparseMatrix<double> D(sz, sz);
    D.setFromTriplets(trips.begin(), trips.end());
    return D;
}

Field apply_Lstar(const SpaceTimeGrid& grid, const LstarCoefficients& coeffs, const Field& p) {
    p.require_shape(grid, "apply_Lstar");
    Eigen::SparseMatrix<double> D = build_lstar_matrix(grid, coeffs);
    return Field(grid.nt, grid.num_nodes(), D * p.vec());
}

double inner_Q(const SpaceTimeGrid& grid, const Field& u, const Field& v) {
    u.require_shape(grid, "inner_Q");
    v.require_shape(grid, "inner_Q");
    double total = 0.0;
    for (int k = 0; k < grid.nt; ++k)
        for (int i = 0; i < grid.num_nodes(); ++i) total += grid.wq[i] * u(k, i) * v(k, i);
    return total * grid.dt;
}

double inner_Sigma(const SpaceTimeGrid& grid, const TraceField& u, const TraceField& v) {
    u.require_shape(grid, "inner_Sigma");
    v.require_shape(grid, "inner_Sigma");
    double total = 0.0;
    for (int k = 0; k < grid.nt; ++k)
        for (int j = 0; j < grid.num_trace(); ++j)
            total += grid.boundary[j].sigma * u(k, j) * v(k, j);
    return total * grid.dt;
}

double l2_omega(const SpaceTimeGrid& grid, const Eigen::VectorXd& v) {
    double total = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i) total += grid.wq[i] * v[i] * v[i];
    return std::sqrt(total);
}

double l2_Q(const SpaceTimeGrid& grid, const Field& u) { return std::sqrt(inner_Q(grid, u, u)); }

TraceField trace_of(const SpaceTimeGrid& grid, const Field& u) {
    u.require_shape(grid, "trace_of");
    TraceField tf(grid);
    for (int k = 0; k < grid.nt; ++k)
        for (int j = 0; j < grid.num_trace(); ++j) tf(k, j) = u(k, grid.boundary[j].node);
    return tf;
}

}  // namespace heatctl
