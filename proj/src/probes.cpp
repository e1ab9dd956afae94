#include "heatctl/probes.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>

namespace heatctl {

namespace {

/// One backward-Euler heat step (I - tau Lap_h) u = v with homogeneous
/// Neumann closure, tau = smoothing_cells * h^2.
Eigen::VectorXd diffuse_once(const SpaceTimeGrid& grid, const Eigen::VectorXd& v,
                             double smoothing_cells) {
    const int n = grid.num_nodes();
    const double tau = smoothing_cells * grid.hx * grid.hx;
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, i, grid.wq[i]);
        for (int d = 0; d < grid.dim(); ++d) {
            const int s = (d == 0) ? 1 : grid.nx;
            const int pos = (d == 0) ? i % grid.nx : i / grid.nx;
            const int last = (d == 0) ? grid.nx - 1 : grid.ny - 1;
            const double h = (d == 0) ? grid.hx : grid.hy;
            const double c = tau * grid.wq[i] / (h * h);
            if (pos == 0) {
                trips.emplace_back(i, i + s, -2.0 * c);
                trips.emplace_back(i, i, 2.0 * c);
            } else if (pos == last) {
                trips.emplace_back(i, i - s, -2.0 * c);
                trips.emplace_back(i, i, 2.0 * c);
            } else {
                trips.emplace_back(i, i - s, -c);
                trips.emplace_back(i, i + s, -c);
                trips.emplace_back(i, i, 2.0 * c);
            }
        }
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = grid.wq[i] * v[i];
    return solver.solve(rhs);
}

double omega_norm(const SpaceTimeGrid& grid, const Eigen::VectorXd& v) {
    double s = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i) s += grid.wq[i] * v[i] * v[i];
    return std::sqrt(s);
}

}  // namespace

Eigen::VectorXd smooth_random_omega(const SpaceTimeGrid& grid, std::uint64_t seed,
                                    double smoothing_cells) {
    NoiseStream rng(seed);
    Eigen::VectorXd v(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) v[i] = rng.next();
    v = diffuse_once(grid, v, smoothing_cells);
    double nrm = omega_norm(grid, v);
    if (nrm > 0.0) v /= nrm;
    return v;
}

Field smooth_random_field(const SpaceTimeGrid& grid, std::uint64_t seed,
                          double smoothing_cells) {
    NoiseStream rng(seed);
    Field f(grid);
    Eigen::VectorXd slice(grid.num_nodes());
    for (int k = 0; k < grid.nt; ++k) {
        for (int i = 0; i < grid.num_nodes(); ++i) slice[i] = rng.next();
        slice = diffuse_once(grid, slice, smoothing_cells);
        for (int i = 0; i < grid.num_nodes(); ++i) f(k, i) = slice[i];
    }
    // mild smoothing across time cells (3-point average) against
    // slice-to-slice noise
    Field g = f;
    for (int k = 0; k < grid.nt; ++k)
        for (int i = 0; i < grid.num_nodes(); ++i) {
            double prev = f(std::max(k - 1, 0), i);
            double next = f(std::min(k + 1, grid.nt - 1), i);
            g(k, i) = 0.25 * prev + 0.5 * f(k, i) + 0.25 * next;
        }
    double nrm = 0.0;
    for (int k = 0; k < grid.nt; ++k)
        for (int i = 0; i < grid.num_nodes(); ++i)
            nrm += grid.dt * grid.wq[i] * g(k, i) * g(k, i);
    nrm = std::sqrt(nrm);
    if (nrm > 0.0) g.vec() /= nrm;
    return g;
}

TraceField smooth_random_trace(const SpaceTimeGrid& grid, std::uint64_t seed) {
    NoiseStream rng(seed);
    TraceField tf(grid);
    for (int k = 0; k < grid.nt; ++k)
        for (int j = 0; j < grid.num_trace(); ++j) tf(k, j) = rng.next();
    TraceField sm(grid);
    for (int k = 0; k < grid.nt; ++k)
        for (int j = 0; j < grid.num_trace(); ++j) {
            double prev = tf(std::max(k - 1, 0), j);
            double next = tf(std::min(k + 1, grid.nt - 1), j);
            sm(k, j) = 0.25 * prev + 0.5 * tf(k, j) + 0.25 * next;
        }
    return sm;
}

}  // namespace heatctl
