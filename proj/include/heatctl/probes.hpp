#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "heatctl/fields.hpp"
#include "heatctl/geometry.hpp"

namespace heatctl {

/// Deterministic uniform doubles in [-1, 1) from a splitmix64 stream. The
/// generator is fixed by hand (not std::uniform_real_distribution) so that
/// seeded outputs are bit-identical across standard libraries.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) : state_(seed) {}
    double next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        double u = static_cast<double>(z >> 11) * 0x1.0p-53;  // [0,1)
        return 2.0 * u - 1.0;
    }

private:
    std::uint64_t state_;
};

/// Seeded node noise smoothed by one implicit heat step (time tau ~ h^2),
/// normalized to unit L2(Omega) norm. Raw node noise has unbounded discrete
/// gradients; one diffusion step removes the grid-frequency content.
Eigen::VectorXd smooth_random_omega(const SpaceTimeGrid& grid, std::uint64_t seed,
                                    double smoothing_cells = 2.0);

/// Per-slice smoothed noise on the whole midpoint lattice, unit L2(Q) norm.
Field smooth_random_field(const SpaceTimeGrid& grid, std::uint64_t seed,
                          double smoothing_cells = 2.0);

/// Smoothed noise on Sigma (independent per trace dof, smoothed in time).
TraceField smooth_random_trace(const SpaceTimeGrid& grid, std::uint64_t seed);

}  // namespace heatctl
