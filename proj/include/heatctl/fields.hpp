#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "heatctl/geometry.hpp"

namespace heatctl {

/// Grid function on Q: one value per (midpoint time cell, spatial node).
class Field {
public:
    Field() = default;
    explicit Field(const SpaceTimeGrid& grid)
        : nt_(grid.nt), n_(grid.num_nodes()), v_(Eigen::VectorXd::Zero(grid.lattice_size())) {}
    Field(int nt, int n, Eigen::VectorXd v) : nt_(nt), n_(n), v_(std::move(v)) {
        if (v_.size() != static_cast<Eigen::Index>(nt_) * n_)
            throw std::invalid_argument("Field: value size does not match shape");
    }

    int nt() const { return nt_; }
    int num_nodes() const { return n_; }
    double operator()(int k, int i) const { return v_[static_cast<Eigen::Index>(k) * n_ + i]; }
    double& operator()(int k, int i) { return v_[static_cast<Eigen::Index>(k) * n_ + i]; }

    const Eigen::VectorXd& vec() const { return v_; }
    Eigen::VectorXd& vec() { return v_; }

    bool shaped_for(const SpaceTimeGrid& grid) const {
        return nt_ == grid.nt && n_ == grid.num_nodes();
    }
    void require_shape(const SpaceTimeGrid& grid, const char* what) const {
        if (!shaped_for(grid))
            throw std::invalid_argument(std::string(what) + ": field shape does not match grid");
    }
    bool all_finite() const { return v_.allFinite(); }

private:
    int nt_ = 0;
    int n_ = 0;
    Eigen::VectorXd v_;
};

/// Grid function on Sigma: one value per (midpoint time cell, trace dof).
class TraceField {
public:
    TraceField() = default;
    explicit TraceField(const SpaceTimeGrid& grid)
        : nt_(grid.nt), nb_(grid.num_trace()),
          v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.nt) * grid.num_trace())) {}
    TraceField(int nt, int nb, Eigen::VectorXd v) : nt_(nt), nb_(nb), v_(std::move(v)) {
        if (v_.size() != static_cast<Eigen::Index>(nt_) * nb_)
            throw std::invalid_argument("TraceField: value size does not match shape");
    }

    int nt() const { return nt_; }
    int num_trace() const { return nb_; }
    double operator()(int k, int j) const { return v_[static_cast<Eigen::Index>(k) * nb_ + j]; }
    double& operator()(int k, int j) { return v_[static_cast<Eigen::Index>(k) * nb_ + j]; }

    const Eigen::VectorXd& vec() const { return v_; }
    Eigen::VectorXd& vec() { return v_; }

    bool shaped_for(const SpaceTimeGrid& grid) const {
        return nt_ == grid.nt && nb_ == grid.num_trace();
    }
    void require_shape(const SpaceTimeGrid& grid, const char* what) const {
        if (!shaped_for(grid))
            throw std::invalid_argument(std::string(what) + ": trace shape does not match grid");
    }
    bool all_finite() const { return v_.allFinite(); }

private:
    int nt_ = 0;
    int nb_ = 0;
    Eigen::VectorXd v_;
};

}  // namespace heatctl
