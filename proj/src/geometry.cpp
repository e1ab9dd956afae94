#include "heatctl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "heatctl/fields.hpp"

namespace heatctl {

const char* face_name(Face f) {
    switch (f) {
        case Face::XLow: return "left";
        case Face::XHigh: return "right";
        case Face::YLow: return "bottom";
        case Face::YHigh: return "top";
    }
    return "?";
}

Face face_from_name(const std::string& name) {
    if (name == "left") return Face::XLow;
    if (name == "right") return Face::XHigh;
    if (name == "bottom") return Face::YLow;
    if (name == "top") return Face::YHigh;
    throw std::invalid_argument("unknown face name: " + name);
}

Domain Domain::interval(double a, double b, Face control_end) {
    Domain d;
    d.kind = Kind::Interval;
    d.ax = a;
    d.bx = b;
    if (control_end != Face::XLow && control_end != Face::XHigh)
        throw std::invalid_argument("interval gamma must be left or right");
    d.gamma.push_back({control_end, 0.0, 0.0});
    d.validate();
    return d;
}

Domain Domain::rectangle(double ax, double bx, double ay, double by,
                         std::vector<GammaSegment> gamma) {
    Domain d;
    d.kind = Kind::Rectangle;
    d.ax = ax;
    d.bx = bx;
    d.ay = ay;
    d.by = by;
    d.gamma = std::move(gamma);
    d.validate();
    return d;
}

double Domain::face_measure(Face f) const {
    if (kind == Kind::Interval) return 1.0;  // counting measure on each endpoint
    return (f == Face::YLow || f == Face::YHigh) ? length_x() : length_y();
}

double Domain::boundary_measure() const {
    if (kind == Kind::Interval) return 2.0;
    return 2.0 * (length_x() + length_y());
}

double Domain::gamma_measure() const {
    double m = 0.0;
    for (const auto& seg : gamma)
        m += (kind == Kind::Interval) ? 1.0 : (seg.hi - seg.lo);
    return m;
}

namespace {

std::pair<double, double> face_extent(const Domain& d, Face f) {
    if (f == Face::YLow || f == Face::YHigh) return {d.ax, d.bx};
    return {d.ay, d.by};
}

}  // namespace

void Domain::validate() const {
    if (kind == Kind::Interval) {
        if (!(bx > ax)) throw std::invalid_argument("domain: degenerate interval (b <= a)");
        if (gamma.empty()) throw std::invalid_argument("domain: gamma is empty");
        bool has_low = false, has_high = false;
        for (const auto& seg : gamma) {
            if (seg.face == Face::XLow) has_low = true;
            else if (seg.face == Face::XHigh) has_high = true;
            else throw std::invalid_argument("domain: 1D gamma face must be left/right");
        }
        if (has_low && has_high)
            throw std::invalid_argument("domain: gamma equals the whole boundary");
        return;
    }
    if (!(bx > ax) || !(by > ay))
        throw std::invalid_argument("domain: degenerate rectangle");
    if (gamma.empty()) throw std::invalid_argument("domain: gamma is empty");
    // Segments must lie on their face and must not overlap.
    for (const auto& seg : gamma) {
        auto [lo, hi] = face_extent(*this, seg.face);
        if (!(seg.hi > seg.lo))
            throw std::invalid_argument("domain: gamma segment has nonpositive length");
        if (seg.lo < lo - 1e-12 || seg.hi > hi + 1e-12)
            throw std::invalid_argument("domain: gamma segment lies outside its face");
    }
    for (size_t i = 0; i < gamma.size(); ++i)
        for (size_t j = i + 1; j < gamma.size(); ++j) {
            if (gamma[i].face != gamma[j].face) continue;
            double lo = std::max(gamma[i].lo, gamma[j].lo);
            double hi = std::min(gamma[i].hi, gamma[j].hi);
            if (hi > lo + 1e-12)
                throw std::invalid_argument("domain: gamma segments overlap");
        }
    double gm = gamma_measure();
    if (gm <= 0.0) throw std::invalid_argument("domain: gamma has zero measure");
    if (gm >= boundary_measure() - 1e-12)
        throw std::invalid_argument("domain: gamma equals the whole boundary");
}

namespace {

/// Trapezoid weight of a face node restricted to [lo, hi] along the face
/// axis: the length of the node's quadrature cell clipped to the window.
double clipped_cell(double pos, double h, double lo, double hi, double face_lo, double face_hi) {
    double cell_lo = std::max(pos - 0.5 * h, face_lo);
    double cell_hi = std::min(pos + 0.5 * h, face_hi);
    double a = std::max(cell_lo, lo - 1e-14);
    double b = std::min(cell_hi, hi + 1e-14);
    return std::max(0.0, b - a);
}

}  // namespace

SpaceTimeGrid build_grid(const Domain& domain, int nx, int nt, double T, int ny) {
    domain.validate();
    if (nx < 3) throw std::invalid_argument("build_grid: nx must be >= 3");
    if (nt < 2) throw std::invalid_argument("build_grid: nt must be >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("build_grid: T must be positive");

    SpaceTimeGrid g;
    g.domain = domain;
    g.nx = nx;
    g.nt = nt;
    g.T = T;
    g.dt = T / nt;
    g.hx = domain.length_x() / (nx - 1);

    if (domain.dim() == 1) {
        g.ny = 1;
        g.hy = 0.0;
        int n = nx;
        g.wq.assign(n, g.hx);
        g.wq[0] = 0.5 * g.hx;
        g.wq[n - 1] = 0.5 * g.hx;
        g.trace_of_node.assign(n, -1);
        bool gamma_low = false, gamma_high = false;
        for (const auto& seg : domain.gamma) {
            if (seg.face == Face::XLow) gamma_low = true;
            if (seg.face == Face::XHigh) gamma_high = true;
        }
        BoundaryNode left;
        left.node = 0;
        left.sigma = 1.0;  // counting measure in 1D
        left.sigma_gamma = gamma_low ? 1.0 : 0.0;
        left.faces[0] = Face::XLow;
        left.num_faces = 1;
        BoundaryNode right;
        right.node = n - 1;
        right.sigma = 1.0;
        right.sigma_gamma = gamma_high ? 1.0 : 0.0;
        right.faces[0] = Face::XHigh;
        right.num_faces = 1;
        g.boundary = {left, right};
        g.trace_of_node[0] = 0;
        g.trace_of_node[n - 1] = 1;
        return g;
    }

    if (ny <= 0) ny = nx;
    if (ny < 3) throw std::invalid_argument("build_grid: ny must be >= 3");
    g.ny = ny;
    g.hy = domain.length_y() / (ny - 1);

    const int n = nx * ny;
    g.wq.assign(n, 0.0);
    g.trace_of_node.assign(n, -1);
    for (int iy = 0; iy < ny; ++iy) {
        double wy = (iy == 0 || iy == ny - 1) ? 0.5 * g.hy : g.hy;
        for (int ix = 0; ix < nx; ++ix) {
            double wx = (ix == 0 || ix == nx - 1) ? 0.5 * g.hx : g.hx;
            g.wq[iy * nx + ix] = wx * wy;
        }
    }

    // Boundary trace dofs: iterate faces; corners collect both contributions.
    std::vector<BoundaryNode> tmp(n);
    auto add_face_node = [&](int node, Face f, double pos, double h, double face_lo,
                             double face_hi) {
        BoundaryNode& bn = tmp[node];
        bn.node = node;
        if (bn.num_faces < 2) bn.faces[bn.num_faces] = f;
        bn.num_faces += 1;
        double cell = clipped_cell(pos, h, face_lo, face_hi, face_lo, face_hi);
        bn.sigma += cell;
        for (const auto& seg : domain.gamma) {
            if (seg.face != f) continue;
            bn.sigma_gamma += clipped_cell(pos, h, seg.lo, seg.hi, face_lo, face_hi);
        }
    };
    for (int ix = 0; ix < nx; ++ix) {
        double px = domain.ax + ix * g.hx;
        add_face_node(g.node_index(ix, 0), Face::YLow, px, g.hx, domain.ax, domain.bx);
        add_face_node(g.node_index(ix, ny - 1), Face::YHigh, px, g.hx, domain.ax, domain.bx);
    }
    for (int iy = 0; iy < ny; ++iy) {
        double py = domain.ay + iy * g.hy;
        add_face_node(g.node_index(0, iy), Face::XLow, py, g.hy, domain.ay, domain.by);
        add_face_node(g.node_index(nx - 1, iy), Face::XHigh, py, g.hy, domain.ay, domain.by);
    }
    for (int i = 0; i < n; ++i) {
        if (tmp[i].num_faces == 0) continue;
        g.trace_of_node[i] = static_cast<int>(g.boundary.size());
        g.boundary.push_back(tmp[i]);
    }
    return g;
}

double integrate_Q(const SpaceTimeGrid& grid, const Field& field) {
    field.require_shape(grid, "integrate_Q");
    const int n = grid.num_nodes();
    double total = 0.0;
    for (int k = 0; k < grid.nt; ++k) {
        double slice = 0.0;
        for (int i = 0; i < n; ++i) slice += grid.wq[i] * field(k, i);
        total += slice;
    }
    return total * grid.dt;
}

double integrate_Sigma(const SpaceTimeGrid& grid, const TraceField& tf) {
    tf.require_shape(grid, "integrate_Sigma");
    double total = 0.0;
    for (int k = 0; k < grid.nt; ++k) {
        double slice = 0.0;
        for (int j = 0; j < grid.num_trace(); ++j) slice += grid.boundary[j].sigma * tf(k, j);
        total += slice;
    }
    return total * grid.dt;
}

double integrate_gamma(const SpaceTimeGrid& grid, const TraceField& tf) {
    tf.require_shape(grid, "integrate_gamma");
    double total = 0.0;
    for (int k = 0; k < grid.nt; ++k) {
        double slice = 0.0;
        for (int j = 0; j < grid.num_trace(); ++j)
            slice += grid.boundary[j].sigma_gamma * tf(k, j);
        total += slice;
    }
    return total * grid.dt;
}

}  // namespace heatctl
