#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatctl {

enum class Face { XLow = 0, XHigh = 1, YLow = 2, YHigh = 3 };

const char* face_name(Face f);
Face face_from_name(const std::string& name);

/// A piece of the control region: a whole endpoint in 1D, or a closed
/// sub-segment [lo, hi] of a face in 2D (coordinates along the face axis).
struct GammaSegment {
    Face face = Face::XHigh;
    double lo = 0.0;
    double hi = 0.0;
};

/// Spatial domain: an interval (a,b) or an axis-aligned rectangle, together
/// with the control region gamma given as face segments. gamma must be
/// nonempty and strictly smaller than the whole boundary.
struct Domain {
    enum class Kind { Interval, Rectangle } kind = Kind::Interval;
    double ax = 0.0, bx = 1.0;
    double ay = 0.0, by = 1.0;  // used in 2D only
    std::vector<GammaSegment> gamma;

    static Domain interval(double a, double b, Face control_end);
    static Domain rectangle(double ax, double bx, double ay, double by,
                            std::vector<GammaSegment> gamma);

    int dim() const { return kind == Kind::Interval ? 1 : 2; }
    double length_x() const { return bx - ax; }
    double length_y() const { return by - ay; }

    /// Extent of a face: 1 for the counting measure in 1D, side length in 2D.
    double face_measure(Face f) const;
    /// Total surface measure of the boundary.
    double boundary_measure() const;
    /// Surface measure of gamma.
    double gamma_measure() const;

    /// Throws std::invalid_argument on a degenerate domain, empty gamma,
    /// gamma = Gamma, overlapping segments or segments off their face.
    void validate() const;
};

/// One trace degree of freedom. A 2D corner node belongs to two faces and
/// still carries a single trace value; its quadrature weight sums both
/// face contributions.
struct BoundaryNode {
    int node = -1;          // volume lattice index of the node
    double sigma = 0.0;       // surface quadrature weight
    double sigma_gamma = 0.0; // part of sigma lying inside gamma
    std::array<Face, 2> faces{Face::XLow, Face::XLow};
    int num_faces = 0;
    bool on_gamma() const { return sigma_gamma > 0.0; }
};

/// Space-time grid over Q = Omega x (0,T). Spatial nodes are vertex-centred
/// (uniform steps); the weighted time lattice is cell-centred: Q-functions
/// live at midpoints t_{k+1/2}, never at t = 0 or t = T where the Carleman
/// weights blow up. Immutable after construction.
struct SpaceTimeGrid {
    Domain domain;
    int nx = 0;
    int ny = 1;  // 1 in 1D
    int nt = 0;
    double T = 0.0;
    double hx = 0.0;
    double hy = 0.0;  // 0 in 1D
    double dt = 0.0;

    std::vector<double> wq;              // spatial quadrature weights, size N
    std::vector<BoundaryNode> boundary;  // trace dofs, ordered by node index
    std::vector<int> trace_of_node;      // size N; -1 for interior nodes

    int dim() const { return domain.dim(); }
    int num_nodes() const { return nx * ny; }
    int num_trace() const { return static_cast<int>(boundary.size()); }
    int lattice_size() const { return nt * num_nodes(); }

    double x(int i) const { return domain.ax + hx * (i % nx); }
    double y(int i) const { return domain.ay + hy * (i / nx); }
    int node_index(int ix, int iy = 0) const { return iy * nx + ix; }

    /// Midpoint time t_{k+1/2} of cell k, k in [0, nt).
    double tau(int k) const { return (k + 0.5) * dt; }
    /// Node time t_k, k in [0, nt].
    double t_node(int k) const { return k * dt; }

    int lattice_index(int k, int i) const { return k * num_nodes() + i; }

    bool is_boundary_node(int i) const { return trace_of_node[i] >= 0; }
};

/// Builds the grid with quadrature tables and gamma tagging.
/// Preconditions: nx >= 3 (per axis), nt >= 2, T > 0.
SpaceTimeGrid build_grid(const Domain& domain, int nx, int nt, double T, int ny = 0);

class Field;
class TraceField;

double integrate_Q(const SpaceTimeGrid& grid, const Field& field);
double integrate_Sigma(const SpaceTimeGrid& grid, const TraceField& tf);
double integrate_gamma(const SpaceTimeGrid& grid, const TraceField& tf);

}  // namespace heatctl
