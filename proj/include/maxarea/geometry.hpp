#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace maxarea {

using Point = std::array<double, 2>;

inline double norm2(const Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1]); }
inline Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline double dist(const Point& a, const Point& b) { return norm2(sub(a, b)); }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyKError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleFieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ShapeKind { Ball, Annulus, Box, BoxMinusPoints, PuncturedBall, Interval };

/// Tagged region descriptor. `points` holds punctures for the *MinusPoints /
/// PuncturedBall kinds. dim is 1 or 2 (Interval is the 1-d shape).
struct RegionSpec {
    ShapeKind kind = ShapeKind::Ball;
    int dim = 2;
    Point center{0.0, 0.0};
    double radius = 0.0;
    double r_in = 0.0;
    double r_out = 0.0;
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};
    std::vector<Point> points;

    static RegionSpec ball(Point c, double R);
    static RegionSpec annulus(Point c, double r_in, double r_out);
    static RegionSpec box(Point lo, Point hi);
    static RegionSpec box_minus_points(Point lo, Point hi, std::vector<Point> pts);
    static RegionSpec punctured_ball(Point c, double R, Point puncture);
    static RegionSpec punctured_ball(Point c, double R, std::vector<Point> punctures);
    static RegionSpec interval(double a, double b, std::vector<double> punctures = {});
};

/// Oriented cell triangle of the fixed-diagonal triangulation. Gradient of the
/// PL interpolant is p = ((u[ax1]-u[ax0])/h, (u[ay1]-u[ay0])/h). In dim 1 the
/// "triangle" is an edge: ay0 == ay1, p_y = 0 and area = h.
struct Tri {
    int v0, v1, v2;      // vertex node ids (v2 < 0 in dim 1)
    int ax0, ax1, ay0, ay1;
    double area;
};

class GridDomain;
using DomainPtr = std::shared_ptr<const GridDomain>;

/// Masked uniform lattice realizing a RegionSpec. Node (i,j) sits at
/// (i*h, j*h); states: 0 inactive, 1 interior, 2 Dirichlet boundary.
class GridDomain {
public:
    RegionSpec spec;
    int dim = 2;
    double h = 0.0;
    std::array<int, 2> ilo{0, 0};
    std::array<int, 2> ihi{0, 0};
    int nx = 0, ny = 0;

    std::vector<std::uint8_t> state;
    std::vector<int> active_ids;
    std::vector<int> boundary_ids;
    std::vector<int> puncture_ids;   // subset of boundary_ids, one per puncture
    std::vector<Tri> tris;           // all triangles with three active vertices
    std::vector<int> tri_lower;      // per cell, index into tris or -1
    std::vector<int> tri_upper;

    int id(int i, int j) const { return (i - ilo[0]) + nx * (j - ilo[1]); }
    int cell_id(int i, int j) const { return (i - ilo[0]) + (nx - 1) * (j - ilo[1]); }
    bool in_cell_box(int i, int j) const {
        return i >= ilo[0] && i < ihi[0] && (dim == 1 || (j >= ilo[1] && j < ihi[1]));
    }
    std::array<int, 2> ij(int node) const {
        return {ilo[0] + node % nx, ilo[1] + node / nx};
    }
    Point coord(int node) const {
        auto v = ij(node);
        return {v[0] * h, dim == 2 ? v[1] * h : 0.0};
    }
    bool in_box(int i, int j) const {
        return i >= ilo[0] && i <= ihi[0] && j >= ilo[1] && j <= ihi[1];
    }
    bool is_active(int i, int j) const {
        return in_box(i, j) && state[id(i, j)] != 0;
    }
    bool is_boundary(int node) const { return state[node] == 2; }
    std::size_t num_nodes() const { return state.size(); }

    /// Nearest active node to a point; -1 if the window has none.
    int nearest_node(Point x) const;

    /// True if x lies in (or within tol of) some fully active triangle.
    bool covers(Point x, double tol = 1e-9) const;

    /// Triangle containing x, or -1. Fills barycentric-style local coords.
    int locate(Point x, double tol = 1e-9) const;
};

DomainPtr make_domain(const RegionSpec& spec, double h);

/// Node values over a domain; stored densely on the index box.
struct ScalarField {
    DomainPtr domain;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(DomainPtr d, double fill = 0.0)
        : domain(std::move(d)), values(domain->num_nodes(), fill) {}

    double operator[](int node) const { return values[node]; }
    double& operator[](int node) { return values[node]; }
};

/// Builds a field by evaluating f at every active node.
ScalarField sample_field(DomainPtr d, const std::function<double(Point)>& f);

/// Closed-form boundary value generators (evaluated at node coordinates).
struct Generator {
    enum class Kind { Constant, Affine, Cone, Theta };
    Kind kind = Kind::Constant;
    double c = 0.0;          // constant / offset
    Point a{0.0, 0.0};       // affine slope
    Point center{0.0, 0.0};  // cone apex
    double sign = 1.0;       // cone sign
    double theta = 0.0;      // theta family
    double k = 0.0;

    double operator()(Point x) const;

    static Generator constant(double v);
    static Generator affine(Point a, double c);
    static Generator cone(double sign, Point center, double offset);
    static Generator theta_family(double theta, double k);
};

/// Dirichlet data on the boundary nodes of a domain: optional generator plus
/// per-node overrides (overrides win; punctures are usually overrides).
struct BoundaryData {
    std::optional<Generator> generator;
    std::unordered_map<int, double> overrides;

    double value_at(const GridDomain& d, int node) const;
    /// Resolved values on all boundary nodes.
    std::vector<std::pair<int, double>> resolve(const GridDomain& d) const;

    static BoundaryData from_generator(Generator g) {
        BoundaryData b;
        b.generator = std::move(g);
        return b;
    }
};

/// Shortest 8-neighbor path length between two active nodes through the
/// active set; +inf if disconnected. Throws DomainError on inactive nodes.
double intrinsic_distance(const GridDomain& d, int node_a, int node_b);

/// Distances from one active node to all active nodes (same metric).
std::vector<double> distance_map(const GridDomain& d, int source);

struct McShaneResult {
    ScalarField psi;
    double margin = 0.0;       // max over boundary of g - psi (>= 0)
    bool admissible = false;   // margin <= 1e-12
    bool grid_admissible = false;  // margin <= 2h (staircase slack)
};

McShaneResult mcshane_extension(DomainPtr d, const BoundaryData& g);
/// Extension from an explicit subset of (node, value) seeds.
McShaneResult mcshane_extension(DomainPtr d,
                                const std::vector<std::pair<int, double>>& seeds);

struct SpacelikeCheck {
    double max_grad_norm = 0.0;
    bool ok = false;  // max <= 1 + 1e-12
};
SpacelikeCheck check_weakly_spacelike(const ScalarField& u);

/// PL interpolation; exact at nodes. Throws CoverageError outside coverage.
double evaluate(const ScalarField& u, Point x);

/// (rescale u)(x) = u(rx)/r sampled onto the target domain.
ScalarField rescale(const ScalarField& u, double r, DomainPtr target);

/// Counterclockwise hull vertices (monotone chain); collinear input returns
/// the segment endpoints, a single point returns itself.
std::vector<Point> convex_hull(std::vector<Point> pts);

/// Point-in-convex-polygon test (hull as returned by convex_hull).
bool hull_contains(const std::vector<Point>& hull, Point x, double tol = 1e-9);

}  // namespace maxarea
