#pragma once

#include "maxarea/geometry.hpp"
#include "maxarea/solver.hpp"

#include <variant>

namespace maxarea {

/// Light segment between two boundary nodes: |phi(x)-phi(y)| = |x-y| at grid
/// scale. sign is +1 if phi(y) - phi(x) = |y - x|, else -1.
struct LightSegment {
    int node_x = -1, node_y = -1;
    Point x{}, y{};
    double phi_x = 0.0, phi_y = 0.0;
    int sign = 1;
    double equality_gap = 0.0;     // |x-y| - |phi(x)-phi(y)| (>= -eps)
    double linearity_residual = -1.0;  // filled by verify_ray_linearity
    bool linearity_flagged = false;
};

struct SingularSet {
    std::vector<LightSegment> segments;
    double tol = 0.0;

    bool touches_node(int node) const;
};

/// All boundary pairs with |phi(x)-phi(y)| >= |x-y| - tol whose open segment
/// stays inside the active region (sampled at h/4). Pairs closer than 4*tol
/// are skipped: at grid scale the equality test is vacuous for them.
SingularSet singular_set(const DomainPtr& domain, const BoundaryData& phi,
                         double tol);

/// Samples u along each segment at t = 0.1..0.9 against the linear
/// interpolant of the endpoint data; flags residuals > 5h.
SingularSet verify_ray_linearity(const ScalarField& u, SingularSet segs);

enum class BlowdownModel { ConePlus, ConeMinus, Hyperplane, Undetermined };

struct BlowdownReport {
    std::vector<double> radii;
    std::vector<double> res_cone_plus;    // RMS misfit per radius
    std::vector<double> res_cone_minus;
    std::vector<double> res_hyperplane;
    std::vector<Point> hyperplane_a;      // fitted unit vector per radius
    BlowdownModel model = BlowdownModel::Undetermined;
    Point a{0.0, 0.0};                    // fitted direction at largest radius
    double best_residual = 0.0;
    bool residual_decreasing = false;
};

/// Fits u(r w)/r on unit-circle samples against +|x|, -|x| and a.x (|a|=1).
/// A hyperplane verdict needs misfit < 0.05 at the largest radius; cones
/// need < 0.1. Everything else is Undetermined.
BlowdownReport blowdown(const ScalarField& u, std::vector<double> radii,
                        int samples_per_circle, Point center = {0.0, 0.0});

enum class EntireCase {
    Maximal_i,
    UpperCone_ii,
    LowerCone_iii,
    HyperplaneAsymptotic_iv,
    TrichotomyI,
    TrichotomyII,
    TrichotomyIII,
    Undetermined
};

const char* to_string(EntireCase c);

struct ClassificationReport {
    EntireCase result = EntireCase::Undetermined;
    Point a{0.0, 0.0};
    int side = 0;  // -1: u <= a.x, +1: u >= a.x (case iv); 0 otherwise
    double max_regular_residual = -1.0;
    double cone_error_plus = -1.0;
    double cone_error_minus = -1.0;
    double one_sided_margin = 0.0;
    double half_ray_error = -1.0;
    bool hypothesis_not_maximal = false;  // exterior: residual > 5h off Conv(A)
    double max_above = 0.0, min_above = 0.0;       // extrema of u -/+ |x-x0|
    double max_above_dA = 0.0, min_above_dA = 0.0; // same over boundary-of-A nodes
    double max_below = 0.0, min_below = 0.0;
    double max_below_dA = 0.0, min_below_dA = 0.0;
    BlowdownReport blowdown;
};

/// Four-way classification of a solved field on a punctured ball with the
/// puncture pinned. Tolerances are multiples of h (default 5h).
ClassificationReport classify_entire(const ScalarField& u,
                                     const BoundaryData& phi,
                                     double tol_mult = 5.0);

/// Inner boundary for exterior problems: a finite point set or a circle.
struct InnerCircle {
    Point center{0.0, 0.0};
    double r = 0.0;
};
using InnerBoundary = std::variant<std::vector<Point>, InnerCircle>;

/// Trichotomy diagnostics for a field solved on an exterior-type domain
/// (annulus or box-minus-finite-set): attainment of the extrema of
/// u -/+ |x-x0| on the inner boundary, else blowdown direction and
/// one-sided-boundedness margins.
ClassificationReport exterior_trichotomy(const ScalarField& u,
                                         const InnerBoundary& A, Point x0,
                                         double tol_mult = 5.0);

}  // namespace maxarea
