#pragma once

#include "maxarea/geometry.hpp"
#include "maxarea/solver.hpp"
#include "maxarea/structure.hpp"

#include <vector>

namespace maxarea {

/// Configuration of the punctured-ball exhaustion construction of the
/// plane-asymptotic singular example w.
struct ExampleWConfig {
    std::vector<int> k_schedule{2, 4, 8};
    double h = 0.05;
    double bisection_tol = 1e-6;
    Point window_lo{-2.0, -2.0};
    Point window_hi{2.0, 2.0};
    SolverConfig solver;
};

/// Solve on B_k \ {0} with w(0) = 0 and w = theta*x2 - (1-theta)*k on the
/// outer staircase. warm_start, when given, must live on the same domain.
std::pair<ScalarField, SolveReport> solve_theta(int k, double theta, double h,
                                                const SolverConfig& cfg = {},
                                                const ScalarField* warm_start = nullptr);

struct FindThetaResult {
    double theta = 0.0;
    ScalarField field;
    double w_e2 = 0.0;
    int solves = 0;
    std::vector<std::pair<double, double>> samples;  // (theta, w(e2)) visited
    bool warning = false;
};

/// Bisection on theta driven by the sign of w(e2); terminates when
/// |w(e2)| <= tol. Throws if the endpoint bracket (-1, +1) fails.
FindThetaResult find_theta(int k, double h, double tol,
                           const SolverConfig& cfg = {});

struct ExampleWStage {
    int k = 0;
    double theta = 0.0;
    double w_e2 = 0.0;
    int solves = 0;
    double sup_diff_prev = -1.0;  // sup over window vs previous stage
    ScalarField field;            // full field on B_k \ {0}
};

struct ExampleWResult {
    std::vector<ExampleWStage> stages;
    DomainPtr window;
    ScalarField w_window;          // finest-k field restricted to the window
    double ray_identity_error = 0.0;   // max |w(t e2) - t| over t in [-k+1, 0]
    double one_sided_max = 0.0;        // max over window of w - x2
    double w_e2 = 0.0;
    double w_2e2 = 0.0;
    bool stabilization_warning = false;
};

ExampleWResult build_example_w(const ExampleWConfig& config);

enum class ExteriorMode { LowerCone, UpperCone, Hyperplane };

struct ExteriorProblem {
    InnerBoundary A;
    Generator g = Generator::constant(0.0);
    ExteriorMode mode = ExteriorMode::UpperCone;
    Point x0{0.0, 0.0};        // cone vertex (cone modes)
    Point a{0.0, 1.0};         // unit direction (hyperplane mode)
    std::vector<double> outer_schedule{2.0, 3.0, 4.0};
    double h = 0.1;
    Point window_lo{-2.0, -2.0};
    Point window_hi{2.0, 2.0};
    SolverConfig solver;
};

struct BarrierResult {
    DomainPtr domain;      // exhaustion domain at the largest outer radius
    ScalarField psi;       // clamped weakly spacelike extension Psi
    double c_plus = 0.0;
    double c_minus = 0.0;
    double max_grad_norm = 0.0;
};

/// Psi = clamp(McShane extension of g from the inner boundary) with the
/// mode's cone/plane envelopes; equal to g on the inner boundary.
BarrierResult barrier_psi(const ExteriorProblem& problem);

struct ExteriorStage {
    double outer = 0.0;
    double sup_diff_prev = -1.0;
    SolveReport report;
};

struct ExteriorResult {
    ScalarField field;           // solution on the finest exhaustion domain
    BarrierResult barrier;
    std::vector<ExteriorStage> stages;
    ClassificationReport trichotomy;
    double barrier_violation = 0.0;  // max one-sided excursion past the squeeze
    bool stabilization_warning = false;
};

ExteriorResult solve_exterior(const ExteriorProblem& problem);

struct MultiplicityField {
    std::string name;
    double at_origin = 0.0;
    double at_e2 = 0.0;
    double min_minus_x2 = 0.0;     // min over window of field - x2
    double min_minus_x2_dA = 0.0;  // same over {0, e2}
    double max_minus_x2 = 0.0;
    double max_minus_x2_dA = 0.0;
    bool attains_min_on_dA = false;
    bool attains_max_on_dA = false;
};

struct MultiplicityReport {
    ExampleWResult w_build;
    ExteriorResult w_breve;
    DomainPtr window;
    ScalarField w, w_tilde, w_brv;   // all sampled on the window
    std::array<MultiplicityField, 3> fields;
    double pairwise_min_sup = 0.0;   // min over pairs of sup |difference|
    double w_2e2 = 0.0;
    double w_tilde_2e2 = 0.0;
    double max_grad_norm = 0.0;      // worst over the three window fields
};

/// Remark-style non-uniqueness demonstration: w, its reflection
/// w~(x) = -w(x', 1-x2) and the barrier-constructed w' on A = {0, e2}.
MultiplicityReport multiplicity_demo(double h, int k);

}  // namespace maxarea
