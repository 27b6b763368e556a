#pragma once

#include "maxarea/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace maxarea {

/// Dirichlet problem for the area functional: boundary data on the domain's
/// boundary nodes plus optional extra pinned (node, value) pairs.
struct DiscreteProblem {
    DomainPtr domain;
    BoundaryData boundary;
    std::vector<std::pair<int, double>> pinned;

    /// All fixed (node, value) pairs: boundary nodes then extra pins.
    std::vector<std::pair<int, double>> fixed_values() const;
};

enum class InitMode { Extension, ZeroInterior, Custom };

struct SolverConfig {
    std::vector<double> delta_schedule{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    int max_iters = 50000;
    double stationarity_tol = 1e-9;
    double energy_stall_tol = 1e-12;  // relative, over 100 iterations
    InitMode init = InitMode::Extension;
    ScalarField init_field;  // used when init == Custom
};

struct StageStats {
    double delta = 0.0;
    int iterations = 0;
    double pg_norm = 0.0;       // RMS projected-gradient measure at exit
    std::string stop_reason;    // "stationarity" | "energy-stall" | "max-iters"
};

struct SolveReport {
    double final_energy = 0.0;
    std::vector<StageStats> stages;
    double final_pg_norm = 0.0;
    double max_grad_norm_free = 0.0;   // over triangles with a free vertex
    double max_grad_norm_all = 0.0;    // including triangles forced by data
    double wall_time_sec = 0.0;
    bool converged = true;
    std::vector<std::string> warnings;
};

/// Total area Sum_T area(T) * sqrt(1 - |p_T|^2). Throws InfeasibleFieldError
/// naming the first triangle with |p_T| > 1 (beyond roundoff).
double energy(const ScalarField& u);

/// Shrunken-ball continuation; each stage maximizes a concave penalized
/// stage energy by preconditioned truncated Newton ascent.
std::pair<ScalarField, SolveReport> solve(const DiscreteProblem& problem,
                                          const SolverConfig& config = {});

struct LinearSolution {
    double slope = 0.0;
    double intercept = 0.0;
    double energy = 0.0;
    double operator()(double x) const { return slope * x + intercept; }
};

/// Exact 1-d maximizer through (a,A),(b,B); throws EmptyKError if |B-A| > b-a.
LinearSolution solve_1d(double a, double b, double A, double B);

struct ComparisonResult {
    bool premise = false;       // u <= v held on all fixed nodes
    double boundary_gap = 0.0;  // max over fixed nodes of u - v
    double max_violation = 0.0; // max over all nodes of u - v - (premise slack)
    bool ok = false;            // premise implies violation <= 1e-7
};

/// Discrete comparison principle check: u <= v on boundary/pinned nodes
/// should force u <= v + 1e-7 everywhere.
ComparisonResult comparison_check(const ScalarField& u, const ScalarField& v);

/// Pointwise residual of div(Du / sqrt(1-|Du|^2)) = 0 built from recovered
/// (area-averaged) node gradients; nodes touching a triangle with
/// |p_T| > 1 - 1e-6 are flagged degenerate instead of valued.
struct ResidualField {
    ScalarField values;
    std::vector<std::uint8_t> degenerate;  // per node
    std::vector<std::uint8_t> interior;    // active non-boundary

    /// Max |residual| over non-degenerate interior nodes passing pred.
    double max_interior(const std::function<bool(Point)>& pred = nullptr) const;
};

ResidualField residual_field(const ScalarField& u);

}  // namespace maxarea
