#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "maxarea/pipelines.hpp"

using namespace maxarea;

TEST_CASE("theta endpoints reproduce the cone and the plane") {
    double h = 0.1;
    auto [down, r0] = solve_theta(2, 0.0, h);
    CHECK(r0.converged);
    double worst = 0.0;
    for (int n : down.domain->active_ids) {
        Point x = down.domain->coord(n);
        worst = std::max(worst, std::abs(down[n] + norm2(x)));
    }
    CHECK(worst <= 2 * h);
    CHECK(evaluate(down, {0.0, 1.0}) == doctest::Approx(-1.0).epsilon(2 * h));

    auto [plane, r1] = solve_theta(2, 1.0, h);
    CHECK(r1.converged);
    worst = 0.0;
    for (int n : plane.domain->active_ids) {
        Point x = plane.domain->coord(n);
        worst = std::max(worst, std::abs(plane[n] - x[1]));
    }
    CHECK(worst <= 2 * h);
}

TEST_CASE("theta sweep is monotone at e2 with interior values bracketed") {
    double h = 0.1;
    double prev = -1.0 - 1e-7;
    for (double theta : {0.25, 0.5, 0.75}) {
        auto [u, rep] = solve_theta(2, theta, h);
        double v = evaluate(u, {0.0, 1.0});
        CHECK(v > -1.0);
        CHECK(v < 1.0);
        CHECK(v >= prev - 1e-7);
        prev = v;
    }
}

TEST_CASE("solve_theta validates its inputs") {
    CHECK_THROWS_AS(solve_theta(2, -0.1, 0.1), DomainError);
    CHECK_THROWS_AS(solve_theta(2, 1.1, 0.1), DomainError);
    CHECK_THROWS_AS(solve_theta(1, 0.5, 0.1), DomainError);
    CHECK_THROWS_AS(find_theta(2, 0.1, 0.0), DomainError);
}

TEST_CASE("find_theta pins w(e2) to zero inside (0,1)") {
    auto r = find_theta(2, 0.1, 1e-6);
    CHECK(r.theta > 0.0);
    CHECK(r.theta < 1.0);
    CHECK(std::abs(r.w_e2) <= 1e-6);
    CHECK(std::abs(evaluate(r.field, {0.0, 1.0}) - r.w_e2) <= 1e-12);
    CHECK(r.solves == (int)r.samples.size());
    CHECK(r.solves >= 3);
    CHECK(!r.warning);
    // visited samples must respect the monotone bracket
    for (const auto& [theta, v] : r.samples) {
        if (theta <= 1e-12) CHECK(v < 0.0);
        if (theta >= 1.0 - 1e-12) CHECK(v > 0.0);
    }
}

TEST_CASE("build_example_w on a small schedule") {
    ExampleWConfig cfg;
    cfg.k_schedule = {2, 3};
    cfg.h = 0.1;
    cfg.window_lo = {-1.0, -1.0};
    cfg.window_hi = {1.0, 1.0};
    auto res = build_example_w(cfg);
    REQUIRE(res.stages.size() == 2);
    CHECK(res.stages[0].sup_diff_prev < 0.0);  // no predecessor
    CHECK(res.stages[1].sup_diff_prev >= 0.0);
    for (const auto& st : res.stages) {
        CHECK(st.theta > 0.0);
        CHECK(st.theta < 1.0);
        CHECK(std::abs(st.w_e2) <= cfg.bisection_tol);
    }
    CHECK(std::abs(res.w_e2) <= cfg.bisection_tol);
    CHECK(res.ray_identity_error <= 5 * cfg.h);
    CHECK(res.one_sided_max <= 5 * cfg.h);
    // w(-e2) = -1 on the pinned ray
    int n = res.window->nearest_node({0.0, -1.0});
    CHECK(res.w_window[n] == doctest::Approx(-1.0).epsilon(5 * cfg.h));
}

TEST_CASE("build_example_w validates the k schedule") {
    ExampleWConfig cfg;
    cfg.h = 0.2;
    cfg.k_schedule = {};
    CHECK_THROWS_AS(build_example_w(cfg), DomainError);
    cfg.k_schedule = {1, 2};
    CHECK_THROWS_AS(build_example_w(cfg), DomainError);
    cfg.k_schedule = {4, 2};
    CHECK_THROWS_AS(build_example_w(cfg), DomainError);
}

TEST_CASE("barrier for constant data on a circle in upper-cone mode") {
    ExteriorProblem p;
    p.A = InnerCircle{{0, 0}, 1.0};
    p.g = Generator::constant(0.0);
    p.mode = ExteriorMode::UpperCone;
    p.x0 = {0.0, 0.0};
    p.outer_schedule = {2.0, 3.0};
    p.h = 0.1;
    auto b = barrier_psi(p);
    // c+ and c- are extrema of g + |x| over the inner staircase, radius ~1
    CHECK(b.c_plus >= 1.0 - 1e-12);
    CHECK(b.c_plus <= 1.0 + 2 * p.h);
    CHECK(b.c_minus >= 1.0 - 1e-12);
    CHECK(b.c_minus <= b.c_plus);
    // Psi equals g on the inner boundary and stays weakly spacelike up to
    // the staircase-sampling excess of the distance function
    const GridDomain& d = *b.domain;
    double mid = 0.5 * (d.spec.r_in + d.spec.r_out);
    for (int n : d.boundary_ids)
        if (norm2(d.coord(n)) < mid) CHECK(std::abs(b.psi[n]) <= 1e-12);
    CHECK(b.max_grad_norm <= 1.1);
}

TEST_CASE("barrier for the two-point hyperplane problem") {
    ExteriorProblem p;
    p.A = std::vector<Point>{{0.0, 0.0}, {0.0, 1.0}};
    p.g = Generator::constant(0.0);
    p.mode = ExteriorMode::Hyperplane;
    p.a = {0.0, 1.0};
    p.outer_schedule = {2.0};
    p.h = 0.1;
    auto b = barrier_psi(p);
    CHECK(b.c_plus == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.c_minus == doctest::Approx(-1.0).epsilon(1e-12));
    const GridDomain& d = *b.domain;
    for (int n : d.puncture_ids) CHECK(std::abs(b.psi[n]) <= 1e-12);
    // Psi = max(min(psi, x2), x2 - 1) bounds
    for (int n : d.active_ids) {
        double x2 = d.coord(n)[1];
        CHECK(b.psi[n] >= x2 - 1.0 - 1e-12);
        CHECK(b.psi[n] <= x2 + 1e-12);
    }
}

TEST_CASE("barrier input validation") {
    ExteriorProblem p;
    p.A = InnerCircle{{0, 0}, 1.0};
    p.mode = ExteriorMode::Hyperplane;
    p.a = {0.0, 2.0};
    p.h = 0.2;
    CHECK_THROWS_AS(barrier_psi(p), DomainError);
    p.a = {0.0, 1.0};
    p.outer_schedule.clear();
    CHECK_THROWS_AS(barrier_psi(p), DomainError);
}

TEST_CASE("exterior solve squeezed by coincident cone barriers") {
    for (auto mode : {ExteriorMode::UpperCone, ExteriorMode::LowerCone}) {
        ExteriorProblem p;
        p.A = InnerCircle{{0, 0}, 1.0};
        p.g = Generator::constant(0.0);
        p.mode = mode;
        p.x0 = {0.0, 0.0};
        p.outer_schedule = {2.0, 3.0};
        p.h = 0.1;
        auto res = solve_exterior(p);
        REQUIRE(res.stages.size() == 2);
        CHECK(res.barrier_violation <= 5 * p.h);
        double sgn = mode == ExteriorMode::UpperCone ? -1.0 : 1.0;
        double worst = 0.0;
        for (int n : res.field.domain->active_ids) {
            Point x = res.field.domain->coord(n);
            worst = std::max(worst,
                             std::abs(res.field[n] - sgn * (norm2(x) - 1.0)));
        }
        CHECK(worst <= 5 * p.h);
        CHECK(res.trichotomy.result == (mode == ExteriorMode::UpperCone
                                            ? EntireCase::TrichotomyII
                                            : EntireCase::TrichotomyI));
    }
}

TEST_CASE("two-point hyperplane solve attains its extrema on the point set") {
    ExteriorProblem p;
    p.A = std::vector<Point>{{0.0, 0.0}, {0.0, 1.0}};
    p.g = Generator::constant(0.0);
    p.mode = ExteriorMode::Hyperplane;
    p.a = {0.0, 1.0};
    p.outer_schedule = {2.0, 3.0};
    p.h = 0.1;
    auto res = solve_exterior(p);
    CHECK(res.barrier_violation <= 5 * p.h);
    CHECK(res.trichotomy.result == EntireCase::TrichotomyIII);
    // u - x2 extrema attained on {0, e2} at grid tolerance
    const GridDomain& d = *res.field.domain;
    double mx = -1e300, mn = 1e300, mx_dA = -1e300, mn_dA = 1e300;
    for (int n : d.active_ids) {
        double g = res.field[n] - d.coord(n)[1];
        mx = std::max(mx, g);
        mn = std::min(mn, g);
    }
    for (int n : d.puncture_ids) {
        double g = res.field[n] - d.coord(n)[1];
        mx_dA = std::max(mx_dA, g);
        mn_dA = std::min(mn_dA, g);
    }
    CHECK(mx <= mx_dA + 5 * p.h);
    CHECK(mn >= mn_dA - 5 * p.h);
}

namespace {

// Max PL gradient norm over triangles all of whose vertices are at least
// `margin` away from every point of `singular` (points plus a downward ray
// from the first point when `ray` is set).
double grad_norm_away(const ScalarField& u, const std::vector<Point>& singular,
                      bool ray, double margin) {
    const GridDomain& d = *u.domain;
    auto far_enough = [&](Point x) {
        for (const auto& s : singular)
            if (dist(x, s) < margin) return false;
        if (ray) {
            // distance to {singular[0] + t*(0,-1), t >= 0}
            Point o = singular.front();
            double dy = x[1] - o[1];
            double dr = dy >= 0.0 ? dist(x, o) : std::abs(x[0] - o[0]);
            if (dr < margin) return false;
        }
        return true;
    };
    double worst = 0.0;
    for (const Tri& T : d.tris) {
        bool keep = true;
        for (int v : {T.v0, T.v1, T.v2})
            if (v >= 0 && !far_enough(d.coord(v))) keep = false;
        if (!keep) continue;
        double px = (u[T.ax1] - u[T.ax0]) / d.h;
        double py = (u[T.ay1] - u[T.ay0]) / d.h;
        worst = std::max(worst, std::sqrt(px * px + py * py));
    }
    return worst;
}

}  // namespace

TEST_CASE("multiplicity demo produces three distinct admissible fields") {
    double h = 0.1;
    auto rep = multiplicity_demo(h, 4);
    // the boundary pins force light-cone funnels whose PL gradients exceed 1
    // in O(h)-neighborhoods; away from the singular rays the fields must be
    // weakly spacelike at grid tolerance
    CHECK(rep.max_grad_norm <= 2.0);
    CHECK(grad_norm_away(rep.w, {{0.0, 0.0}}, true, 0.35) <= 1.0 + 5 * h);
    CHECK(grad_norm_away(rep.w_brv, {{0.0, 0.0}, {0.0, 1.0}}, false, 0.35) <=
          1.0 + 5 * h);
    CHECK(rep.pairwise_min_sup > 0.25);
    const double tol = 5 * h;
    for (const auto& f : rep.fields) {
        CHECK(std::abs(f.at_origin) <= tol);
        CHECK(std::abs(f.at_e2) <= tol);
    }
    // the reflection identity sends w(-e2) = -1 to w~(2e2) = 1
    CHECK(rep.w_tilde_2e2 == doctest::Approx(1.0).epsilon(tol));
    // attainment pattern of the extrema of u - x2 on {0, e2}: the plane-like
    // tails make w miss the minimum and w~ the maximum; the barrier-built
    // field attains both
    CHECK(rep.fields[0].attains_max_on_dA);
    CHECK(!rep.fields[0].attains_min_on_dA);
    CHECK(rep.fields[1].attains_min_on_dA);
    CHECK(!rep.fields[1].attains_max_on_dA);
    CHECK(rep.fields[2].attains_min_on_dA);
    CHECK(rep.fields[2].attains_max_on_dA);
    CHECK_THROWS_AS(multiplicity_demo(0.2, 3), DomainError);
}
