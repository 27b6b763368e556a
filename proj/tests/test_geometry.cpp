#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "maxarea/geometry.hpp"

using namespace maxarea;

namespace {

// Independent O(n^3) hull oracle: a point is a hull vertex iff it is not
// strictly inside the hull, i.e. some half-plane through two other points
// puts everything (weakly) on one side with the point on the boundary chain.
std::vector<Point> hull_oracle(const std::vector<Point>& pts) {
    auto cross = [](Point o, Point a, Point b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Point> verts;
    for (const Point& p : pts) {
        bool inside = false;
        for (std::size_t i = 0; i < pts.size() && !inside; ++i)
            for (std::size_t j = 0; j < pts.size() && !inside; ++j)
                for (std::size_t k = 0; k < pts.size() && !inside; ++k) {
                    double d1 = cross(pts[i], pts[j], p);
                    double d2 = cross(pts[j], pts[k], p);
                    double d3 = cross(pts[k], pts[i], p);
                    if (d1 > 1e-12 && d2 > 1e-12 && d3 > 1e-12) inside = true;
                }
        if (!inside) verts.push_back(p);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    return verts;
}

int node_at(const GridDomain& d, Point x) {
    int n = d.nearest_node(x);
    REQUIRE(n >= 0);
    REQUIRE(dist(d.coord(n), x) < 1e-9);
    return n;
}

}  // namespace

TEST_CASE("ball domain staircase boundary hugs the circle") {
    auto d = make_domain(RegionSpec::ball({0, 0}, 2.0), 0.1);
    CHECK(!d->boundary_ids.empty());
    // diagonal-fan boundary nodes may sit up to h*sqrt(2) inside the circle
    for (int n : d->boundary_ids) {
        double r = norm2(d->coord(n));
        CHECK(std::abs(r - 2.0) <= 0.1 * std::sqrt(2.0) + 1e-12);
    }
    for (int n : d->active_ids) CHECK(norm2(d->coord(n)) <= 2.0 + 1e-12);
    // every boundary node is active
    for (int n : d->boundary_ids) CHECK(d->state[n] == 2);
}

TEST_CASE("punctured ball pins exactly the origin node") {
    auto d = make_domain(RegionSpec::punctured_ball({0, 0}, 2.0, {0.0, 0.0}), 0.1);
    REQUIRE(d->puncture_ids.size() == 1);
    int p = d->puncture_ids[0];
    CHECK(d->coord(p)[0] == 0.0);
    CHECK(d->coord(p)[1] == 0.0);
    CHECK(d->state[p] == 2);
    // identical to the plain ball except for the one pinned node
    auto plain = make_domain(RegionSpec::ball({0, 0}, 2.0), 0.1);
    CHECK(d->active_ids.size() == plain->active_ids.size());
    CHECK(d->boundary_ids.size() == plain->boundary_ids.size() + 1);
}

TEST_CASE("box minus finite set flags the puncture nodes as boundary") {
    auto d = make_domain(
        RegionSpec::box_minus_points({-3, -3}, {3, 3}, {{0, 0}, {0, 1}}), 0.1);
    REQUIRE(d->puncture_ids.size() == 2);
    std::vector<Point> got;
    for (int n : d->puncture_ids) got.push_back(d->coord(n));
    std::sort(got.begin(), got.end());
    CHECK(dist(got[0], {0, 0}) < 1e-9);
    CHECK(dist(got[1], {0, 1}) < 1e-9);
}

TEST_CASE("degenerate regions are rejected") {
    CHECK_THROWS_AS(make_domain(RegionSpec::ball({0, 0}, 0.15), 0.1), DomainError);
    CHECK_THROWS_AS(make_domain(RegionSpec::box({0, 0}, {0.3, 0.3}), 0.1),
                    DomainError);
    CHECK_THROWS_AS(make_domain(RegionSpec::ball({0, 0}, 1.0), -0.1), DomainError);
}

TEST_CASE("intrinsic distance basics on a convex ball") {
    auto d = make_domain(RegionSpec::ball({0, 0}, 2.0), 0.1);
    int a = node_at(*d, {0, 0});
    int b = node_at(*d, {1, 0});
    double dd = intrinsic_distance(*d, a, b);
    CHECK(dd == doctest::Approx(1.0).epsilon(0.09));
    CHECK(intrinsic_distance(*d, a, a) == 0.0);
}

TEST_CASE("intrinsic distance around an L-shaped domain matches a refined run") {
    // box minus (open) quadrant modelled as a box with the quadrant masked by
    // punctures is not expressible; use an annulus forcing a path around the
    // hole instead and compare against the same metric at h/2.
    auto coarse = make_domain(RegionSpec::annulus({0, 0}, 1.0, 3.0), 0.1);
    auto fine = make_domain(RegionSpec::annulus({0, 0}, 1.0, 3.0), 0.05);
    Point p{-2.0, 0.0}, q{2.0, 0.0};
    double dc = intrinsic_distance(*coarse, node_at(*coarse, p), node_at(*coarse, q));
    double df = intrinsic_distance(*fine, node_at(*fine, p), node_at(*fine, q));
    // the path must round the inner hole, so both exceed the chord 4
    CHECK(dc > 4.0);
    CHECK(df > 4.0);
    CHECK(dc == doctest::Approx(df).epsilon(0.05));
}

TEST_CASE("intrinsic distance is a metric on sampled triples") {
    auto d = make_domain(RegionSpec::annulus({0, 0}, 0.5, 2.0), 0.1);
    std::mt19937 rng(1234);
    std::uniform_int_distribution<std::size_t> pick(0, d->active_ids.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        int a = d->active_ids[pick(rng)];
        int b = d->active_ids[pick(rng)];
        int c = d->active_ids[pick(rng)];
        double ab = intrinsic_distance(*d, a, b);
        double ba = intrinsic_distance(*d, b, a);
        double bc = intrinsic_distance(*d, b, c);
        double ac = intrinsic_distance(*d, a, c);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ac <= ab + bc + 1e-12);
    }
}

TEST_CASE("mcshane extension of zero data on an annulus is the distance") {
    auto d = make_domain(RegionSpec::annulus({0, 0}, 1.0, 3.0), 0.1);
    BoundaryData g;
    g.generator = Generator::constant(0.0);
    // keep only the inner circle at 0; assign the outer circle its distance
    // value via the constant-on-inner trick: instead solve with seeds on the
    // inner staircase only.
    std::vector<std::pair<int, double>> seeds;
    for (int n : d->boundary_ids)
        if (norm2(d->coord(n)) < 2.0) seeds.emplace_back(n, 0.0);
    auto ext = mcshane_extension(d, seeds);
    CHECK(ext.admissible);
    for (int n : d->active_ids) {
        double expect = std::max(0.0, norm2(d->coord(n)) - 1.0);
        CHECK(ext.psi[n] == doctest::Approx(expect).epsilon(0.12));
    }
}

TEST_CASE("mcshane extension reproduces affine data on a ball") {
    auto d = make_domain(RegionSpec::ball({0, 0}, 2.0), 0.1);
    BoundaryData g;
    g.generator = Generator::affine({0.0, 1.0}, 0.0);
    auto ext = mcshane_extension(d, g);
    CHECK(ext.grid_admissible);
    for (int n : d->active_ids) {
        double expect = d->coord(n)[1];
        // metric distortion allows psi <= expect + overestimate slack
        CHECK(std::abs(ext.psi[n] - expect) <= 0.09 * 4.0 + 1e-9);
    }
    for (int n : d->boundary_ids)
        CHECK(ext.psi[n] == doctest::Approx(d->coord(n)[1]).epsilon(1e-12));
}

TEST_CASE("mcshane flags a Lipschitz violation") {
    auto d = make_domain(RegionSpec::ball({0, 0}, 2.0), 0.1);
    BoundaryData g;
    g.generator = Generator::affine({0.0, 2.0}, 0.0);  // slope 2 data
    auto ext = mcshane_extension(d, g);
    CHECK(!ext.admissible);
    CHECK(!ext.grid_admissible);
    CHECK(ext.margin > 0.1);
}

TEST_CASE("mcshane output is 1-Lipschitz in the intrinsic metric") {
    auto d = make_domain(RegionSpec::annulus({0, 0}, 0.5, 2.0), 0.1);
    BoundaryData g;
    g.generator = Generator::affine({0.5, 0.5}, 0.2);
    auto ext = mcshane_extension(d, g);
    std::mt19937 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, d->active_ids.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        int a = d->active_ids[pick(rng)];
        int b = d->active_ids[pick(rng)];
        double dd = intrinsic_distance(*d, a, b);
        CHECK(std::abs(ext.psi[a] - ext.psi[b]) <= dd + 1e-12);
    }
    // per-triangle norms mix axis (cost h) and diagonal (cost h*sqrt(2))
    // graph edges, so the PL gradient of a graph-1-Lipschitz field is only
    // bounded by sqrt(2)
    auto chk = check_weakly_spacelike(ext.psi);
    CHECK(chk.max_grad_norm <= std::sqrt(2.0) + 1e-9);
}

TEST_CASE("weakly spacelike check on model fields") {
    auto d = make_domain(RegionSpec::ball({0, 0}, 2.0), 0.1);
    // unit cone sampled away from its apex (the apex cell of a lattice cone
    // has PL gradient sqrt(2) on a fixed-diagonal triangulation, and the
    // per-triangle norm mixes finite differences taken h apart, so the max
    // norm is 1 + O(h/r_in) rather than exactly 1)
    auto ann = make_domain(RegionSpec::annulus({0, 0}, 1.0, 2.0), 0.1);
    auto cone = sample_field(ann, [](Point x) { return norm2(x); });
    auto c1 = check_weakly_spacelike(cone);
    CHECK(c1.max_grad_norm >= 0.99);
    CHECK(c1.max_grad_norm <= 1.0 + 0.05);
    auto steep = sample_field(d, [](Point x) { return 2.0 * x[0]; });
    auto c2 = check_weakly_spacelike(steep);
    CHECK(!c2.ok);
    CHECK(c2.max_grad_norm == doctest::Approx(2.0).epsilon(1e-12));
    auto flat = sample_field(d, [](Point) { return 0.7; });
    auto c3 = check_weakly_spacelike(flat);
    CHECK(c3.ok);
    CHECK(c3.max_grad_norm == 0.0);
}

TEST_CASE("evaluate: nodes exact, edges linear, affine reproduced") {
    auto d = make_domain(RegionSpec::box({0, 0}, {1, 1}), 0.1);
    auto u = sample_field(d, [](Point x) { return 0.3 * x[0] - 0.2 * x[1] + 0.05; });
    for (int n : d->active_ids)
        CHECK(evaluate(u, d->coord(n)) == u[n]);
    CHECK(evaluate(u, {0.55, 0.3}) ==
          doctest::Approx(0.3 * 0.55 - 0.2 * 0.3 + 0.05).epsilon(1e-14));
    CHECK(evaluate(u, {0.13, 0.77}) ==
          doctest::Approx(0.3 * 0.13 - 0.2 * 0.77 + 0.05).epsilon(1e-13));
    CHECK_THROWS_AS(evaluate(u, {5.0, 5.0}), CoverageError);
}

TEST_CASE("rescale: cone invariance, affine scaling, semigroup") {
    auto big = make_domain(RegionSpec::ball({0, 0}, 6.5), 0.1);
    auto small = make_domain(RegionSpec::ball({0, 0}, 1.0), 0.1);
    auto cone = sample_field(big, [](Point x) { return -norm2(x); });
    auto r2 = rescale(cone, 2.0, small);
    for (int n : small->active_ids)
        CHECK(r2[n] == doctest::Approx(-norm2(small->coord(n))).epsilon(1e-10));

    auto aff = sample_field(big, [](Point x) { return 0.4 * x[0] + 0.1 * x[1] + 0.9; });
    auto a3 = rescale(aff, 3.0, small);
    for (int n : small->active_ids) {
        Point x = small->coord(n);
        CHECK(a3[n] ==
              doctest::Approx(0.4 * x[0] + 0.1 * x[1] + 0.9 / 3.0).epsilon(1e-10));
    }

    // semigroup: rescale(rescale(u,2),3) = rescale(u,6)
    auto mid = make_domain(RegionSpec::ball({0, 0}, 3.2), 0.1);
    auto u = sample_field(big, [](Point x) {
        return 0.5 * std::sin(x[0]) + 0.3 * x[1];
    });
    auto s2 = rescale(u, 2.0, mid);
    auto s23 = rescale(s2, 3.0, small);
    auto s6 = rescale(u, 6.0, small);
    for (int n : small->active_ids)
        CHECK(std::abs(s23[n] - s6[n]) <= 1e-12 + 0.1 * 0.1);  // + interp error
}

TEST_CASE("convex hull basics") {
    auto h1 = convex_hull({{0, 0}});
    REQUIRE(h1.size() == 1);
    auto h2 = convex_hull({{0, 0}, {1, 0}, {0, 1}, {0.2, 0.2}});
    REQUIRE(h2.size() == 3);
    CHECK(hull_contains(h2, {0.2, 0.2}));
    CHECK(!hull_contains(h2, {0.9, 0.9}));
    CHECK_THROWS_AS(convex_hull({}), DomainError);
    auto hc = convex_hull({{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}});
    REQUIRE(hc.size() == 2);  // collinear input returns the segment
}

TEST_CASE("convex hull matches a brute-force oracle on random points") {
    std::mt19937 rng(4321);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Point> pts;
        for (int i = 0; i < 20; ++i) pts.push_back({coord(rng), coord(rng)});
        auto hull = convex_hull(pts);
        auto want = hull_oracle(pts);
        std::vector<Point> got = hull;
        std::sort(got.begin(), got.end());
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i][0] == doctest::Approx(want[i][0]).epsilon(1e-12));
            CHECK(got[i][1] == doctest::Approx(want[i][1]).epsilon(1e-12));
        }
    }
}
