#include "maxarea/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace maxarea {

RegionSpec RegionSpec::ball(Point c, double R) {
    RegionSpec s;
    s.kind = ShapeKind::Ball;
    s.center = c;
    s.radius = R;
    return s;
}

RegionSpec RegionSpec::annulus(Point c, double r_in, double r_out) {
    RegionSpec s;
    s.kind = ShapeKind::Annulus;
    s.center = c;
    s.r_in = r_in;
    s.r_out = r_out;
    return s;
}

RegionSpec RegionSpec::box(Point lo, Point hi) {
    RegionSpec s;
    s.kind = ShapeKind::Box;
    s.lo = lo;
    s.hi = hi;
    return s;
}

RegionSpec RegionSpec::box_minus_points(Point lo, Point hi, std::vector<Point> pts) {
    RegionSpec s = box(lo, hi);
    s.kind = ShapeKind::BoxMinusPoints;
    s.points = std::move(pts);
    return s;
}

RegionSpec RegionSpec::punctured_ball(Point c, double R, Point puncture) {
    return punctured_ball(c, R, std::vector<Point>{puncture});
}

RegionSpec RegionSpec::punctured_ball(Point c, double R, std::vector<Point> punctures) {
    RegionSpec s = ball(c, R);
    s.kind = ShapeKind::PuncturedBall;
    s.points = std::move(punctures);
    return s;
}

RegionSpec RegionSpec::interval(double a, double b, std::vector<double> punctures) {
    RegionSpec s;
    s.kind = ShapeKind::Interval;
    s.dim = 1;
    s.lo = {a, 0.0};
    s.hi = {b, 0.0};
    for (double p : punctures) s.points.push_back({p, 0.0});
    return s;
}

namespace {

bool region_contains(const RegionSpec& s, Point x) {
    const double eps = 1e-9;
    switch (s.kind) {
        case ShapeKind::Ball:
        case ShapeKind::PuncturedBall:
            return dist(x, s.center) <= s.radius * (1.0 + eps) + 1e-12;
        case ShapeKind::Annulus: {
            double r = dist(x, s.center);
            return r >= s.r_in * (1.0 - eps) - 1e-12 &&
                   r <= s.r_out * (1.0 + eps) + 1e-12;
        }
        case ShapeKind::Box:
        case ShapeKind::BoxMinusPoints:
            return x[0] >= s.lo[0] - 1e-9 && x[0] <= s.hi[0] + 1e-9 &&
                   x[1] >= s.lo[1] - 1e-9 && x[1] <= s.hi[1] + 1e-9;
        case ShapeKind::Interval:
            return x[0] >= s.lo[0] - 1e-9 && x[0] <= s.hi[0] + 1e-9;
    }
    return false;
}

void validate_spec(const RegionSpec& s, double h) {
    if (h <= 0.0) throw DomainError("make_domain: grid spacing h must be positive");
    auto fail = [&](const std::string& what) {
        throw DomainError("make_domain: degenerate region (" + what +
                          ") relative to h=" + std::to_string(h));
    };
    switch (s.kind) {
        case ShapeKind::Ball:
        case ShapeKind::PuncturedBall:
            if (s.radius <= 2.0 * h) fail("radius <= 2h");
            break;
        case ShapeKind::Annulus:
            if (s.r_out <= 2.0 * h) fail("outer radius <= 2h");
            if (s.r_in <= 0.0) fail("inner radius <= 0");
            if (s.r_out - s.r_in <= 2.0 * h) fail("annulus width <= 2h");
            break;
        case ShapeKind::Box:
        case ShapeKind::BoxMinusPoints:
            if (s.hi[0] - s.lo[0] <= 4.0 * h || s.hi[1] - s.lo[1] <= 4.0 * h)
                fail("box side <= 4h");
            break;
        case ShapeKind::Interval:
            if (s.hi[0] - s.lo[0] <= 4.0 * h) fail("interval length <= 4h");
            break;
    }
    for (const auto& p : s.points)
        if (!region_contains(s, p)) fail("puncture outside region");
}

}  // namespace

int GridDomain::nearest_node(Point x) const {
    int bi = (int)std::lround(x[0] / h);
    int bj = dim == 2 ? (int)std::lround(x[1] / h) : 0;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    int best_i = 0, best_j = 0;
    for (int r = 0; r <= 2; ++r) {
        for (int j = bj - r; j <= bj + r; ++j) {
            for (int i = bi - r; i <= bi + r; ++i) {
                if (!is_active(i, j)) continue;
                Point c{i * h, dim == 2 ? j * h : 0.0};
                double d = dist(c, x);
                if (d < best_d - 1e-12 ||
                    (d < best_d + 1e-12 &&
                     (i < best_i || (i == best_i && j < best_j)))) {
                    best_d = d;
                    best = id(i, j);
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best >= 0 && best_d <= r * h) break;
    }
    return best;
}

int GridDomain::locate(Point x, double tol) const {
    // Identify the cell and the fixed-diagonal triangle holding x.
    auto try_cell = [&](int ci, int cj, int& out) {
        if (!in_cell_box(ci, cj)) return false;
        double xi = x[0] / h - ci;
        double eta = dim == 2 ? x[1] / h - cj : 0.0;
        double t = tol / h;
        if (xi < -t || xi > 1 + t || eta < -t || eta > 1 + t) return false;
        int cell = cell_id(ci, dim == 2 ? cj : ilo[1]);
        if (dim == 1) {
            if (tri_lower[cell] < 0) return false;
            out = tri_lower[cell];
            return true;
        }
        bool want_lower = eta <= xi;
        for (int pass = 0; pass < 2; ++pass) {
            bool lower = pass == 0 ? want_lower : !want_lower;
            // only fall through across the diagonal within tolerance
            if (pass == 1 && std::abs(eta - xi) > t) break;
            int ti = lower ? tri_lower[cell] : tri_upper[cell];
            if (ti >= 0) { out = ti; return true; }
        }
        return false;
    };
    int bi = (int)std::floor(x[0] / h + 1e-12);
    int bj = dim == 2 ? (int)std::floor(x[1] / h + 1e-12) : 0;
    int out = -1;
    for (int dj = 0; dj >= -1; --dj)
        for (int di = 0; di >= -1; --di)
            if (try_cell(bi + di, bj + dj, out)) return out;
    return -1;
}

bool GridDomain::covers(Point x, double tol) const { return locate(x, tol) >= 0; }

DomainPtr make_domain(const RegionSpec& spec, double h) {
    validate_spec(spec, h);
    auto dom = std::make_shared<GridDomain>();
    GridDomain& d = *dom;
    d.spec = spec;
    d.dim = spec.kind == ShapeKind::Interval ? 1 : spec.dim;
    d.h = h;

    Point lo, hi;
    switch (spec.kind) {
        case ShapeKind::Ball:
        case ShapeKind::PuncturedBall:
            lo = {spec.center[0] - spec.radius, spec.center[1] - spec.radius};
            hi = {spec.center[0] + spec.radius, spec.center[1] + spec.radius};
            break;
        case ShapeKind::Annulus:
            lo = {spec.center[0] - spec.r_out, spec.center[1] - spec.r_out};
            hi = {spec.center[0] + spec.r_out, spec.center[1] + spec.r_out};
            break;
        default:
            lo = spec.lo;
            hi = spec.hi;
            break;
    }
    d.ilo = {(int)std::floor(lo[0] / h - 1e-9), (int)std::floor(lo[1] / h - 1e-9)};
    d.ihi = {(int)std::ceil(hi[0] / h + 1e-9), (int)std::ceil(hi[1] / h + 1e-9)};
    if (d.dim == 1) {
        d.ilo[1] = d.ihi[1] = 0;
    }
    d.nx = d.ihi[0] - d.ilo[0] + 1;
    d.ny = d.ihi[1] - d.ilo[1] + 1;
    d.state.assign((std::size_t)d.nx * d.ny, 0);

    for (int j = d.ilo[1]; j <= d.ihi[1]; ++j)
        for (int i = d.ilo[0]; i <= d.ihi[0]; ++i) {
            Point x{i * h, d.dim == 2 ? j * h : 0.0};
            if (region_contains(spec, x)) d.state[d.id(i, j)] = 1;
        }

    // triangulation (fixed diagonal (i,j)-(i+1,j+1)); dim 1: edges
    {
        std::size_t ncells =
            (std::size_t)std::max(d.nx - 1, 1) * std::max(d.ny - 1, 1);
        if (d.dim == 1) ncells = (std::size_t)std::max(d.nx - 1, 1);
        d.tri_lower.assign(ncells, -1);
        d.tri_upper.assign(ncells, -1);
        if (d.dim == 1) {
            for (int i = d.ilo[0]; i < d.ihi[0]; ++i) {
                if (!d.is_active(i, 0) || !d.is_active(i + 1, 0)) continue;
                int a = d.id(i, 0), b = d.id(i + 1, 0);
                d.tri_lower[d.cell_id(i, d.ilo[1])] = (int)d.tris.size();
                d.tris.push_back(Tri{a, b, -1, a, b, a, a, h});
            }
        } else {
            double area = 0.5 * h * h;
            for (int j = d.ilo[1]; j < d.ihi[1]; ++j)
                for (int i = d.ilo[0]; i < d.ihi[0]; ++i) {
                    bool a = d.is_active(i, j), b = d.is_active(i + 1, j);
                    bool c = d.is_active(i + 1, j + 1), e = d.is_active(i, j + 1);
                    int na = a ? d.id(i, j) : -1, nb = b ? d.id(i + 1, j) : -1;
                    int nc = c ? d.id(i + 1, j + 1) : -1,
                        ne = e ? d.id(i, j + 1) : -1;
                    if (a && b && c) {
                        d.tri_lower[d.cell_id(i, j)] = (int)d.tris.size();
                        d.tris.push_back(Tri{na, nb, nc, na, nb, nb, nc, area});
                    }
                    if (a && c && e) {
                        d.tri_upper[d.cell_id(i, j)] = (int)d.tris.size();
                        d.tris.push_back(Tri{na, nc, ne, ne, nc, na, ne, area});
                    }
                }
        }
    }

    // staircase boundary: a node is interior only when its PL basis function
    // has full support, i.e. every incident triangle of the fixed-diagonal
    // fan exists (6 in dim 2, both edges in dim 1). Nodes with a missing
    // diagonal neighbor would otherwise sit on the edge of the triangulated
    // region with extra variational freedom.
    {
        std::vector<int> fan(d.state.size(), 0);
        for (const Tri& T : d.tris)
            for (int v : {T.v0, T.v1, T.v2})
                if (v >= 0) ++fan[v];
        const int full = d.dim == 1 ? 2 : 6;
        for (std::size_t n = 0; n < d.state.size(); ++n)
            if (d.state[n] && fan[n] < full) d.state[n] = 2;
    }

    // punctures: single nearest node each, ties lexicographic
    for (const auto& p : spec.points) {
        int n = d.nearest_node(p);
        if (n < 0) throw DomainError("make_domain: puncture has no active node");
        d.state[n] = 2;
        d.puncture_ids.push_back(n);
    }

    for (std::size_t n = 0; n < d.state.size(); ++n) {
        if (d.state[n]) d.active_ids.push_back((int)n);
        if (d.state[n] == 2) d.boundary_ids.push_back((int)n);
    }
    if (d.active_ids.empty()) throw DomainError("make_domain: empty active set");

    // edge connectivity of the active set
    {
        std::vector<std::uint8_t> seen(d.state.size(), 0);
        std::vector<int> stack{d.active_ids.front()};
        seen[stack.front()] = 1;
        std::size_t count = 0;
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            ++count;
            auto v = d.ij(n);
            const int di[4] = {1, -1, 0, 0};
            const int dj[4] = {0, 0, 1, -1};
            int nn = d.dim == 2 ? 4 : 2;
            for (int t = 0; t < nn; ++t) {
                int i = v[0] + di[t], j = v[1] + dj[t];
                if (!d.is_active(i, j)) continue;
                int m = d.id(i, j);
                if (!seen[m]) {
                    seen[m] = 1;
                    stack.push_back(m);
                }
            }
        }
        if (count != d.active_ids.size())
            throw DomainError("make_domain: active set is not edge-connected");
    }

    return dom;
}

ScalarField sample_field(DomainPtr d, const std::function<double(Point)>& f) {
    ScalarField u(d);
    for (int n : d->active_ids) u[n] = f(d->coord(n));
    return u;
}

double Generator::operator()(Point x) const {
    switch (kind) {
        case Kind::Constant: return c;
        case Kind::Affine: return a[0] * x[0] + a[1] * x[1] + c;
        case Kind::Cone: return c + sign * dist(x, center);
        case Kind::Theta: return theta * x[1] - (1.0 - theta) * k;
    }
    return 0.0;
}

Generator Generator::constant(double v) {
    Generator g;
    g.kind = Kind::Constant;
    g.c = v;
    return g;
}
Generator Generator::affine(Point a, double c) {
    Generator g;
    g.kind = Kind::Affine;
    g.a = a;
    g.c = c;
    return g;
}
Generator Generator::cone(double sign, Point center, double offset) {
    Generator g;
    g.kind = Kind::Cone;
    g.sign = sign;
    g.center = center;
    g.c = offset;
    return g;
}
Generator Generator::theta_family(double theta, double k) {
    Generator g;
    g.kind = Kind::Theta;
    g.theta = theta;
    g.k = k;
    return g;
}

double BoundaryData::value_at(const GridDomain& d, int node) const {
    auto it = overrides.find(node);
    if (it != overrides.end()) return it->second;
    if (generator) return (*generator)(d.coord(node));
    throw DomainError("BoundaryData: no value for boundary node");
}

std::vector<std::pair<int, double>> BoundaryData::resolve(const GridDomain& d) const {
    std::vector<std::pair<int, double>> out;
    out.reserve(d.boundary_ids.size());
    for (int n : d.boundary_ids) out.emplace_back(n, value_at(d, n));
    return out;
}

namespace {

// 8-neighbor Dijkstra, optionally from multiple seeds with value offsets.
std::vector<double> dijkstra(const GridDomain& d,
                             const std::vector<std::pair<int, double>>& seeds,
                             int stop_node = -1) {
    std::vector<double> distv(d.num_nodes(), std::numeric_limits<double>::infinity());
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> q;
    for (auto& [n, v] : seeds) {
        if (v < distv[n]) {
            distv[n] = v;
            q.push({v, n});
        }
    }
    const double diag = d.h * std::sqrt(2.0);
    while (!q.empty()) {
        auto [dv, n] = q.top();
        q.pop();
        if (dv > distv[n]) continue;
        if (n == stop_node) break;
        auto v = d.ij(n);
        auto relax = [&](int i, int j, double w) {
            if (!d.is_active(i, j)) return;
            int m = d.id(i, j);
            double nd = dv + w;
            if (nd < distv[m] - 1e-15) {
                distv[m] = nd;
                q.push({nd, m});
            }
        };
        relax(v[0] + 1, v[1], d.h);
        relax(v[0] - 1, v[1], d.h);
        if (d.dim == 2) {
            relax(v[0], v[1] + 1, d.h);
            relax(v[0], v[1] - 1, d.h);
            // diagonals need a supporting axis neighbor (no corner cutting)
            auto relax_diag = [&](int si, int sj) {
                if (d.is_active(v[0] + si, v[1]) || d.is_active(v[0], v[1] + sj))
                    relax(v[0] + si, v[1] + sj, diag);
            };
            relax_diag(1, 1);
            relax_diag(1, -1);
            relax_diag(-1, 1);
            relax_diag(-1, -1);
        }
    }
    return distv;
}

}  // namespace

double intrinsic_distance(const GridDomain& d, int node_a, int node_b) {
    if (node_a < 0 || node_b < 0 || node_a >= (int)d.num_nodes() ||
        node_b >= (int)d.num_nodes() || !d.state[node_a] || !d.state[node_b])
        throw DomainError("intrinsic_distance: inactive node");
    if (node_a == node_b) return 0.0;
    auto distv = dijkstra(d, {{node_a, 0.0}}, node_b);
    return distv[node_b];
}

std::vector<double> distance_map(const GridDomain& d, int source) {
    if (source < 0 || source >= (int)d.num_nodes() || !d.state[source])
        throw DomainError("distance_map: inactive node");
    return dijkstra(d, {{source, 0.0}});
}

McShaneResult mcshane_extension(DomainPtr d,
                                const std::vector<std::pair<int, double>>& seeds) {
    if (seeds.empty()) throw DomainError("mcshane_extension: no seeds");
    auto distv = dijkstra(*d, seeds);
    McShaneResult r;
    r.psi = ScalarField(d);
    for (int n : d->active_ids) r.psi[n] = distv[n];
    r.margin = 0.0;
    for (auto& [n, v] : seeds) r.margin = std::max(r.margin, v - distv[n]);
    r.admissible = r.margin <= 1e-12;
    r.grid_admissible = r.margin <= 2.0 * d->h + 1e-12;
    return r;
}

McShaneResult mcshane_extension(DomainPtr d, const BoundaryData& g) {
    return mcshane_extension(d, g.resolve(*d));
}

SpacelikeCheck check_weakly_spacelike(const ScalarField& u) {
    SpacelikeCheck c;
    const GridDomain& d = *u.domain;
    for (const Tri& T : d.tris) {
        double px = (u[T.ax1] - u[T.ax0]) / d.h;
        double py = (u[T.ay1] - u[T.ay0]) / d.h;
        c.max_grad_norm = std::max(c.max_grad_norm, std::sqrt(px * px + py * py));
    }
    c.ok = c.max_grad_norm <= 1.0 + 1e-12;
    return c;
}

double evaluate(const ScalarField& u, Point x) {
    const GridDomain& d = *u.domain;
    int ti = d.locate(x);
    if (ti < 0) throw CoverageError("evaluate: point outside covered region");
    const Tri& T = d.tris[ti];
    // exact at nodes: interpolation weights would otherwise round
    for (int v : {T.v0, T.v1, T.v2})
        if (v >= 0 && dist(d.coord(v), x) <= 1e-12 * d.h) return u[v];
    double px = (u[T.ax1] - u[T.ax0]) / d.h;
    double py = (u[T.ay1] - u[T.ay0]) / d.h;
    Point x0 = d.coord(T.v0);
    return u[T.v0] + px * (x[0] - x0[0]) + py * (x[1] - x0[1]);
}

ScalarField rescale(const ScalarField& u, double r, DomainPtr target) {
    if (r <= 0.0) throw DomainError("rescale: r must be positive");
    ScalarField out(target);
    for (int n : target->active_ids) {
        Point x = target->coord(n);
        out[n] = evaluate(u, {r * x[0], r * x[1]}) / r;
    }
    return out;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
    if (pts.empty()) throw DomainError("convex_hull: empty point set");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) {
                              return dist(a, b) < 1e-12;
                          }),
              pts.end());
    if (pts.size() <= 2) return pts;
    auto cross = [](const Point& o, const Point& a, const Point& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-15) --k;
        hull[k++] = pts[i];
    }
    std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-15) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 2) return {pts.front(), pts.back()};
    return hull;
}

bool hull_contains(const std::vector<Point>& hull, Point x, double tol) {
    if (hull.size() == 1) return dist(hull[0], x) <= tol;
    if (hull.size() == 2) {
        Point d = sub(hull[1], hull[0]);
        double len2 = dot(d, d);
        double t = len2 > 0 ? dot(sub(x, hull[0]), d) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        Point p{hull[0][0] + t * d[0], hull[0][1] + t * d[1]};
        return dist(p, x) <= tol;
    }
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % hull.size()];
        double cr = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
        if (cr < -tol) return false;
    }
    return true;
}

}  // namespace maxarea
