#include "maxarea/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxarea {

bool SingularSet::touches_node(int node) const {
    for (const auto& s : segments)
        if (s.node_x == node || s.node_y == node) return true;
    return false;
}

namespace {

bool open_segment_inside(const GridDomain& d, Point a, Point b) {
    double len = dist(a, b);
    double step = d.h / 4.0;
    double margin = d.h / 2.0;  // keep clear of the endpoint staircase
    if (len <= 2.0 * margin) return true;
    for (double s = margin; s <= len - margin + 1e-12; s += step) {
        double t = s / len;
        Point p{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
        if (!d.covers(p, d.h * 1e-6)) return false;
    }
    return true;
}

}  // namespace

SingularSet singular_set(const DomainPtr& domain, const BoundaryData& phi,
                         double tol) {
    const GridDomain& d = *domain;
    if (tol < d.h) throw DomainError("singular_set: tol must be >= h");
    SingularSet out;
    out.tol = tol;
    const auto& bd = d.boundary_ids;
    std::vector<Point> pos(bd.size());
    std::vector<double> val(bd.size());
    for (std::size_t i = 0; i < bd.size(); ++i) {
        pos[i] = d.coord(bd[i]);
        val[i] = phi.value_at(d, bd[i]);
    }
    double min_sep = 4.0 * tol;
    for (std::size_t i = 0; i < bd.size(); ++i)
        for (std::size_t j = i + 1; j < bd.size(); ++j) {
            double sep = dist(pos[i], pos[j]);
            if (sep < min_sep) continue;
            double dphi = val[j] - val[i];
            if (std::abs(dphi) < sep - tol) continue;
            if (!open_segment_inside(d, pos[i], pos[j])) continue;
            LightSegment seg;
            seg.node_x = bd[i];
            seg.node_y = bd[j];
            seg.x = pos[i];
            seg.y = pos[j];
            seg.phi_x = val[i];
            seg.phi_y = val[j];
            seg.sign = dphi >= 0.0 ? 1 : -1;
            seg.equality_gap = sep - std::abs(dphi);
            out.segments.push_back(seg);
        }
    return out;
}

SingularSet verify_ray_linearity(const ScalarField& u, SingularSet segs) {
    const GridDomain& d = *u.domain;
    for (auto& s : segs.segments) {
        double worst = 0.0;
        for (int i = 1; i <= 9; ++i) {
            double t = 0.1 * i;
            Point p{t * s.x[0] + (1.0 - t) * s.y[0],
                    t * s.x[1] + (1.0 - t) * s.y[1]};
            double lin = t * s.phi_x + (1.0 - t) * s.phi_y;
            try {
                worst = std::max(worst, std::abs(evaluate(u, p) - lin));
            } catch (const CoverageError&) {
                // sample fell off the mask; ignore, the inside test was grid-scale
            }
        }
        s.linearity_residual = worst;
        s.linearity_flagged = worst > 5.0 * d.h;
    }
    return segs;
}

BlowdownReport blowdown(const ScalarField& u, std::vector<double> radii,
                        int samples_per_circle, Point center) {
    if (radii.empty()) throw DomainError("blowdown: no radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1]))
            throw DomainError("blowdown: radii must be increasing");
    if (samples_per_circle < 16)
        throw DomainError("blowdown: need at least 16 samples per circle");
    BlowdownReport rep;
    rep.radii = radii;
    const double two_pi = 2.0 * std::acos(-1.0);
    std::vector<double> best_seq;
    for (double r : radii) {
        double sp = 0.0, sm = 0.0;
        Point b{0.0, 0.0};
        std::vector<double> s(samples_per_circle);
        std::vector<Point> w(samples_per_circle);
        for (int m = 0; m < samples_per_circle; ++m) {
            double ang = two_pi * m / samples_per_circle;
            w[m] = {std::cos(ang), std::sin(ang)};
            Point x{center[0] + r * w[m][0], center[1] + r * w[m][1]};
            s[m] = evaluate(u, x) / r;  // CoverageError propagates
            sp += (s[m] - 1.0) * (s[m] - 1.0);
            sm += (s[m] + 1.0) * (s[m] + 1.0);
            b[0] += s[m] * w[m][0];
            b[1] += s[m] * w[m][1];
        }
        double nb = norm2(b);
        Point a = nb > 1e-14 ? Point{b[0] / nb, b[1] / nb} : Point{1.0, 0.0};
        double sh = 0.0;
        for (int m = 0; m < samples_per_circle; ++m) {
            double dev = s[m] - dot(a, w[m]);
            sh += dev * dev;
        }
        rep.res_cone_plus.push_back(std::sqrt(sp / samples_per_circle));
        rep.res_cone_minus.push_back(std::sqrt(sm / samples_per_circle));
        rep.res_hyperplane.push_back(std::sqrt(sh / samples_per_circle));
        rep.hyperplane_a.push_back(a);
    }
    std::size_t last = radii.size() - 1;
    double rp = rep.res_cone_plus[last];
    double rm = rep.res_cone_minus[last];
    double rh = rep.res_hyperplane[last];
    rep.a = rep.hyperplane_a[last];
    if (rp <= rm && rp <= rh && rp < 0.1) {
        rep.model = BlowdownModel::ConePlus;
        rep.best_residual = rp;
        best_seq = rep.res_cone_plus;
    } else if (rm <= rp && rm <= rh && rm < 0.1) {
        rep.model = BlowdownModel::ConeMinus;
        rep.best_residual = rm;
        best_seq = rep.res_cone_minus;
    } else if (rh <= rp && rh <= rm && rh < 0.05) {
        rep.model = BlowdownModel::Hyperplane;
        rep.best_residual = rh;
        best_seq = rep.res_hyperplane;
    } else {
        rep.model = BlowdownModel::Undetermined;
        rep.best_residual = std::min({rp, rm, rh});
        best_seq = rep.res_hyperplane;
    }
    rep.residual_decreasing = true;
    for (std::size_t i = 1; i < best_seq.size(); ++i)
        if (best_seq[i] > best_seq[i - 1] + 1e-12) rep.residual_decreasing = false;
    return rep;
}

const char* to_string(EntireCase c) {
    switch (c) {
        case EntireCase::Maximal_i: return "maximal(i)";
        case EntireCase::UpperCone_ii: return "upper-cone(ii)";
        case EntireCase::LowerCone_iii: return "lower-cone(iii)";
        case EntireCase::HyperplaneAsymptotic_iv: return "hyperplane-asymptotic(iv)";
        case EntireCase::TrichotomyI: return "trichotomy-i";
        case EntireCase::TrichotomyII: return "trichotomy-ii";
        case EntireCase::TrichotomyIII: return "trichotomy-iii";
        case EntireCase::Undetermined: return "undetermined";
    }
    return "?";
}

ClassificationReport classify_entire(const ScalarField& u,
                                     const BoundaryData& phi, double tol_mult) {
    const GridDomain& d = *u.domain;
    if (d.puncture_ids.empty())
        throw DomainError("classify_entire: domain has no puncture");
    const double tol = tol_mult * d.h;
    ClassificationReport rep;
    int pin = d.puncture_ids.front();
    Point c = d.coord(pin);
    double v0 = u[pin];

    auto segs = singular_set(u.domain, phi, 2.0 * d.h);
    bool through_pin = false;
    for (int p : d.puncture_ids) through_pin = through_pin || segs.touches_node(p);
    auto res = residual_field(u);
    rep.max_regular_residual = res.max_interior();

    if (!through_pin && rep.max_regular_residual <= tol) {
        rep.result = EntireCase::Maximal_i;
        return rep;
    }
    double ep = 0.0, em = 0.0;
    for (int n : d.active_ids) {
        double r = dist(d.coord(n), c);
        ep = std::max(ep, std::abs(u[n] - (v0 + r)));
        em = std::max(em, std::abs(u[n] - (v0 - r)));
    }
    rep.cone_error_plus = ep;
    rep.cone_error_minus = em;
    if (ep <= tol) {
        rep.result = EntireCase::UpperCone_ii;
        return rep;
    }
    if (em <= tol) {
        rep.result = EntireCase::LowerCone_iii;
        return rep;
    }

    double R = d.spec.kind == ShapeKind::PuncturedBall ? d.spec.radius
                                                       : 0.45 * d.h * d.nx;
    std::vector<double> radii{0.25 * R, 0.375 * R, 0.5 * R};
    rep.blowdown = blowdown(u, radii, 64, c);
    if (rep.blowdown.model == BlowdownModel::Hyperplane) {
        Point a = rep.blowdown.a;
        rep.a = a;
        double above = -std::numeric_limits<double>::infinity();
        double below = std::numeric_limits<double>::infinity();
        for (int n : d.active_ids) {
            double g = u[n] - (v0 + dot(a, sub(d.coord(n), c)));
            above = std::max(above, g);
            below = std::min(below, g);
        }
        int side = 0;
        if (above <= tol) side = -1;        // u <= a.x
        else if (below >= -tol) side = +1;  // u >= a.x
        if (side != 0) {
            rep.side = side;
            rep.one_sided_margin = side < 0 ? above : below;
            double worst = 0.0;
            double tmax = R - 2.0 * d.h;
            for (double t = d.h; t <= tmax; t += d.h) {
                double tt = side < 0 ? -t : t;
                Point x{c[0] + tt * a[0], c[1] + tt * a[1]};
                worst = std::max(worst, std::abs(evaluate(u, x) - (v0 + tt)));
            }
            rep.half_ray_error = worst;
            if (worst <= tol) {
                rep.result = EntireCase::HyperplaneAsymptotic_iv;
                return rep;
            }
        }
    }
    rep.result = EntireCase::Undetermined;
    return rep;
}

namespace {

std::vector<int> inner_boundary_nodes(const GridDomain& d, const InnerBoundary& A) {
    std::vector<int> out;
    if (std::holds_alternative<InnerCircle>(A)) {
        const auto& c = std::get<InnerCircle>(A);
        for (int n : d.boundary_ids)
            if (dist(d.coord(n), c.center) <= c.r + 2.0 * d.h) out.push_back(n);
    } else {
        const auto& pts = std::get<std::vector<Point>>(A);
        for (const auto& p : pts) {
            int n = d.nearest_node(p);
            if (n < 0 || !d.is_boundary(n))
                throw DomainError("exterior_trichotomy: A point is not a boundary node");
            out.push_back(n);
        }
    }
    if (out.empty()) throw DomainError("exterior_trichotomy: empty inner boundary");
    return out;
}

}  // namespace

ClassificationReport exterior_trichotomy(const ScalarField& u,
                                         const InnerBoundary& A, Point x0,
                                         double tol_mult) {
    const GridDomain& d = *u.domain;
    const double tol = tol_mult * d.h;
    ClassificationReport rep;
    auto dA = inner_boundary_nodes(d, A);
    std::vector<std::uint8_t> is_dA(d.num_nodes(), 0);
    for (int n : dA) is_dA[n] = 1;

    const double inf = std::numeric_limits<double>::infinity();
    rep.max_above = rep.max_above_dA = rep.max_below = rep.max_below_dA = -inf;
    rep.min_above = rep.min_above_dA = rep.min_below = rep.min_below_dA = inf;
    for (int n : d.active_ids) {
        double r = dist(d.coord(n), x0);
        double sm = u[n] - r;  // trichotomy-i quantity
        double sp = u[n] + r;  // trichotomy-ii quantity
        rep.max_above = std::max(rep.max_above, sm);
        rep.min_above = std::min(rep.min_above, sm);
        rep.max_below = std::max(rep.max_below, sp);
        rep.min_below = std::min(rep.min_below, sp);
        if (is_dA[n]) {
            rep.max_above_dA = std::max(rep.max_above_dA, sm);
            rep.min_above_dA = std::min(rep.min_above_dA, sm);
            rep.max_below_dA = std::max(rep.max_below_dA, sp);
            rep.min_below_dA = std::min(rep.min_below_dA, sp);
        }
    }

    // hypothesis of the trichotomy: not maximal off Conv(A)
    auto res = residual_field(u);
    std::vector<Point> hull;
    double circle_r = 0.0;
    Point circle_c{0.0, 0.0};
    bool circle = std::holds_alternative<InnerCircle>(A);
    if (circle) {
        circle_c = std::get<InnerCircle>(A).center;
        circle_r = std::get<InnerCircle>(A).r;
    } else {
        hull = convex_hull(std::get<std::vector<Point>>(A));
    }
    auto outside = [&](Point x) {
        if (circle) return dist(x, circle_c) > circle_r + 2.0 * d.h;
        return !hull_contains(hull, x, 2.0 * d.h);
    };
    double off_hull_res = res.max_interior(outside);
    bool off_hull_degenerate = false;
    for (int n : d.active_ids)
        if (res.interior[n] && res.degenerate[n] && outside(d.coord(n)))
            off_hull_degenerate = true;
    rep.max_regular_residual = off_hull_res;
    rep.hypothesis_not_maximal = off_hull_res > tol || off_hull_degenerate;

    bool i_max = rep.max_above <= rep.max_above_dA + tol;
    bool i_min = rep.min_above >= rep.min_above_dA - tol;
    bool ii_max = rep.max_below <= rep.max_below_dA + tol;
    bool ii_min = rep.min_below >= rep.min_below_dA - tol;
    if (i_max && i_min) {
        rep.result = EntireCase::TrichotomyI;
        return rep;
    }
    if (ii_max && ii_min) {
        rep.result = EntireCase::TrichotomyII;
        return rep;
    }

    // distance from x0 to the nearest domain edge bounds the sample radius
    double rmax = inf;
    if (d.spec.kind == ShapeKind::Annulus)
        rmax = d.spec.r_out - dist(x0, d.spec.center) - 2.0 * d.h;
    else
        for (int axis = 0; axis < 2; ++axis) {
            rmax = std::min(rmax, d.spec.hi[axis] - x0[axis] - 2.0 * d.h);
            rmax = std::min(rmax, x0[axis] - d.spec.lo[axis] - 2.0 * d.h);
        }
    std::vector<double> radii{0.5 * rmax, 0.7 * rmax, 0.9 * rmax};
    rep.blowdown = blowdown(u, radii, 64, x0);
    rep.a = rep.blowdown.a;
    double above = -inf, below = inf, above_dA = -inf, below_dA = inf;
    for (int n : d.active_ids) {
        double g = u[n] - dot(rep.a, d.coord(n));
        above = std::max(above, g);
        below = std::min(below, g);
        if (is_dA[n]) {
            above_dA = std::max(above_dA, g);
            below_dA = std::min(below_dA, g);
        }
    }
    rep.one_sided_margin =
        std::abs(above - above_dA) <= std::abs(below - below_dA) ? above : below;
    rep.max_regular_residual = off_hull_res;
    rep.cone_error_plus = above - above_dA;   // attainment gaps of u - a.x
    rep.cone_error_minus = below_dA - below;
    rep.result = EntireCase::TrichotomyIII;
    return rep;
}

}  // namespace maxarea
