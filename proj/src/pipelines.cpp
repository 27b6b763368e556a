#include "maxarea/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxarea {

namespace {

DomainPtr theta_domain(int k, double h) {
    if (k < 2) throw DomainError("solve_theta: k must be >= 2");
    return make_domain(RegionSpec::punctured_ball({0.0, 0.0}, (double)k, {0.0, 0.0}), h);
}

BoundaryData theta_boundary(const GridDomain& d, double theta, int k) {
    BoundaryData b = BoundaryData::from_generator(
        Generator::theta_family(theta, (double)k));
    b.overrides[d.puncture_ids.front()] = 0.0;
    return b;
}

}  // namespace

namespace {

// Interpolates a solved coarse field onto a finer lattice of the same region;
// fine nodes outside coarse coverage (staircase fringe) copy their nearest
// coarse node.
ScalarField prolong(const ScalarField& coarse, DomainPtr fine) {
    ScalarField out(fine);
    for (int n : fine->active_ids) {
        Point x = fine->coord(n);
        if (coarse.domain->covers(x)) {
            out[n] = evaluate(coarse, x);
        } else {
            int m = coarse.domain->nearest_node(x);
            out[n] = m >= 0 ? coarse[m] : 0.0;
        }
    }
    return out;
}

// Warm-started solves skip the coarse continuation stages: globalization has
// already happened, only the stiff light-cone stages remain.
SolverConfig warm_config(const SolverConfig& cfg, const ScalarField& init) {
    SolverConfig c = cfg;
    std::vector<double> tail;
    for (double del : cfg.delta_schedule)
        if (del <= 1.1e-3) tail.push_back(del);
    if (!tail.empty()) c.delta_schedule = tail;
    c.init = InitMode::Custom;
    c.init_field = init;
    return c;
}

}  // namespace

std::pair<ScalarField, SolveReport> solve_theta(int k, double theta, double h,
                                                const SolverConfig& cfg,
                                                const ScalarField* warm_start) {
    if (theta < 0.0 || theta > 1.0)
        throw DomainError("solve_theta: theta must lie in [0,1]");
    DomainPtr dom = warm_start ? warm_start->domain : theta_domain(k, h);
    DiscreteProblem prob;
    prob.domain = dom;
    prob.boundary = theta_boundary(*dom, theta, k);
    if (warm_start) return solve(prob, warm_config(cfg, *warm_start));
    if (h < 0.09) {
        // cascadic continuation: globalize on the doubled spacing first
        auto [coarse, crep] = solve_theta(k, theta, 2.0 * h, cfg, nullptr);
        (void)crep;
        return solve(prob, warm_config(cfg, prolong(coarse, dom)));
    }
    return solve(prob, cfg);
}

FindThetaResult find_theta(int k, double h, double tol, const SolverConfig& cfg) {
    if (tol <= 0.0) throw DomainError("find_theta: tol must be positive");
    DomainPtr dom = theta_domain(k, h);
    const Point e2{0.0, 1.0};
    FindThetaResult out;
    ScalarField warm;
    bool have_warm = false;

    auto eval_theta = [&](double theta) {
        auto [field, rep] =
            solve_theta(k, theta, h, cfg, have_warm ? &warm : nullptr);
        warm = field;
        have_warm = true;
        ++out.solves;
        double v = evaluate(field, e2);
        out.samples.emplace_back(theta, v);
        out.field = std::move(field);
        return v;
    };

    double vlo = eval_theta(0.0);
    if (std::abs(vlo) <= tol) {
        out.theta = 0.0;
        out.w_e2 = vlo;
        return out;
    }
    double vhi = eval_theta(1.0);
    if (std::abs(vhi) <= tol) {
        out.theta = 1.0;
        out.w_e2 = vhi;
        return out;
    }
    if (vlo >= 0.0 || vhi <= 0.0)
        throw DomainError("find_theta: endpoint bracket failed (w(e2) = " +
                          std::to_string(vlo) + " at theta=0, " +
                          std::to_string(vhi) + " at theta=1)");
    const double noise = std::max(1e-7, 2.0 * cfg.stationarity_tol);
    // Illinois regula falsi: superlinear on this smooth monotone map, and each
    // iterate keeps the sign bracket so the monotonicity guard stays valid.
    double lo = 0.0, hi = 1.0;
    double glo = vlo, ghi = vhi;  // true sampled bracket values for the guard
    int side = 0;
    while (true) {
        double mid = (lo * vhi - hi * vlo) / (vhi - vlo);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        double vm = eval_theta(mid);
        if (vm < glo - noise || vm > ghi + noise)
            throw DomainError(
                "find_theta: theta -> w(e2) monotonicity violated beyond solver "
                "noise between theta=" + std::to_string(lo) + " and theta=" +
                std::to_string(hi));
        out.theta = mid;
        out.w_e2 = vm;
        if (std::abs(vm) <= tol) break;
        if (vm < 0.0) {
            if (side == -1) vhi *= 0.5;
            lo = mid;
            vlo = glo = vm;
            side = -1;
        } else {
            if (side == 1) vlo *= 0.5;
            hi = mid;
            vhi = ghi = vm;
            side = 1;
        }
        if (hi - lo < 1e-14) {
            out.warning = true;  // interval exhausted before |w(e2)| <= tol
            break;
        }
    }
    return out;
}

ExampleWResult build_example_w(const ExampleWConfig& config) {
    if (config.k_schedule.empty())
        throw DomainError("build_example_w: empty k schedule");
    for (std::size_t i = 0; i < config.k_schedule.size(); ++i) {
        if (config.k_schedule[i] < 2)
            throw DomainError("build_example_w: k must be >= 2");
        if (i > 0 && config.k_schedule[i] <= config.k_schedule[i - 1])
            throw DomainError("build_example_w: k schedule must increase");
    }
    ExampleWResult out;
    out.window = make_domain(
        RegionSpec::box(config.window_lo, config.window_hi), config.h);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ScalarField prev_window;
    double prev_diff = -1.0;
    for (int k : config.k_schedule) {
        auto ft = find_theta(k, config.h, config.bisection_tol, config.solver);
        ExampleWStage st;
        st.k = k;
        st.theta = ft.theta;
        st.w_e2 = ft.w_e2;
        st.solves = ft.solves;
        st.field = std::move(ft.field);
        // coarse stages may not reach the window corners (B_k can clip the
        // box); uncovered window nodes are NaN and skipped in comparisons
        ScalarField on_window(out.window, nan);
        for (int n : out.window->active_ids) {
            Point x = out.window->coord(n);
            if (st.field.domain->covers(x)) on_window[n] = evaluate(st.field, x);
        }
        if (prev_window.domain) {
            double sup = 0.0;
            for (int n : out.window->active_ids)
                if (!std::isnan(on_window[n]) && !std::isnan(prev_window[n]))
                    sup = std::max(sup,
                                   std::abs(on_window[n] - prev_window[n]));
            st.sup_diff_prev = sup;
            if (prev_diff >= 0.0 && sup > prev_diff + 1e-12)
                out.stabilization_warning = true;
            prev_diff = sup;
        }
        prev_window = on_window;
        out.w_window = std::move(on_window);
        out.stages.push_back(std::move(st));
    }
    const ScalarField& fine = out.stages.back().field;
    int kf = out.stages.back().k;
    double worst = 0.0;
    for (double t = -(double)(kf - 1); t <= 1e-12; t += config.h)
        worst = std::max(worst, std::abs(evaluate(fine, {0.0, t}) - t));
    out.ray_identity_error = worst;
    double one_sided = -std::numeric_limits<double>::infinity();
    for (int n : out.window->active_ids) {
        if (std::isnan(out.w_window[n])) continue;
        Point x = out.window->coord(n);
        one_sided = std::max(one_sided, out.w_window[n] - x[1]);
    }
    out.one_sided_max = one_sided;
    out.w_e2 = evaluate(fine, {0.0, 1.0});
    out.w_2e2 = evaluate(fine, {0.0, 2.0});
    return out;
}

namespace {

DomainPtr exterior_domain(const ExteriorProblem& p, double outer) {
    if (std::holds_alternative<InnerCircle>(p.A)) {
        const auto& c = std::get<InnerCircle>(p.A);
        return make_domain(RegionSpec::annulus(c.center, c.r, outer), p.h);
    }
    const auto& pts = std::get<std::vector<Point>>(p.A);
    return make_domain(RegionSpec::box_minus_points(
                           {-outer, -outer}, {outer, outer}, pts),
                       p.h);
}

std::vector<int> inner_nodes(const GridDomain& d, const ExteriorProblem& p) {
    std::vector<int> out;
    if (std::holds_alternative<InnerCircle>(p.A)) {
        const auto& c = std::get<InnerCircle>(p.A);
        double mid = 0.5 * (d.spec.r_in + d.spec.r_out);
        for (int n : d.boundary_ids)
            if (dist(d.coord(n), c.center) < mid) out.push_back(n);
    } else {
        out = d.puncture_ids;
    }
    return out;
}

double mode_shift(const ExteriorProblem& p, Point x) {
    switch (p.mode) {
        case ExteriorMode::UpperCone: return dist(x, p.x0);
        case ExteriorMode::LowerCone: return -dist(x, p.x0);
        case ExteriorMode::Hyperplane: return -dot(p.a, x);
    }
    return 0.0;
}

}  // namespace

BarrierResult barrier_psi(const ExteriorProblem& problem) {
    if (problem.mode == ExteriorMode::Hyperplane &&
        std::abs(norm2(problem.a) - 1.0) > 1e-9)
        throw DomainError("barrier_psi: |a| must equal 1 in hyperplane mode");
    if (problem.outer_schedule.empty())
        throw DomainError("barrier_psi: empty outer schedule");
    BarrierResult out;
    out.domain = exterior_domain(problem, problem.outer_schedule.back());
    const GridDomain& d = *out.domain;
    auto dA = inner_nodes(d, problem);
    if (dA.empty()) throw DomainError("barrier_psi: empty inner boundary");
    std::vector<std::pair<int, double>> seeds;
    double cp = -std::numeric_limits<double>::infinity();
    double cm = std::numeric_limits<double>::infinity();
    for (int n : dA) {
        Point x = d.coord(n);
        double g = problem.g(x);
        seeds.emplace_back(n, g);
        double q = g + mode_shift(problem, x);
        cp = std::max(cp, q);
        cm = std::min(cm, q);
    }
    auto ext = mcshane_extension(out.domain, seeds);
    if (!ext.grid_admissible)
        throw EmptyKError(
            "barrier_psi: empty K (inner data violates the Lipschitz bound at "
            "grid scale)");
    out.c_plus = cp;
    out.c_minus = cm;
    out.psi = std::move(ext.psi);
    for (int n : d.active_ids) {
        Point x = d.coord(n);
        double v = out.psi[n];
        switch (problem.mode) {
            case ExteriorMode::UpperCone:
                v = std::min(v, cp - dist(x, problem.x0));
                break;
            case ExteriorMode::LowerCone:
                v = std::max(v, cm + dist(x, problem.x0));
                break;
            case ExteriorMode::Hyperplane:
                v = std::max(std::min(v, cp + dot(problem.a, x)),
                             cm + dot(problem.a, x));
                break;
        }
        out.psi[n] = v;
    }
    out.max_grad_norm = check_weakly_spacelike(out.psi).max_grad_norm;
    return out;
}

ExteriorResult solve_exterior(const ExteriorProblem& problem) {
    ExteriorResult out;
    out.barrier = barrier_psi(problem);
    const GridDomain& big = *out.barrier.domain;
    ScalarField prev;
    double prev_diff = -1.0;
    for (std::size_t s = 0; s < problem.outer_schedule.size(); ++s) {
        double outer = problem.outer_schedule[s];
        DomainPtr dom = s + 1 == problem.outer_schedule.size()
                            ? out.barrier.domain
                            : exterior_domain(problem, outer);
        const GridDomain& d = *dom;
        auto dA = inner_nodes(d, problem);
        std::vector<std::uint8_t> is_dA(d.num_nodes(), 0);
        for (int n : dA) is_dA[n] = 1;
        DiscreteProblem prob;
        prob.domain = dom;
        for (int n : d.boundary_ids) {
            Point x = d.coord(n);
            if (is_dA[n]) {
                prob.boundary.overrides[n] = problem.g(x);
            } else {
                auto v = d.ij(n);
                prob.boundary.overrides[n] = out.barrier.psi[big.id(v[0], v[1])];
            }
        }
        SolverConfig cfg = problem.solver;
        if (s > 0) {
            // warm-started exhaustion stage: keep only the stiff tail
            std::vector<double> tail;
            for (double del : cfg.delta_schedule)
                if (del <= 1.1e-3) tail.push_back(del);
            if (!tail.empty()) cfg.delta_schedule = tail;
        }
        // warm start: previous stage where covered, Psi elsewhere
        cfg.init = InitMode::Custom;
        cfg.init_field = ScalarField(dom);
        for (int n : d.active_ids) {
            auto v = d.ij(n);
            double val = out.barrier.psi[big.id(v[0], v[1])];
            if (prev.domain && prev.domain->in_box(v[0], v[1])) {
                int m = prev.domain->id(v[0], v[1]);
                if (prev.domain->state[m]) val = prev[m];
            }
            cfg.init_field[n] = val;
        }
        auto [field, rep] = solve(prob, cfg);
        ExteriorStage st;
        st.outer = outer;
        st.report = rep;
        if (prev.domain) {
            double sup = 0.0;
            for (int n : prev.domain->active_ids) {
                auto v = prev.domain->ij(n);
                Point x = prev.domain->coord(n);
                if (x[0] < problem.window_lo[0] || x[0] > problem.window_hi[0] ||
                    x[1] < problem.window_lo[1] || x[1] > problem.window_hi[1])
                    continue;
                if (!d.in_box(v[0], v[1])) continue;
                int m = d.id(v[0], v[1]);
                if (!d.state[m]) continue;
                sup = std::max(sup, std::abs(field[m] - prev[n]));
            }
            st.sup_diff_prev = sup;
            if (prev_diff >= 0.0 && sup > prev_diff + 1e-12)
                out.stabilization_warning = true;
            prev_diff = sup;
        }
        prev = field;
        out.field = std::move(field);
        out.stages.push_back(std::move(st));
    }

    // barrier squeeze on the finest field
    const GridDomain& d = *out.field.domain;
    double viol = 0.0;
    for (int n : d.active_ids) {
        Point x = d.coord(n);
        double lo, hi;
        switch (problem.mode) {
            case ExteriorMode::UpperCone:
                lo = out.barrier.c_minus - dist(x, problem.x0);
                hi = out.barrier.c_plus - dist(x, problem.x0);
                break;
            case ExteriorMode::LowerCone:
                lo = out.barrier.c_minus + dist(x, problem.x0);
                hi = out.barrier.c_plus + dist(x, problem.x0);
                break;
            case ExteriorMode::Hyperplane:
            default:
                lo = out.barrier.c_minus + dot(problem.a, x);
                hi = out.barrier.c_plus + dot(problem.a, x);
                break;
        }
        viol = std::max(viol, std::max(lo - out.field[n], out.field[n] - hi));
    }
    out.barrier_violation = viol;
    out.trichotomy = exterior_trichotomy(out.field, problem.A, problem.x0);
    return out;
}

MultiplicityReport multiplicity_demo(double h, int k) {
    if (k < 4) throw DomainError("multiplicity_demo: k must be >= 4");
    MultiplicityReport out;

    ExampleWConfig wc;
    wc.h = h;
    wc.k_schedule.clear();
    for (int kk = 2; kk < k; kk *= 2) wc.k_schedule.push_back(kk);
    if (wc.k_schedule.empty() || wc.k_schedule.back() != k)
        wc.k_schedule.push_back(k);
    out.w_build = build_example_w(wc);

    ExteriorProblem ep;
    ep.A = std::vector<Point>{{0.0, 0.0}, {0.0, 1.0}};
    ep.g = Generator::constant(0.0);
    ep.mode = ExteriorMode::Hyperplane;
    ep.a = {0.0, 1.0};
    ep.h = h;
    ep.outer_schedule = {0.5 * k, 0.75 * k, (double)k};
    out.w_breve = solve_exterior(ep);

    out.window = out.w_build.window;
    const GridDomain& win = *out.window;
    const ScalarField& wf = out.w_build.stages.back().field;
    out.w = ScalarField(out.window);
    out.w_tilde = ScalarField(out.window);
    out.w_brv = ScalarField(out.window);
    for (int n : win.active_ids) {
        Point x = win.coord(n);
        out.w[n] = evaluate(wf, x);
        out.w_tilde[n] = -evaluate(wf, {x[0], 1.0 - x[1]});
        out.w_brv[n] = evaluate(out.w_breve.field, x);
    }
    out.w_2e2 = evaluate(wf, {0.0, 2.0});
    out.w_tilde_2e2 = -evaluate(wf, {0.0, -1.0});

    const ScalarField* fields[3] = {&out.w, &out.w_tilde, &out.w_brv};
    const char* names[3] = {"w", "w-tilde", "w-breve"};
    int n0 = win.nearest_node({0.0, 0.0});
    int n1 = win.nearest_node({0.0, 1.0});
    const double tol = 5.0 * h;
    out.max_grad_norm = 0.0;
    for (int f = 0; f < 3; ++f) {
        MultiplicityField mf;
        mf.name = names[f];
        const ScalarField& u = *fields[f];
        mf.at_origin = u[n0];
        mf.at_e2 = u[n1];
        const double inf = std::numeric_limits<double>::infinity();
        mf.min_minus_x2 = inf;
        mf.max_minus_x2 = -inf;
        for (int n : win.active_ids) {
            double g = u[n] - win.coord(n)[1];
            mf.min_minus_x2 = std::min(mf.min_minus_x2, g);
            mf.max_minus_x2 = std::max(mf.max_minus_x2, g);
        }
        mf.min_minus_x2_dA = std::min(u[n0] - 0.0, u[n1] - 1.0);
        mf.max_minus_x2_dA = std::max(u[n0] - 0.0, u[n1] - 1.0);
        mf.attains_min_on_dA = mf.min_minus_x2 >= mf.min_minus_x2_dA - tol;
        mf.attains_max_on_dA = mf.max_minus_x2 <= mf.max_minus_x2_dA + tol;
        out.fields[f] = mf;
        out.max_grad_norm =
            std::max(out.max_grad_norm, check_weakly_spacelike(u).max_grad_norm);
    }
    double min_sup = std::numeric_limits<double>::infinity();
    for (int f = 0; f < 3; ++f)
        for (int g = f + 1; g < 3; ++g) {
            double sup = 0.0;
            for (int n : win.active_ids)
                sup = std::max(sup,
                               std::abs((*fields[f])[n] - (*fields[g])[n]));
            min_sup = std::min(min_sup, sup);
        }
    out.pairwise_min_sup = min_sup;
    return out;
}

}  // namespace maxarea
