#include "maxarea/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>

using namespace maxarea;
using io::json;

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "runs";
    double h = 0.0;  // 0 = use config/default
    bool quiet = false;
};

void add_common(CLI::App* app, CommonArgs& a) {
    app->set_help_flag("--help", "print this help message and exit");
    app->add_option("--config", a.config, "JSON configuration file");
    app->add_option("--out", a.out, "directory to place the run directory in");
    app->add_option("--h", a.h, "grid spacing override");
    app->add_flag("--quiet", a.quiet, "suppress progress output");
}

int max_threads() {
    if (const char* e = std::getenv("MAXAREA_THREADS")) {
        int v = std::atoi(e);
        if (v > 0) return v;
    }
    return 1;
}

/// Runs `body` inside a fresh run directory; writes the manifest in every
/// exit path and maps failures to exit code 1 (2 = converged with warnings).
int run_command(const std::string& name, const CommonArgs& args,
                const std::function<int(const std::string&, io::RunManifest&)>& body) {
    std::string dir;
    io::RunManifest m;
    m.command = name;
    try {
        dir = io::make_run_dir(args.out, name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    if (!args.quiet) std::cout << "run directory: " << dir << "\n";
    int code = 0;
    try {
        if (!args.config.empty()) m.config = io::read_json_file(args.config);
        code = body(dir, m);
    } catch (const std::exception& e) {
        m.error = e.what();
        code = 1;
        std::cerr << "error: " << e.what() << "\n";
    }
    m.exit_status = code;
    try {
        io::write_manifest(dir, m);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return code;
}

SolverConfig solver_from(const json& cfg) {
    if (cfg.is_object() && cfg.contains("solver"))
        return io::solver_config_from_json(cfg.at("solver"));
    return {};
}

DomainPtr domain_from(const json& cfg, double h_override) {
    const json& dj = cfg.at("domain");
    double h = h_override > 0.0 ? h_override : dj.at("h").get<double>();
    return make_domain(io::region_from_json(dj), h);
}

ScalarField field_from(const json& cfg, double h_override) {
    return io::read_field_csv(cfg.at("field").get<std::string>(),
                              domain_from(cfg, h_override));
}

/// Boundary data carried by the boundary values of a solved field.
BoundaryData trace_of(const ScalarField& u) {
    BoundaryData b;
    for (int n : u.domain->boundary_ids) b.overrides[n] = u[n];
    return b;
}

int cmd_solve(const CommonArgs& args) {
    return run_command("solve", args, [&](const std::string& dir,
                                          io::RunManifest& m) {
        if (args.config.empty()) throw DomainError("solve requires --config");
        SolverConfig cfg;
        DiscreteProblem prob = io::problem_from_json(m.config, &cfg);
        if (args.h > 0.0)
            prob = io::problem_from_json(
                [&] {
                    json j = m.config;
                    j["domain"]["h"] = args.h;
                    return j;
                }(),
                &cfg);
        auto [field, report] = solve(prob, cfg);
        io::write_field_csv(dir + "/field.csv", field);
        io::write_json_file(dir + "/report.json", io::report_to_json(report));
        io::write_plot_data(dir + "/field.dat", field);
        m.outputs = {dir + "/field.csv", dir + "/report.json", dir + "/field.dat"};
        for (const auto& s : report.stages)
            m.stages.push_back({{"delta", s.delta},
                                {"iterations", s.iterations},
                                {"stop_reason", s.stop_reason}});
        if (!args.quiet)
            std::cout << "energy " << report.final_energy << ", pg_norm "
                      << report.final_pg_norm << "\n";
        if (!report.converged) throw DomainError("solver did not converge");
        return report.warnings.empty() ? 0 : 2;
    });
}

int cmd_example_w(const CommonArgs& args) {
    return run_command("example-w", args, [&](const std::string& dir,
                                              io::RunManifest& m) {
        ExampleWConfig cfg;
        if (m.config.is_object()) {
            if (m.config.contains("k_schedule"))
                cfg.k_schedule = m.config.at("k_schedule").get<std::vector<int>>();
            cfg.h = m.config.value("h", cfg.h);
            cfg.bisection_tol = m.config.value("bisection_tol", cfg.bisection_tol);
            cfg.solver = solver_from(m.config);
        }
        if (args.h > 0.0) cfg.h = args.h;
        ExampleWResult r = build_example_w(cfg);
        json thetas = json::array();
        for (const auto& s : r.stages)
            thetas.push_back({{"k", s.k}, {"theta", s.theta}, {"w_e2", s.w_e2}});
        io::write_json_file(dir + "/theta_k.json", thetas);
        io::write_json_file(dir + "/example_w.json", io::example_w_to_json(r));
        io::write_field_csv(dir + "/w_window.csv", r.w_window);
        io::write_plot_data(dir + "/w_window.dat", r.w_window);
        m.outputs = {dir + "/theta_k.json", dir + "/example_w.json",
                     dir + "/w_window.csv", dir + "/w_window.dat"};
        for (const auto& s : r.stages) {
            std::string p = dir + "/w_k" + std::to_string(s.k) + ".csv";
            io::write_field_csv(p, s.field);
            m.outputs.push_back(p);
            m.stages.push_back({{"k", s.k},
                                {"theta", s.theta},
                                {"w_e2", s.w_e2},
                                {"solves", s.solves},
                                {"sup_diff_prev", s.sup_diff_prev}});
        }
        if (!args.quiet)
            std::cout << "theta(k=" << r.stages.back().k << ") = "
                      << r.stages.back().theta << ", w(2e2) = " << r.w_2e2 << "\n";
        return r.stabilization_warning ? 2 : 0;
    });
}

ExteriorProblem exterior_from(const json& cfg, double h_override) {
    ExteriorProblem p;
    if (cfg.contains("A")) {
        const json& a = cfg.at("A");
        if (a.contains("circle")) {
            InnerCircle c;
            c.center = {a.at("circle").at("center").at(0).get<double>(),
                        a.at("circle").at("center").at(1).get<double>()};
            c.r = a.at("circle").at("r").get<double>();
            p.A = c;
        } else {
            std::vector<Point> pts;
            for (const auto& q : a.at("points"))
                pts.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
            p.A = std::move(pts);
        }
    }
    if (cfg.contains("g")) p.g = io::generator_from_json(cfg.at("g"));
    std::string mode = cfg.value("mode", std::string("upper-cone"));
    if (mode == "upper-cone")
        p.mode = ExteriorMode::UpperCone;
    else if (mode == "lower-cone")
        p.mode = ExteriorMode::LowerCone;
    else if (mode == "hyperplane")
        p.mode = ExteriorMode::Hyperplane;
    else
        throw DomainError("unknown exterior mode \"" + mode + "\"");
    if (cfg.contains("x0"))
        p.x0 = {cfg.at("x0").at(0).get<double>(), cfg.at("x0").at(1).get<double>()};
    if (cfg.contains("a"))
        p.a = {cfg.at("a").at(0).get<double>(), cfg.at("a").at(1).get<double>()};
    if (cfg.contains("outer_schedule"))
        p.outer_schedule = cfg.at("outer_schedule").get<std::vector<double>>();
    p.h = cfg.value("h", p.h);
    if (h_override > 0.0) p.h = h_override;
    p.solver = solver_from(cfg);
    return p;
}

int cmd_exterior(const CommonArgs& args) {
    return run_command("exterior", args, [&](const std::string& dir,
                                             io::RunManifest& m) {
        if (args.config.empty()) throw DomainError("exterior requires --config");
        ExteriorProblem p = exterior_from(m.config, args.h);
        ExteriorResult r = solve_exterior(p);
        io::write_field_csv(dir + "/field.csv", r.field);
        io::write_plot_data(dir + "/field.dat", r.field);
        io::write_field_csv(dir + "/psi.csv", r.barrier.psi);
        io::write_json_file(dir + "/exterior.json", io::exterior_to_json(r));
        m.outputs = {dir + "/field.csv", dir + "/field.dat", dir + "/psi.csv",
                     dir + "/exterior.json"};
        for (const auto& s : r.stages)
            m.stages.push_back({{"outer", s.outer},
                                {"sup_diff_prev", s.sup_diff_prev},
                                {"wall_time_sec", s.report.wall_time_sec}});
        if (!args.quiet)
            std::cout << "trichotomy: " << to_string(r.trichotomy.result)
                      << ", barrier violation " << r.barrier_violation << "\n";
        bool warn = r.stabilization_warning;
        for (const auto& s : r.stages)
            warn = warn || !s.report.warnings.empty() || !s.report.converged;
        return warn ? 2 : 0;
    });
}

int cmd_classify(const CommonArgs& args) {
    return run_command("classify", args, [&](const std::string& dir,
                                             io::RunManifest& m) {
        if (args.config.empty()) throw DomainError("classify requires --config");
        ScalarField u = field_from(m.config, args.h);
        ClassificationReport r;
        std::string mode = m.config.value("mode", std::string("entire"));
        if (mode == "entire") {
            r = classify_entire(u, trace_of(u));
        } else if (mode == "exterior") {
            ExteriorProblem p = exterior_from(m.config, args.h);
            r = exterior_trichotomy(u, p.A, p.x0);
        } else {
            throw DomainError("unknown classify mode \"" + mode + "\"");
        }
        io::write_json_file(dir + "/classify.json", io::classification_to_json(r));
        m.outputs = {dir + "/classify.json"};
        if (!args.quiet) std::cout << "case: " << to_string(r.result) << "\n";
        return 0;
    });
}

int cmd_singular(const CommonArgs& args) {
    return run_command("singular", args, [&](const std::string& dir,
                                             io::RunManifest& m) {
        if (args.config.empty()) throw DomainError("singular requires --config");
        DomainPtr dom;
        BoundaryData phi;
        std::optional<ScalarField> u;
        if (m.config.contains("field")) {
            u = field_from(m.config, args.h);
            dom = u->domain;
            phi = trace_of(*u);
        } else {
            dom = domain_from(m.config, args.h);
            if (m.config.contains("boundary") &&
                m.config.at("boundary").contains("generator"))
                phi.generator =
                    io::generator_from_json(m.config.at("boundary").at("generator"));
        }
        double tol = m.config.value("tol", 2.0 * dom->h);
        SingularSet s = singular_set(dom, phi, tol);
        if (u) s = verify_ray_linearity(*u, std::move(s));
        io::write_json_file(dir + "/singular.json", io::singular_to_json(s));
        io::write_singular_csv(dir + "/singular.csv", s);
        m.outputs = {dir + "/singular.json", dir + "/singular.csv"};
        if (!args.quiet)
            std::cout << s.segments.size() << " light segment(s)\n";
        return 0;
    });
}

int cmd_blowdown(const CommonArgs& args) {
    return run_command("blowdown", args, [&](const std::string& dir,
                                             io::RunManifest& m) {
        if (args.config.empty()) throw DomainError("blowdown requires --config");
        ScalarField u = field_from(m.config, args.h);
        std::vector<double> radii =
            m.config.at("radii").get<std::vector<double>>();
        int samples = m.config.value("samples", 64);
        Point center{0.0, 0.0};
        if (m.config.contains("center"))
            center = {m.config.at("center").at(0).get<double>(),
                      m.config.at("center").at(1).get<double>()};
        BlowdownReport r = blowdown(u, radii, samples, center);
        io::write_json_file(dir + "/blowdown.json", io::blowdown_to_json(r));
        m.outputs = {dir + "/blowdown.json"};
        if (!args.quiet)
            std::cout << "model: " << io::blowdown_to_json(r)["model"] << "\n";
        return 0;
    });
}

int cmd_multiplicity(const CommonArgs& args) {
    return run_command("multiplicity", args, [&](const std::string& dir,
                                                 io::RunManifest& m) {
        double h = 0.1;
        int k = 8;
        if (m.config.is_object()) {
            h = m.config.value("h", h);
            k = m.config.value("k", k);
        }
        if (args.h > 0.0) h = args.h;
        MultiplicityReport r = multiplicity_demo(h, k);
        io::write_json_file(dir + "/multiplicity.json",
                            io::multiplicity_to_json(r));
        io::write_field_csv(dir + "/w.csv", r.w);
        io::write_field_csv(dir + "/w_tilde.csv", r.w_tilde);
        io::write_field_csv(dir + "/w_breve.csv", r.w_brv);
        m.outputs = {dir + "/multiplicity.json", dir + "/w.csv",
                     dir + "/w_tilde.csv", dir + "/w_breve.csv"};
        if (!args.quiet)
            std::cout << "pairwise min sup difference: " << r.pairwise_min_sup
                      << "\n";
        return 0;
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"area-maximizing weakly spacelike graphs: solver and analysis"};
    app.require_subcommand(1);
    (void)max_threads();  // solver is sequential; the cap is honored trivially

    struct Sub {
        const char* name;
        const char* desc;
        int (*fn)(const CommonArgs&);
    };
    const Sub subs[] = {
        {"solve", "solve a Dirichlet problem from a problem JSON", cmd_solve},
        {"example-w", "punctured-ball exhaustion of the singular example",
         cmd_example_w},
        {"exterior", "barrier-guided exterior-domain solve", cmd_exterior},
        {"classify", "classify a solved field (entire / exterior trichotomy)",
         cmd_classify},
        {"singular", "light-segment detection from boundary data", cmd_singular},
        {"blowdown", "blowdown model fit of a solved field", cmd_blowdown},
        {"multiplicity", "three distinct solutions over A = {0, e2}",
         cmd_multiplicity},
    };
    std::vector<std::pair<CommonArgs, int (*)(const CommonArgs&)>> runs(
        std::size(subs));
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        CLI::App* sc = app.add_subcommand(subs[i].name, subs[i].desc);
        add_common(sc, runs[i].first);
        runs[i].second = subs[i].fn;
        sc->callback([&, i] { std::exit(runs[i].second(runs[i].first)); });
    }
    CLI11_PARSE(app, argc, argv);
    return 0;
}
