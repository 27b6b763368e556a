#include "maxarea/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace maxarea::io {

namespace fs = std::filesystem;

namespace {

json point_to_json(const Point& p) { return json::array({p[0], p[1]}); }

Point point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw DomainError("expected a 2-element coordinate array, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json model_name(BlowdownModel m) {
    switch (m) {
        case BlowdownModel::ConePlus: return "cone-plus";
        case BlowdownModel::ConeMinus: return "cone-minus";
        case BlowdownModel::Hyperplane: return "hyperplane";
        case BlowdownModel::Undetermined: return "undetermined";
    }
    return "undetermined";
}

}  // namespace

json region_to_json(const RegionSpec& s) {
    json j;
    switch (s.kind) {
        case ShapeKind::Ball:
            j["shape"] = "ball";
            j["center"] = point_to_json(s.center);
            j["radius"] = s.radius;
            break;
        case ShapeKind::Annulus:
            j["shape"] = "annulus";
            j["center"] = point_to_json(s.center);
            j["r_in"] = s.r_in;
            j["r_out"] = s.r_out;
            break;
        case ShapeKind::Box:
            j["shape"] = "box";
            j["lo"] = point_to_json(s.lo);
            j["hi"] = point_to_json(s.hi);
            break;
        case ShapeKind::BoxMinusPoints:
            j["shape"] = "box-minus-points";
            j["lo"] = point_to_json(s.lo);
            j["hi"] = point_to_json(s.hi);
            j["points"] = json::array();
            for (const auto& p : s.points) j["points"].push_back(point_to_json(p));
            break;
        case ShapeKind::PuncturedBall:
            j["shape"] = "punctured-ball";
            j["center"] = point_to_json(s.center);
            j["radius"] = s.radius;
            j["points"] = json::array();
            for (const auto& p : s.points) j["points"].push_back(point_to_json(p));
            break;
        case ShapeKind::Interval:
            j["shape"] = "interval";
            j["a"] = s.lo[0];
            j["b"] = s.hi[0];
            j["points"] = json::array();
            for (const auto& p : s.points) j["points"].push_back(p[0]);
            break;
    }
    return j;
}

RegionSpec region_from_json(const json& j) {
    std::string shape = j.at("shape").get<std::string>();
    if (shape == "ball")
        return RegionSpec::ball(point_from_json(j.at("center")),
                                j.at("radius").get<double>());
    if (shape == "annulus")
        return RegionSpec::annulus(point_from_json(j.at("center")),
                                   j.at("r_in").get<double>(),
                                   j.at("r_out").get<double>());
    if (shape == "box")
        return RegionSpec::box(point_from_json(j.at("lo")),
                               point_from_json(j.at("hi")));
    if (shape == "box-minus-points") {
        std::vector<Point> pts;
        for (const auto& p : j.at("points")) pts.push_back(point_from_json(p));
        return RegionSpec::box_minus_points(point_from_json(j.at("lo")),
                                            point_from_json(j.at("hi")),
                                            std::move(pts));
    }
    if (shape == "punctured-ball") {
        std::vector<Point> pts;
        if (j.contains("points"))
            for (const auto& p : j.at("points")) pts.push_back(point_from_json(p));
        else
            pts.push_back(point_from_json(j.at("puncture")));
        return RegionSpec::punctured_ball(point_from_json(j.at("center")),
                                          j.at("radius").get<double>(),
                                          std::move(pts));
    }
    if (shape == "interval") {
        std::vector<double> pts;
        if (j.contains("points"))
            for (const auto& p : j.at("points")) pts.push_back(p.get<double>());
        return RegionSpec::interval(j.at("a").get<double>(),
                                    j.at("b").get<double>(), std::move(pts));
    }
    throw DomainError("unknown shape \"" + shape + "\"");
}

json generator_to_json(const Generator& g) {
    json j;
    switch (g.kind) {
        case Generator::Kind::Constant:
            j["type"] = "constant";
            j["c"] = g.c;
            break;
        case Generator::Kind::Affine:
            j["type"] = "affine";
            j["a"] = point_to_json(g.a);
            j["c"] = g.c;
            break;
        case Generator::Kind::Cone:
            j["type"] = "cone";
            j["sign"] = g.sign;
            j["center"] = point_to_json(g.center);
            j["c"] = g.c;
            break;
        case Generator::Kind::Theta:
            j["type"] = "theta";
            j["theta"] = g.theta;
            j["k"] = g.k;
            break;
    }
    return j;
}

Generator generator_from_json(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "constant") return Generator::constant(j.at("c").get<double>());
    if (type == "affine")
        return Generator::affine(point_from_json(j.at("a")),
                                 j.value("c", 0.0));
    if (type == "cone")
        return Generator::cone(j.at("sign").get<double>(),
                               point_from_json(j.at("center")),
                               j.value("c", 0.0));
    if (type == "theta")
        return Generator::theta_family(j.at("theta").get<double>(),
                                       j.at("k").get<double>());
    throw DomainError("unknown generator type \"" + type + "\"");
}

json solver_config_to_json(const SolverConfig& cfg) {
    json j;
    j["delta_schedule"] = cfg.delta_schedule;
    j["max_iters"] = cfg.max_iters;
    j["stationarity_tol"] = cfg.stationarity_tol;
    j["energy_stall_tol"] = cfg.energy_stall_tol;
    return j;
}

SolverConfig solver_config_from_json(const json& j) {
    SolverConfig cfg;
    if (j.contains("delta_schedule"))
        cfg.delta_schedule = j.at("delta_schedule").get<std::vector<double>>();
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.stationarity_tol = j.value("stationarity_tol", cfg.stationarity_tol);
    cfg.energy_stall_tol = j.value("energy_stall_tol", cfg.energy_stall_tol);
    return cfg;
}

DiscreteProblem problem_from_json(const json& j, SolverConfig* cfg_out) {
    const json& dj = j.at("domain");
    RegionSpec spec = region_from_json(dj);
    double h = dj.at("h").get<double>();
    DiscreteProblem prob;
    prob.domain = make_domain(spec, h);
    if (j.contains("boundary")) {
        const json& bj = j.at("boundary");
        if (bj.contains("generator"))
            prob.boundary.generator = generator_from_json(bj.at("generator"));
        if (bj.contains("table")) {
            for (const auto& row : bj.at("table")) {
                Point x{row.at(0).get<double>(),
                        prob.domain->dim == 2 ? row.at(1).get<double>() : 0.0};
                double v = row.at(prob.domain->dim == 2 ? 2 : 1).get<double>();
                int n = prob.domain->nearest_node(x);
                if (n < 0 || !prob.domain->is_boundary(n))
                    throw DomainError("boundary table point (" + fmt17(x[0]) +
                                      ", " + fmt17(x[1]) +
                                      ") does not land on a boundary node");
                prob.boundary.overrides[n] = v;
            }
        }
    }
    if (j.contains("pinned")) {
        for (const auto& row : j.at("pinned")) {
            Point x{row.at(0).get<double>(),
                    prob.domain->dim == 2 ? row.at(1).get<double>() : 0.0};
            double v = row.at(prob.domain->dim == 2 ? 2 : 1).get<double>();
            int n = prob.domain->nearest_node(x);
            if (n < 0) throw DomainError("pinned point lands outside the domain");
            prob.pinned.emplace_back(n, v);
        }
    }
    if (cfg_out && j.contains("config"))
        *cfg_out = solver_config_from_json(j.at("config"));
    return prob;
}

json report_to_json(const SolveReport& r) {
    json j;
    j["final_energy"] = r.final_energy;
    j["final_pg_norm"] = r.final_pg_norm;
    j["max_grad_norm_free"] = r.max_grad_norm_free;
    j["max_grad_norm_all"] = r.max_grad_norm_all;
    j["wall_time_sec"] = r.wall_time_sec;
    j["converged"] = r.converged;
    j["warnings"] = r.warnings;
    j["stages"] = json::array();
    for (const auto& s : r.stages)
        j["stages"].push_back({{"delta", s.delta},
                               {"iterations", s.iterations},
                               {"pg_norm", s.pg_norm},
                               {"stop_reason", s.stop_reason}});
    return j;
}

json singular_to_json(const SingularSet& s) {
    json j;
    j["tol"] = s.tol;
    j["count"] = s.segments.size();
    j["segments"] = json::array();
    for (const auto& seg : s.segments) {
        json e;
        e["x"] = point_to_json(seg.x);
        e["y"] = point_to_json(seg.y);
        e["phi_x"] = seg.phi_x;
        e["phi_y"] = seg.phi_y;
        e["sign"] = seg.sign;
        e["equality_gap"] = seg.equality_gap;
        if (seg.linearity_residual >= 0.0) {
            e["linearity_residual"] = seg.linearity_residual;
            e["linearity_flagged"] = seg.linearity_flagged;
        }
        j["segments"].push_back(std::move(e));
    }
    return j;
}

json blowdown_to_json(const BlowdownReport& r) {
    json j;
    j["radii"] = r.radii;
    j["res_cone_plus"] = r.res_cone_plus;
    j["res_cone_minus"] = r.res_cone_minus;
    j["res_hyperplane"] = r.res_hyperplane;
    j["model"] = model_name(r.model);
    j["a"] = point_to_json(r.a);
    j["best_residual"] = r.best_residual;
    j["residual_decreasing"] = r.residual_decreasing;
    return j;
}

json classification_to_json(const ClassificationReport& r) {
    json j;
    j["case"] = to_string(r.result);
    j["a"] = point_to_json(r.a);
    j["side"] = r.side;
    j["max_regular_residual"] = r.max_regular_residual;
    j["cone_error_plus"] = r.cone_error_plus;
    j["cone_error_minus"] = r.cone_error_minus;
    j["one_sided_margin"] = r.one_sided_margin;
    j["half_ray_error"] = r.half_ray_error;
    j["hypothesis_not_maximal"] = r.hypothesis_not_maximal;
    j["sub_cone"] = {{"max", r.max_above},
                     {"min", r.min_above},
                     {"max_dA", r.max_above_dA},
                     {"min_dA", r.min_above_dA}};
    j["super_cone"] = {{"max", r.max_below},
                       {"min", r.min_below},
                       {"max_dA", r.max_below_dA},
                       {"min_dA", r.min_below_dA}};
    j["blowdown"] = blowdown_to_json(r.blowdown);
    return j;
}

json example_w_to_json(const ExampleWResult& r) {
    json j;
    j["stages"] = json::array();
    for (const auto& s : r.stages)
        j["stages"].push_back({{"k", s.k},
                               {"theta", s.theta},
                               {"w_e2", s.w_e2},
                               {"solves", s.solves},
                               {"sup_diff_prev", s.sup_diff_prev}});
    j["ray_identity_error"] = r.ray_identity_error;
    j["one_sided_max"] = r.one_sided_max;
    j["w_e2"] = r.w_e2;
    j["w_2e2"] = r.w_2e2;
    j["stabilization_warning"] = r.stabilization_warning;
    return j;
}

json exterior_to_json(const ExteriorResult& r) {
    json j;
    j["c_plus"] = r.barrier.c_plus;
    j["c_minus"] = r.barrier.c_minus;
    j["barrier_max_grad_norm"] = r.barrier.max_grad_norm;
    j["barrier_violation"] = r.barrier_violation;
    j["stabilization_warning"] = r.stabilization_warning;
    j["stages"] = json::array();
    for (const auto& s : r.stages)
        j["stages"].push_back({{"outer", s.outer},
                               {"sup_diff_prev", s.sup_diff_prev},
                               {"report", report_to_json(s.report)}});
    j["trichotomy"] = classification_to_json(r.trichotomy);
    return j;
}

json multiplicity_to_json(const MultiplicityReport& r) {
    json j;
    j["example_w"] = example_w_to_json(r.w_build);
    j["w_breve"] = exterior_to_json(r.w_breve);
    j["w_2e2"] = r.w_2e2;
    j["w_tilde_2e2"] = r.w_tilde_2e2;
    j["pairwise_min_sup"] = r.pairwise_min_sup;
    j["max_grad_norm"] = r.max_grad_norm;
    j["fields"] = json::array();
    for (const auto& f : r.fields)
        j["fields"].push_back({{"name", f.name},
                               {"at_origin", f.at_origin},
                               {"at_e2", f.at_e2},
                               {"min_minus_x2", f.min_minus_x2},
                               {"max_minus_x2", f.max_minus_x2},
                               {"min_minus_x2_dA", f.min_minus_x2_dA},
                               {"max_minus_x2_dA", f.max_minus_x2_dA},
                               {"attains_min_on_dA", f.attains_min_on_dA},
                               {"attains_max_on_dA", f.attains_max_on_dA}});
    return j;
}

void write_field_csv(const std::string& path, const ScalarField& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open " + path + " for writing");
    out << "i,j,x,y,u\n";
    const GridDomain& d = *u.domain;
    for (int n : d.active_ids) {
        auto v = d.ij(n);
        Point x = d.coord(n);
        out << v[0] << ',' << v[1] << ',' << fmt17(x[0]) << ',' << fmt17(x[1])
            << ',' << fmt17(u[n]) << '\n';
    }
    if (!out) throw DomainError("write failed for " + path);
}

ScalarField read_field_csv(const std::string& path, DomainPtr domain) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("i,j,x,y,u", 0) != 0)
        throw DomainError(path + ": missing mandatory header i,j,x,y,u");
    ScalarField u(domain);
    std::vector<std::uint8_t> seen(domain->num_nodes(), 0);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int i, j;
        double x, y, v;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &i, &j, &x, &y, &v) != 5)
            throw DomainError(path + ":" + std::to_string(lineno) +
                              ": malformed row");
        if (!domain->is_active(i, j))
            throw DomainError(path + ":" + std::to_string(lineno) +
                              ": node (" + std::to_string(i) + "," +
                              std::to_string(j) + ") is not active in the domain");
        int n = domain->id(i, j);
        u[n] = v;
        seen[n] = 1;
    }
    for (int n : domain->active_ids)
        if (!seen[n])
            throw DomainError(path + ": missing value for an active node");
    return u;
}

void write_singular_csv(const std::string& path, const SingularSet& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open " + path + " for writing");
    out << "x1,y1,x2,y2,sign,residual\n";
    for (const auto& seg : s.segments)
        out << fmt17(seg.x[0]) << ',' << fmt17(seg.x[1]) << ','
            << fmt17(seg.y[0]) << ',' << fmt17(seg.y[1]) << ',' << seg.sign
            << ',' << fmt17(seg.equality_gap) << '\n';
}

void write_plot_data(const std::string& path, const ScalarField& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open " + path + " for writing");
    const GridDomain& d = *u.domain;
    int last_j = INT32_MIN;
    for (int n : d.active_ids) {
        auto v = d.ij(n);
        if (last_j != INT32_MIN && v[1] != last_j) out << '\n';
        last_j = v[1];
        Point x = d.coord(n);
        out << fmt17(x[0]) << ' ' << fmt17(x[1]) << ' ' << fmt17(u[n]) << '\n';
    }
}

std::string make_run_dir(const std::string& base, const std::string& command) {
    using namespace std::chrono;
    auto now = time_point_cast<seconds>(system_clock::now());
    std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    std::random_device rd;
    for (int attempt = 0; attempt < 16; ++attempt) {
        char suffix[8];
        std::snprintf(suffix, sizeof suffix, "%04x", rd() & 0xffff);
        fs::path dir = fs::path(base) / (command + "-" + stamp + "-" + suffix);
        std::error_code ec;
        fs::create_directories(dir.parent_path(), ec);
        if (fs::create_directory(dir, ec)) return dir.string();
    }
    throw DomainError("could not create a run directory under " + base);
}

void write_manifest(const std::string& dir, const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["version"] = m.version;
    j["stages"] = m.stages;
    j["outputs"] = m.outputs;
    j["exit_status"] = m.exit_status;
    if (!m.error.empty()) j["error"] = m.error;
    fs::path tmp = fs::path(dir) / "run.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DomainError("cannot open " + tmp.string());
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, fs::path(dir) / "run.json");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t b = 0; b + 1 < e.byte && b < text.size(); ++b) {
            if (text[b] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw DomainError(path + ": parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace maxarea::io
