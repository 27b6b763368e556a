#pragma once

#include "maxarea/pipelines.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace maxarea::io {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// --- JSON codecs -----------------------------------------------------------

json region_to_json(const RegionSpec& spec);
RegionSpec region_from_json(const json& j);

json generator_to_json(const Generator& g);
Generator generator_from_json(const json& j);

json solver_config_to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const json& j);

/// Problem file: {"domain": {"shape": ..., "h": ..., params},
///                "boundary": {"generator": {...}} or {"table": [[x,y,v],...]},
///                "pinned": [[x,y,v], ...], "config": {...}}.
/// Table/pinned points snap to the nearest boundary / active node.
DiscreteProblem problem_from_json(const json& j, SolverConfig* cfg_out = nullptr);

json report_to_json(const SolveReport& r);
json singular_to_json(const SingularSet& s);
json blowdown_to_json(const BlowdownReport& r);
json classification_to_json(const ClassificationReport& r);
json example_w_to_json(const ExampleWResult& r);
json exterior_to_json(const ExteriorResult& r);
json multiplicity_to_json(const MultiplicityReport& r);

// --- field files -----------------------------------------------------------

/// CSV with mandatory header "i,j,x,y,u"; one row per active node in node-id
/// order; 17 significant digits (bit round-trip).
void write_field_csv(const std::string& path, const ScalarField& u);
ScalarField read_field_csv(const std::string& path, DomainPtr domain);

/// Singular-set CSV: header "x1,y1,x2,y2,sign,residual".
void write_singular_csv(const std::string& path, const SingularSet& s);

/// gnuplot-style whitespace-separated "x y u" table, blank line per grid row.
void write_plot_data(const std::string& path, const ScalarField& u);

// --- run directories -------------------------------------------------------

struct RunManifest {
    std::string command;
    json config;
    std::string version = kVersion;
    json stages = json::array();
    std::vector<std::string> outputs;
    int exit_status = 0;
    std::string error;
};

/// Creates <base>/<command>-<UTC timestamp>-<random suffix>/ and returns it.
std::string make_run_dir(const std::string& base, const std::string& command);

/// Atomic: writes run.json.tmp in dir, then renames it to run.json.
void write_manifest(const std::string& dir, const RunManifest& m);

std::string read_text_file(const std::string& path);
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace maxarea::io
