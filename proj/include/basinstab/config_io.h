#pragma once

// JSON run configurations, dotted-path overrides and run manifests.
//
// Config schema (every key optional except "system"):
//   {
//     "system": "s1",
//     "params": {"gamma2": 0.95, ...},            merged onto the s?-ref preset
//     "domain": {"omega": [lo, hi], "amplitude": [lo, hi],
//                "initial_conditions": {"x": [lo, hi], ...}},
//     "mismatch": {"parameters": ["phi", ...], "relative_bound": 0.1},
//     "n_samples": 200000,
//     "grid": {"nx": 40, "ny": 40},
//     "sampling": "stratified" | "uniform",
//     "strict_paper_mode": false,
//     "integrator": {"method": "adaptive-rk45", "fixed_step": ..., "abs_tol": ...,
//                    "rel_tol": ..., "max_step": ..., "min_step": ...,
//                    "event_refinement_tol": ..., "bailout": ...},
//     "classifier": {"transient_periods": 500, "observation_periods": 200,
//                    "window_periods": 20, "periodicity_tol": 1e-3,
//                    "max_period_multiple": 16},
//     "seed": 1,
//     "output": {"dir": "out", "sample_log": false}
//   }

#include "basinstab/montecarlo.h"

#include "json.hpp"

#include <string>
#include <vector>

namespace basinstab {

// Config error carrying the JSON path of the offending value.
class ConfigPathError : public ConfigError {
public:
    ConfigPathError(std::string path, const std::string& message)
        : ConfigError(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

nlohmann::json params_to_json(const HarvesterModel& model);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Applies "a.b.c=value" to the JSON document. The value is parsed as JSON
// when possible, otherwise stored as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// FNV-1a 64-bit hash of the canonical config JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// Output file stem, e.g. "s1_b=0.10".
std::string output_stem(const RunConfig& config);

struct ManifestInfo {
    double wall_seconds = 0.0;
    int workers = 1;
    std::int64_t samples_done = 0;
    std::string started_at;
};

nlohmann::json make_manifest(const RunConfig& config, const ProbabilityGrid& grid, const ManifestInfo& info);

// Reconstructs the run config recorded in a manifest.
RunConfig config_from_manifest(const nlohmann::json& manifest);

const char* version_string();

}  // namespace basinstab
