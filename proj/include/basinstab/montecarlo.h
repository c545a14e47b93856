#pragma once

// Basin stability with parameter mismatch: every sample draws an excitation
// point, initial conditions and a perturbed parameter vector, integrates the
// model and classifies the steady state. Counts are aggregated per grid box.

#include "basinstab/classifier.h"
#include "basinstab/gridmap.h"
#include "basinstab/harvesters.h"
#include "basinstab/ode.h"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace basinstab {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnresolvableParameterName : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct MismatchSpec {
    std::vector<std::string> parameter_names;
    double relative_bound = 0.0;

    void validate(const HarvesterModel& model) const;
};

struct SampleDomain {
    Range omega;
    Range amplitude;
    // One entry per state component; unlisted components start at 0.
    std::vector<std::optional<Range>> ic_ranges;
};

enum class SamplingMode { Stratified, Uniform };

struct RunConfig {
    HarvesterModel reference;
    SampleDomain domain;
    MismatchSpec mismatch;
    std::int64_t n_samples = 200000;
    int nx = 40;
    int ny = 40;
    SamplingMode sampling = SamplingMode::Stratified;
    bool strict_paper_mode = false;
    IntegratorSettings integrator;
    ClassifierSettings classifier;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    bool sample_log = false;

    std::string system_id() const { return reference.system_id(); }
    std::size_t boxes() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    ProbabilityGrid empty_grid() const;

    // Throws ConfigError naming the violated invariant.
    void validate() const;
};

// Paper-style campaign defaults for a system: reference parameters, estimated
// excitation ranges, initial-condition box and mismatched parameter list.
RunConfig default_run_config(const std::string& system_id);

// Names of the state components, in integration order.
std::vector<std::string> state_names(const std::string& system_id);

// RNG stream tags; the stream key is (seed, sample index, tag).
enum class StreamTag : std::uint32_t { Excitation = 0, InitialState = 1, Mismatch = 2 };

struct Sample {
    std::int64_t index = 0;
    int omega_index = 0;
    int amplitude_index = 0;
    double omega = 0.0;
    double amplitude = 0.0;
    std::vector<double> initial_state;
    HarvesterModel params;
    Outcome outcome;
};

Sample draw_sample(const RunConfig& config, std::int64_t index);

// Integrates a drawn sample with the campaign settings and classifies it.
Outcome simulate_sample(const RunConfig& config, const Sample& sample);

// Integration only, exposed for diagnostics and tests.
TrajectorySummary simulate_trajectory(const HarvesterModel& params, std::span<const double> initial_state,
                                      const IntegratorSettings& integrator, int periods, double t_start = 0.0);

struct SampleRecord {
    std::int64_t index = 0;
    int omega_index = 0;
    int amplitude_index = 0;
    Outcome outcome;
};

struct CampaignOptions {
    int workers = 0;  // 0: OpenMP default
    std::int64_t begin = 0;
    std::int64_t end = -1;  // -1: config.n_samples
    bool keep_log = false;
    // Called after every `block` samples with (done, total) and the grid so far.
    std::int64_t block = 10000;
    std::function<void(std::int64_t, std::int64_t, const ProbabilityGrid&)> on_block;
};

struct CampaignResult {
    ProbabilityGrid grid;
    std::vector<SampleRecord> log;
    double wall_seconds = 0.0;
    int workers = 1;
};

// Parallel campaign over sample indices [begin, end). Results depend only on
// the config, never on the worker count or schedule.
CampaignResult run_campaign(const RunConfig& config, const CampaignOptions& options = {});

// Single-threaded reference implementation of run_campaign.
CampaignResult run_campaign_serial(const RunConfig& config, std::int64_t begin = 0, std::int64_t end = -1,
                                   bool keep_log = false);

void write_sample_log_csv(const std::vector<SampleRecord>& log, const RunConfig& config, std::ostream& out);

}  // namespace basinstab
