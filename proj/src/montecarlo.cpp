#include "basinstab/montecarlo.h"

#include "basinstab/philox.h"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <ostream>
#include <set>

namespace basinstab {

namespace {

using Clock = std::chrono::steady_clock;

ConfigError config_error(const std::string& what) {
    return ConfigError(what);
}

template <class System>
TrajectorySummary integrate_system(const System& sys, std::span<const double> y0, const IntegratorSettings& s,
                                   int periods, double omega, double t_start) {
    typename System::State y{};
    if (y0.size() != System::kDimension)
        throw std::invalid_argument("initial state has " + std::to_string(y0.size()) + " components, model needs " +
                                    std::to_string(System::kDimension));
    std::copy(y0.begin(), y0.end(), y.begin());
    return integrate_periods(sys, y, omega, periods, s, t_start);
}

struct Classified {
    int omega_index = 0;
    int amplitude_index = 0;
    Outcome outcome;
};

Classified run_one(const RunConfig& config, const WellGeometry& wells, std::int64_t index) {
    Classified c;
    try {
        const Sample s = draw_sample(config, index);
        c.omega_index = s.omega_index;
        c.amplitude_index = s.amplitude_index;
        const auto traj = simulate_trajectory(s.params, s.initial_state, config.integrator,
                                              config.classifier.total_periods());
        c.outcome = classify(traj, wells, config.classifier);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        c.outcome = {OutcomeLabel::Undetermined, {}, {}};
    }
    return c;
}

std::int64_t resolve_end(const RunConfig& config, std::int64_t end) {
    return end < 0 ? config.n_samples : std::min(end, config.n_samples);
}

}  // namespace

void MismatchSpec::validate(const HarvesterModel& model) const {
    if (!(relative_bound >= 0.0 && relative_bound < 0.5))
        throw config_error("mismatch.relative_bound must lie in [0, 0.5)");
    std::set<std::string> seen;
    for (const auto& name : parameter_names) {
        if (!seen.insert(name).second) throw config_error("mismatch.parameters: duplicate name '" + name + "'");
        if (!model.has(name))
            throw UnresolvableParameterName("mismatch.parameters: '" + name + "' is not a parameter of " +
                                            model.system_id());
        if (name == model.frequency_name() || name == model.amplitude_name())
            throw config_error("mismatch.parameters: excitation parameter '" + name + "' is sampled over the domain");
    }
}

ProbabilityGrid RunConfig::empty_grid() const {
    auto g = ProbabilityGrid::uniform(nx, ny, domain.omega, domain.amplitude);
    g.metadata.system_id = system_id();
    g.metadata.seed = seed;
    g.metadata.relative_bound = mismatch.relative_bound;
    return g;
}

void RunConfig::validate() const {
    try {
        reference.validate();
        (void)reference.wells();
    } catch (const std::exception& e) {
        throw config_error(std::string("params: ") + e.what());
    }
    if (!(domain.omega.lo > 0.0 && domain.omega.lo < domain.omega.hi))
        throw config_error("domain.omega must satisfy 0 < lo < hi");
    if (!(domain.amplitude.lo < domain.amplitude.hi)) throw config_error("domain.amplitude must satisfy lo < hi");
    if (domain.ic_ranges.size() != reference.dimension())
        throw config_error("domain.initial_conditions must describe " + std::to_string(reference.dimension()) +
                           " state components");
    for (std::size_t k = 0; k < domain.ic_ranges.size(); ++k)
        if (domain.ic_ranges[k] && !(domain.ic_ranges[k]->lo < domain.ic_ranges[k]->hi))
            throw config_error("domain.initial_conditions." + state_names(system_id())[k] + " must satisfy lo < hi");
    mismatch.validate(reference);
    if (n_samples < 1) throw config_error("n_samples must be >= 1");
    if (nx < 1 || ny < 1) throw config_error("grid.nx and grid.ny must be >= 1");
    if (strict_paper_mode) {
        if (sampling != SamplingMode::Stratified) throw config_error("strict_paper_mode requires stratified sampling");
        const auto per_box = static_cast<std::int64_t>(boxes()) * 100;
        if (n_samples < per_box)
            throw config_error("strict_paper_mode requires n_samples >= 100 * nx * ny (" + std::to_string(per_box) +
                               ")");
        if (n_samples % static_cast<std::int64_t>(boxes()) != 0)
            throw config_error("strict_paper_mode requires n_samples divisible by nx * ny");
    }
    try {
        integrator.validate();
        classifier.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
}

std::vector<std::string> state_names(const std::string& system_id) {
    if (system_id == "s1") return {"x", "dx", "dq"};
    if (system_id == "s2") return {"X", "dX", "Y", "dY", "I"};
    if (system_id == "s3") return {"y", "dy", "V"};
    if (system_id == "s4") return {"z1", "dz1", "z2", "dz2", "v1", "v2"};
    throw config_error("unknown system id '" + system_id + "'");
}

RunConfig default_run_config(const std::string& system_id) {
    RunConfig c;
    c.reference = HarvesterModel::reference(system_id);
    c.domain.ic_ranges.assign(c.reference.dimension(), std::nullopt);
    if (system_id == "s1") {
        c.domain.omega = {0.05, 1.0};
        c.domain.amplitude = {0.0, 2.0};
        c.domain.ic_ranges[0] = Range{-1.0, 1.0};
        c.domain.ic_ranges[1] = Range{-1.0, 1.0};
        c.mismatch.parameter_names = {"gamma2", "theta", "epsilon", "phi"};
    } else if (system_id == "s2") {
        c.domain.omega = {0.05, 1.0};
        c.domain.amplitude = {0.0, 1.0};
        c.domain.ic_ranges[0] = Range{-1.0, 1.0};
        c.domain.ic_ranges[1] = Range{-1.0, 1.0};
        c.mismatch.parameter_names = {"eta1", "eta2", "rho", "epsilon", "phi1", "phi2"};
    } else if (system_id == "s3") {
        c.domain.omega = {0.1, 2.0};
        c.domain.amplitude = {0.0, 1.0};
        c.domain.ic_ranges[0] = Range{-0.55, 2.0};
        c.domain.ic_ranges[1] = Range{-2.0, 2.0};
        c.mismatch.parameter_names = {"K", "kappa", "xi1", "xi2"};
    } else if (system_id == "s4") {
        c.domain.omega = {0.1, 2.0};
        c.domain.amplitude = {0.0, 1.0};
        c.domain.ic_ranges[0] = Range{-2.0, 2.0};
        c.domain.ic_ranges[2] = Range{-2.0, 2.0};
        c.mismatch.parameter_names = {"chi1", "chi2", "kappa1", "kappa2", "zeta1", "zeta2"};
    }
    return c;
}

Sample draw_sample(const RunConfig& config, std::int64_t index) {
    if (index < 0 || index >= config.n_samples)
        throw std::out_of_range("sample index " + std::to_string(index) + " outside [0, n_samples)");
    const auto idx = static_cast<std::uint64_t>(index);
    Sample s;
    s.index = index;

    const ProbabilityGrid edges = config.empty_grid();
    CounterRng excitation(config.seed, idx, static_cast<std::uint32_t>(StreamTag::Excitation));
    if (config.sampling == SamplingMode::Stratified) {
        const auto box = static_cast<std::size_t>(idx % config.boxes());
        s.omega_index = static_cast<int>(box % static_cast<std::size_t>(config.nx));
        s.amplitude_index = static_cast<int>(box / static_cast<std::size_t>(config.nx));
        s.omega = excitation.uniform(edges.omega_edges[s.omega_index], edges.omega_edges[s.omega_index + 1]);
        s.amplitude =
            excitation.uniform(edges.amplitude_edges[s.amplitude_index], edges.amplitude_edges[s.amplitude_index + 1]);
    } else {
        s.omega = excitation.uniform(config.domain.omega.lo, config.domain.omega.hi);
        s.amplitude = excitation.uniform(config.domain.amplitude.lo, config.domain.amplitude.hi);
        const auto box = edges.locate(s.omega, s.amplitude);
        s.omega_index = box->first;
        s.amplitude_index = box->second;
    }

    CounterRng ic(config.seed, idx, static_cast<std::uint32_t>(StreamTag::InitialState));
    s.initial_state.assign(config.reference.dimension(), 0.0);
    for (std::size_t k = 0; k < s.initial_state.size() && k < config.domain.ic_ranges.size(); ++k)
        if (const auto& r = config.domain.ic_ranges[k]) s.initial_state[k] = ic.uniform(r->lo, r->hi);

    s.params = config.reference;
    CounterRng mismatch(config.seed, idx, static_cast<std::uint32_t>(StreamTag::Mismatch));
    const double b = config.mismatch.relative_bound;
    for (const auto& name : config.mismatch.parameter_names) {
        if (!s.params.has(name))
            throw UnresolvableParameterName("mismatch parameter '" + name + "' is not a parameter of " +
                                            s.params.system_id());
        const double u = mismatch.uniform(-b, b);
        s.params.set(name, config.reference.get(name) * (1.0 + u));
    }
    s.params.set_excitation(s.omega, s.amplitude);
    return s;
}

TrajectorySummary simulate_trajectory(const HarvesterModel& params, std::span<const double> initial_state,
                                      const IntegratorSettings& integrator, int periods, double t_start) {
    const double omega = params.frequency();
    return params.visit([&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        const typename SystemFor<P>::type sys{p};
        return integrate_system(sys, initial_state, integrator, periods, omega, t_start);
    });
}

Outcome simulate_sample(const RunConfig& config, const Sample& sample) {
    const auto traj = simulate_trajectory(sample.params, sample.initial_state, config.integrator,
                                          config.classifier.total_periods());
    return classify(traj, config.reference.wells(), config.classifier);
}

CampaignResult run_campaign_serial(const RunConfig& config, std::int64_t begin, std::int64_t end, bool keep_log) {
    const auto t0 = Clock::now();
    end = resolve_end(config, end);
    const WellGeometry wells = config.reference.wells();
    CampaignResult result;
    result.grid = config.empty_grid();
    for (std::int64_t i = begin; i < end; ++i) {
        const Classified c = run_one(config, wells, i);
        result.grid.record(c.omega_index, c.amplitude_index, c.outcome);
        if (keep_log) result.log.push_back({i, c.omega_index, c.amplitude_index, c.outcome});
    }
    result.workers = 1;
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return result;
}

CampaignResult run_campaign(const RunConfig& config, const CampaignOptions& options) {
    const auto t0 = Clock::now();
    const std::int64_t end = resolve_end(config, options.end);
    const std::int64_t begin = std::clamp<std::int64_t>(options.begin, 0, end);
    const WellGeometry wells = config.reference.wells();
    const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();
    const std::int64_t block = std::max<std::int64_t>(1, options.block);

    CampaignResult result;
    result.grid = config.empty_grid();
    result.workers = workers;
    std::vector<Classified> batch;
    for (std::int64_t lo = begin; lo < end; lo += block) {
        const std::int64_t hi = std::min(end, lo + block);
        batch.assign(static_cast<std::size_t>(hi - lo), Classified{});
        bool config_failed = false;
        std::string config_message;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
        for (std::int64_t i = lo; i < hi; ++i) {
            try {
                batch[static_cast<std::size_t>(i - lo)] = run_one(config, wells, i);
            } catch (const std::exception& e) {
#pragma omp critical(basinstab_campaign_error)
                {
                    config_failed = true;
                    config_message = e.what();
                }
            }
        }
        if (config_failed) throw ConfigError(config_message);
        // Aggregate in index order; integer counts make the result schedule-independent.
        for (std::int64_t i = lo; i < hi; ++i) {
            const auto& c = batch[static_cast<std::size_t>(i - lo)];
            result.grid.record(c.omega_index, c.amplitude_index, c.outcome);
            if (options.keep_log) result.log.push_back({i, c.omega_index, c.amplitude_index, c.outcome});
        }
        if (options.on_block) options.on_block(hi - begin, end - begin, result.grid);
    }
    result.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return result;
}

void write_sample_log_csv(const std::vector<SampleRecord>& log, const RunConfig& config, std::ostream& out) {
    out << "# system=" << config.system_id() << " seed=" << config.seed << "\n";
    out << "index,box,omega_index,amplitude_index,outcome,periodic,period_multiple\n";
    for (const auto& r : log) {
        out << r.index << ',' << (static_cast<std::int64_t>(r.amplitude_index) * config.nx + r.omega_index) << ','
            << r.omega_index << ',' << r.amplitude_index << ',' << to_string(r.outcome.label) << ',';
        if (r.outcome.periodic) out << (*r.outcome.periodic ? "true" : "false");
        out << ',';
        if (r.outcome.period_multiple) out << *r.outcome.period_multiple;
        out << '\n';
    }
}

}  // namespace basinstab
