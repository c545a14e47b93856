#include "basinstab/config_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#ifndef BASINSTAB_VERSION
#define BASINSTAB_VERSION "0.0.0"
#endif

namespace basinstab {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path + "." + key;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigPathError(path, "expected a number");
    return j.get<double>();
}

std::int64_t as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigPathError(path, "expected an integer");
    return j.get<std::int64_t>();
}

Range as_range(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ConfigPathError(path, "expected [lo, hi]");
    Range r{as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
    if (!(r.lo < r.hi)) throw ConfigPathError(path, "range must satisfy lo < hi");
    return r;
}

const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigPathError(join(path, key), "unknown key");
    }
}

std::string format_bound(double b) {
    char buf[32];
    const double pct = b * 100.0;
    if (std::abs(pct - std::round(pct)) < 1e-9)
        std::snprintf(buf, sizeof buf, "%.2f", b);
    else
        std::snprintf(buf, sizeof buf, "%.3f", b);
    return buf;
}

// Maps a ConfigError raised by RunConfig::validate onto the JSON path of the
// field its message names.
[[noreturn]] void rethrow_with_path(const ConfigError& e) {
    const std::string msg = e.what();
    const auto sp = msg.find(' ');
    std::string head = msg.substr(0, sp);
    if (!head.empty() && head.back() == ':') head.pop_back();
    throw ConfigPathError("$." + head, sp == std::string::npos ? msg : msg.substr(sp + 1));
}

}  // namespace

const char* version_string() {
    return BASINSTAB_VERSION;
}

json params_to_json(const HarvesterModel& model) {
    json j = json::object();
    for (const auto& name : model.parameter_names()) j[name] = model.get(name);
    if (const auto* s4 = std::get_if<S4Params>(&model.params())) j["beta_exponent"] = s4->beta_exponent;
    return j;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["system"] = c.system_id();
    j["params"] = params_to_json(c.reference);
    json ics = json::object();
    const auto names = state_names(c.system_id());
    for (std::size_t k = 0; k < c.domain.ic_ranges.size(); ++k)
        if (c.domain.ic_ranges[k]) ics[names[k]] = {c.domain.ic_ranges[k]->lo, c.domain.ic_ranges[k]->hi};
    j["domain"] = {{"omega", {c.domain.omega.lo, c.domain.omega.hi}},
                   {"amplitude", {c.domain.amplitude.lo, c.domain.amplitude.hi}},
                   {"initial_conditions", ics}};
    j["mismatch"] = {{"parameters", c.mismatch.parameter_names}, {"relative_bound", c.mismatch.relative_bound}};
    j["n_samples"] = c.n_samples;
    j["grid"] = {{"nx", c.nx}, {"ny", c.ny}};
    j["sampling"] = c.sampling == SamplingMode::Stratified ? "stratified" : "uniform";
    j["strict_paper_mode"] = c.strict_paper_mode;
    j["integrator"] = {{"method", to_string(c.integrator.method)},
                       {"fixed_step", c.integrator.fixed_step},
                       {"abs_tol", c.integrator.abs_tol},
                       {"rel_tol", c.integrator.rel_tol},
                       {"max_step", c.integrator.max_step},
                       {"min_step", c.integrator.min_step},
                       {"event_refinement_tol", c.integrator.event_refinement_tol},
                       {"bailout", c.integrator.bailout}};
    j["classifier"] = {{"transient_periods", c.classifier.transient_periods},
                       {"observation_periods", c.classifier.observation_periods},
                       {"window_periods", c.classifier.window_periods},
                       {"periodicity_tol", c.classifier.periodicity_tol},
                       {"max_period_multiple", c.classifier.max_period_multiple}};
    j["seed"] = c.seed;
    j["output"] = {{"dir", c.output_dir}, {"sample_log", c.sample_log}};
    return j;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigPathError("$", "config must be a JSON object");
    reject_unknown(j, "$",
                   {"system", "params", "domain", "mismatch", "n_samples", "grid", "sampling", "strict_paper_mode",
                    "integrator", "classifier", "seed", "output"});
    const json* sys = find(j, "system");
    if (!sys || !sys->is_string()) throw ConfigPathError("$.system", "expected one of s1|s2|s3|s4");
    const std::string id = sys->get<std::string>();
    if (id != "s1" && id != "s2" && id != "s3" && id != "s4")
        throw ConfigPathError("$.system", "expected one of s1|s2|s3|s4, got '" + id + "'");

    RunConfig c = default_run_config(id);

    if (const json* p = find(j, "params")) {
        if (!p->is_object()) throw ConfigPathError("$.params", "expected an object");
        for (const auto& [name, value] : p->items()) {
            const std::string path = join("$.params", name);
            if (name == "beta_exponent" && id == "s4") {
                std::get<S4Params>(c.reference.params()).beta_exponent = static_cast<int>(as_integer(value, path));
                continue;
            }
            if (!c.reference.has(name)) throw ConfigPathError(path, "unknown parameter for " + id);
            c.reference.set(name, as_number(value, path));
        }
        try {
            c.reference.validate();
        } catch (const std::exception& e) {
            // Messages start with "sN.name"; point at that parameter.
            const std::string msg = e.what();
            const auto dot = msg.find('.');
            const auto sp = msg.find(' ');
            std::string path = "$.params";
            if (dot != std::string::npos && sp != std::string::npos && dot < sp)
                path += "." + msg.substr(dot + 1, sp - dot - 1);
            throw ConfigPathError(path, msg);
        }
    }

    if (const json* d = find(j, "domain")) {
        reject_unknown(*d, "$.domain", {"omega", "amplitude", "initial_conditions"});
        if (const json* r = find(*d, "omega")) c.domain.omega = as_range(*r, "$.domain.omega");
        if (const json* r = find(*d, "amplitude")) c.domain.amplitude = as_range(*r, "$.domain.amplitude");
        if (const json* ics = find(*d, "initial_conditions")) {
            if (!ics->is_object()) throw ConfigPathError("$.domain.initial_conditions", "expected an object");
            const auto names = state_names(id);
            c.domain.ic_ranges.assign(names.size(), std::nullopt);
            for (const auto& [name, value] : ics->items()) {
                const std::string path = join("$.domain.initial_conditions", name);
                const auto it = std::find(names.begin(), names.end(), name);
                if (it == names.end()) throw ConfigPathError(path, "unknown state component for " + id);
                c.domain.ic_ranges[static_cast<std::size_t>(it - names.begin())] = as_range(value, path);
            }
        }
    }

    if (const json* m = find(j, "mismatch")) {
        reject_unknown(*m, "$.mismatch", {"parameters", "relative_bound"});
        if (const json* names = find(*m, "parameters")) {
            if (!names->is_array()) throw ConfigPathError("$.mismatch.parameters", "expected an array of names");
            c.mismatch.parameter_names.clear();
            for (std::size_t k = 0; k < names->size(); ++k) {
                const std::string path = "$.mismatch.parameters[" + std::to_string(k) + "]";
                if (!(*names)[k].is_string()) throw ConfigPathError(path, "expected a string");
                const auto name = (*names)[k].get<std::string>();
                if (!c.reference.has(name)) throw ConfigPathError(path, "'" + name + "' is not a parameter of " + id);
                c.mismatch.parameter_names.push_back(name);
            }
        }
        if (const json* b = find(*m, "relative_bound")) {
            c.mismatch.relative_bound = as_number(*b, "$.mismatch.relative_bound");
            if (!(c.mismatch.relative_bound >= 0.0 && c.mismatch.relative_bound < 0.5))
                throw ConfigPathError("$.mismatch.relative_bound", "must lie in [0, 0.5)");
        }
    }

    if (const json* n = find(j, "n_samples")) c.n_samples = as_integer(*n, "$.n_samples");
    if (const json* g = find(j, "grid")) {
        reject_unknown(*g, "$.grid", {"nx", "ny"});
        if (const json* v = find(*g, "nx")) c.nx = static_cast<int>(as_integer(*v, "$.grid.nx"));
        if (const json* v = find(*g, "ny")) c.ny = static_cast<int>(as_integer(*v, "$.grid.ny"));
    }
    if (const json* s = find(j, "sampling")) {
        if (*s == "stratified")
            c.sampling = SamplingMode::Stratified;
        else if (*s == "uniform")
            c.sampling = SamplingMode::Uniform;
        else
            throw ConfigPathError("$.sampling", "expected \"stratified\" or \"uniform\"");
    }
    if (const json* s = find(j, "strict_paper_mode")) {
        if (!s->is_boolean()) throw ConfigPathError("$.strict_paper_mode", "expected a boolean");
        c.strict_paper_mode = s->get<bool>();
    }
    if (const json* in = find(j, "integrator")) {
        reject_unknown(*in, "$.integrator",
                       {"method", "fixed_step", "abs_tol", "rel_tol", "max_step", "min_step", "event_refinement_tol",
                        "bailout"});
        auto& s = c.integrator;
        if (const json* v = find(*in, "method")) {
            if (!v->is_string()) throw ConfigPathError("$.integrator.method", "expected a string");
            try {
                s.method = integration_method_from_string(v->get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw ConfigPathError("$.integrator.method", e.what());
            }
        }
        const std::pair<const char*, double*> fields[] = {{"fixed_step", &s.fixed_step},
                                                          {"abs_tol", &s.abs_tol},
                                                          {"rel_tol", &s.rel_tol},
                                                          {"max_step", &s.max_step},
                                                          {"min_step", &s.min_step},
                                                          {"event_refinement_tol", &s.event_refinement_tol},
                                                          {"bailout", &s.bailout}};
        for (const auto& [key, dst] : fields)
            if (const json* v = find(*in, key)) *dst = as_number(*v, join("$.integrator", key));
    }
    if (const json* cl = find(j, "classifier")) {
        reject_unknown(*cl, "$.classifier",
                       {"transient_periods", "observation_periods", "window_periods", "periodicity_tol",
                        "max_period_multiple"});
        auto& s = c.classifier;
        const std::pair<const char*, int*> ints[] = {{"transient_periods", &s.transient_periods},
                                                     {"observation_periods", &s.observation_periods},
                                                     {"window_periods", &s.window_periods},
                                                     {"max_period_multiple", &s.max_period_multiple}};
        for (const auto& [key, dst] : ints)
            if (const json* v = find(*cl, key)) *dst = static_cast<int>(as_integer(*v, join("$.classifier", key)));
        if (const json* v = find(*cl, "periodicity_tol"))
            s.periodicity_tol = as_number(*v, "$.classifier.periodicity_tol");
    }
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
            throw ConfigPathError("$.seed", "expected a non-negative integer");
        c.seed = s->get<std::uint64_t>();
    }
    if (const json* o = find(j, "output")) {
        reject_unknown(*o, "$.output", {"dir", "sample_log"});
        if (const json* v = find(*o, "dir")) {
            if (!v->is_string()) throw ConfigPathError("$.output.dir", "expected a string");
            c.output_dir = v->get<std::string>();
        }
        if (const json* v = find(*o, "sample_log")) {
            if (!v->is_boolean()) throw ConfigPathError("$.output.sample_log", "expected a boolean");
            c.sample_log = v->get<bool>();
        }
    }

    try {
        c.validate();
    } catch (const ConfigPathError&) {
        throw;
    } catch (const ConfigError& e) {
        rethrow_with_path(e);
    }
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigPathError("$", "override '" + assignment + "' is not of the form key.path=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &doc;
    std::string path = "$";
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigPathError(path, "empty component in override key '" + key + "'");
        path += "." + part;
        if (!node->is_object()) throw ConfigPathError(path, "parent is not an object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigPathError("$", "cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigPathError("$", std::string("invalid JSON: ") + e.what());
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

std::string config_hash(const RunConfig& config) {
    json j = config_to_json(config);
    j.erase("output");
    const std::string canonical = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string output_stem(const RunConfig& config) {
    return config.system_id() + "_b=" + format_bound(config.mismatch.relative_bound);
}

json make_manifest(const RunConfig& config, const ProbabilityGrid& grid, const ManifestInfo& info) {
    std::int64_t cross = 0, periodic = 0, undetermined = 0, diverged = 0;
    for (std::size_t k = 0; k < grid.boxes(); ++k) {
        cross += grid.crosswell_counts[k];
        periodic += grid.crosswell_periodic_counts[k];
        undetermined += grid.undetermined_counts[k];
        diverged += grid.diverged_counts[k];
    }
    json m;
    m["tool"] = "basinstab";
    m["version"] = version_string();
    m["config"] = config_to_json(config);
    m["config_hash"] = config_hash(config);
    m["seed"] = config.seed;
    m["tag"] = "b=" + format_bound(config.mismatch.relative_bound);
    m["workers"] = info.workers;
    m["wall_seconds"] = info.wall_seconds;
    m["samples_done"] = info.samples_done;
    m["started_at"] = info.started_at;
    m["counts"] = {{"total", grid.total()},
                   {"cross_well", cross},
                   {"cross_well_periodic", periodic},
                   {"cross_well_aperiodic", cross - periodic},
                   {"undetermined", undetermined},
                   {"diverged", diverged}};
    m["notes"] = {
        {"domain_ranges_are_estimates", true},
        {"integration", "explicit Runge-Kutta; max_step and fixed_step are fractions of the forcing period; "
                        "piecewise models switch branch at bisection-refined surface crossings"},
        {"classification", "cross_well iff every window_periods-long run of observed periods spans both well "
                           "thresholds; undetermined and diverged count as not cross-well"},
        {"thresholds", {{"left", config.reference.wells().left_bound},
                        {"unstable", config.reference.wells().unstable_point},
                        {"right", config.reference.wells().right_bound}}},
        {"rng", "Philox4x32-10 keyed by (seed, sample index, stream tag)"}};
    return m;
}

RunConfig config_from_manifest(const json& manifest) {
    const auto it = manifest.find("config");
    if (it == manifest.end()) throw ConfigPathError("$.config", "manifest has no config section");
    return config_from_json(*it);
}

}  // namespace basinstab
