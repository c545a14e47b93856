// basinstab: Monte Carlo basin-stability campaigns for bistable harvesters.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 internal error.

#include "basinstab/config_io.h"
#include "basinstab/gridmap.h"
#include "basinstab/montecarlo.h"
#include "basinstab/render.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace basinstab;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kInternalError = 4 };

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int default_workers() {
    if (const char* env = std::getenv("BASINSTAB_WORKERS")) {
        try {
            return std::max(0, std::stoi(env));
        } catch (const std::exception&) {
            throw ConfigError(std::string("BASINSTAB_WORKERS must be an integer, got '") + env + "'");
        }
    }
    return 0;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigPathError("$", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigPathError("$", std::string("invalid JSON: ") + e.what());
    }
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
    std::string output_dir;
    int workers = -1;
    std::int64_t seed = -1;
    bool render = false;
    bool progress = false;
    std::int64_t checkpoint_every = 10000;
    bool resume = false;
    std::int64_t stop_after = -1;
};

json checkpoint_json(const std::string& hash, std::int64_t next, const ProbabilityGrid& grid,
                     const std::vector<SampleRecord>& log, bool keep_log) {
    json j;
    j["config_hash"] = hash;
    j["next_index"] = next;
    j["grid"] = json::parse(grid_to_json(grid));
    if (keep_log) {
        json rows = json::array();
        for (const auto& r : log)
            rows.push_back({r.index, r.omega_index, r.amplitude_index, static_cast<int>(r.outcome.label),
                            r.outcome.periodic ? json(*r.outcome.periodic) : json(nullptr),
                            r.outcome.period_multiple ? json(*r.outcome.period_multiple) : json(nullptr)});
        j["log"] = rows;
    }
    return j;
}

void restore_log(const json& rows, std::vector<SampleRecord>& log) {
    for (const auto& r : rows) {
        SampleRecord rec;
        rec.index = r[0].get<std::int64_t>();
        rec.omega_index = r[1].get<int>();
        rec.amplitude_index = r[2].get<int>();
        rec.outcome.label = static_cast<OutcomeLabel>(r[3].get<int>());
        if (!r[4].is_null()) rec.outcome.periodic = r[4].get<bool>();
        if (!r[5].is_null()) rec.outcome.period_multiple = r[5].get<int>();
        log.push_back(rec);
    }
}

int cmd_run(const RunArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) {
        config = load_config(args.config_path, args.overrides);
    } else {
        json doc = config_to_json(default_run_config(args.preset));
        for (const auto& o : args.overrides) apply_override(doc, o);
        config = config_from_json(doc);
    }
    if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.output_dir.empty()) config.output_dir = args.output_dir;
    const int workers = args.workers >= 0 ? args.workers : default_workers();

    const std::string hash = config_hash(config);
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    const std::string stem = output_stem(config);
    const fs::path incomplete = dir / (stem + ".incomplete");
    const fs::path checkpoint = dir / (stem + ".checkpoint.json");
    write_atomic(incomplete, "config_hash=" + hash + "\nstarted_at=" + utc_now() + "\n");

    ProbabilityGrid grid = config.empty_grid();
    std::vector<SampleRecord> log;
    std::int64_t next = 0;
    if (args.resume && fs::exists(checkpoint)) {
        const json cp = json::parse(read_file(checkpoint));
        if (cp.at("config_hash").get<std::string>() != hash)
            throw ConfigError("checkpoint " + checkpoint.string() + " belongs to a different config (hash " +
                              cp.at("config_hash").get<std::string>() + ", expected " + hash + ")");
        grid = grid_from_json(cp.at("grid").dump());
        next = cp.at("next_index").get<std::int64_t>();
        if (config.sample_log) {
            if (!cp.contains("log")) throw DataError("checkpoint has no sample log");
            restore_log(cp.at("log"), log);
        }
    }
    grid.metadata = {config.system_id(), config.seed, hash, config.mismatch.relative_bound};

    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const std::int64_t total = config.n_samples;
    std::int64_t last_percent = total > 0 ? next * 100 / total : 100;
    int used_workers = 1;

    const std::int64_t chunk = args.checkpoint_every > 0 ? args.checkpoint_every : total;
    const std::int64_t stop_at = args.stop_after >= 0 ? std::min(total, next + args.stop_after) : total;
    while (next < stop_at) {
        CampaignOptions opt;
        opt.workers = workers;
        opt.begin = next;
        opt.end = std::min(stop_at, next + chunk);
        opt.keep_log = config.sample_log;
        opt.block = std::max<std::int64_t>(1, total / 100);
        if (args.progress) {
            opt.on_block = [&, base = next](std::int64_t done, std::int64_t, const ProbabilityGrid&) {
                const std::int64_t global = base + done;
                const std::int64_t pct = global * 100 / total;
                if (pct == last_percent) return;
                last_percent = pct;
                const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::cerr << json{{"event", "progress"}, {"done", global}, {"total", total}, {"percent", pct},
                                  {"elapsed_s", elapsed}}
                                 .dump()
                          << std::endl;
            };
        }
        const CampaignResult part = run_campaign(config, opt);
        used_workers = part.workers;
        grid.merge(part.grid);
        log.insert(log.end(), part.log.begin(), part.log.end());
        next = opt.end;
        if (next < total) write_atomic(checkpoint, checkpoint_json(hash, next, grid, log, config.sample_log).dump());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (next < total) {
        write_atomic(checkpoint, checkpoint_json(hash, next, grid, log, config.sample_log).dump());
        std::cout << json{{"status", "incomplete"}, {"checkpoint", checkpoint.string()}, {"done", next},
                          {"total", total}}
                         .dump()
                  << std::endl;
        return kOk;
    }

    std::ostringstream csv;
    write_grid_csv(grid, csv);
    write_atomic(dir / (stem + ".grid.csv"), csv.str());
    write_atomic(dir / (stem + ".grid.json"), grid_to_json(grid));
    const json manifest = make_manifest(config, grid, {wall, used_workers, total, started});
    write_atomic(dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");
    if (config.sample_log) {
        std::ostringstream s;
        write_sample_log_csv(log, config, s);
        write_atomic(dir / (stem + ".samples.csv"), s.str());
    }
    if (args.render) {
        RenderOptions ro;
        ro.title = config.system_id() + " cross-well probability, b=" +
                   manifest.at("tag").get<std::string>().substr(2);
        write_atomic(dir / (stem + ".svg"), render_probability_svg(grid, ro));
    }
    fs::remove(checkpoint);
    fs::remove(incomplete);
    std::cout << json{{"output_stem", (dir / stem).string()},
                      {"config_hash", hash},
                      {"samples", total},
                      {"wall_seconds", wall},
                      {"workers", used_workers}}
                     .dump()
              << std::endl;
    return kOk;
}

// ---- diff / render / presets / validate ---------------------------------------

int cmd_diff(const std::string& a_path, const std::string& b_path, const std::string& out_prefix,
             std::int64_t min_samples) {
    const ProbabilityGrid a = load_grid(a_path);
    const ProbabilityGrid b = load_grid(b_path);
    if (!a.same_shape(b)) throw GridShapeMismatch("grids differ in shape or edges");
    const DifferenceMap diff = difference_map(a, b);
    json out;
    try {
        const ChangeSummary s = max_abs_change_detail(a, b, min_samples);
        out = {{"max_abs_change", s.max_abs_change},
               {"omega_index", s.omega_index},
               {"amplitude_index", s.amplitude_index},
               {"eligible_boxes", s.eligible_boxes},
               {"min_samples", min_samples}};
    } catch (const NoEligibleBoxes& e) {
        throw DataError(e.what());
    }
    if (!out_prefix.empty()) {
        std::ostringstream csv;
        csv << "# a: system=" << a.metadata.system_id << " seed=" << a.metadata.seed
            << " config_hash=" << a.metadata.config_hash << "\n";
        csv << "# b: system=" << b.metadata.system_id << " seed=" << b.metadata.seed
            << " config_hash=" << b.metadata.config_hash << "\n";
        write_difference_csv(diff, csv);
        const fs::path parent = fs::path(out_prefix).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        write_atomic(out_prefix + ".diff.csv", csv.str());
        RenderOptions ro;
        ro.title = "change in cross-well probability";
        write_atomic(out_prefix + ".diff.svg", render_difference_svg(diff, a.metadata, b.metadata, ro));
    }
    std::cout << out.dump() << std::endl;
    return kOk;
}

int cmd_render(const std::string& grid_path, std::string out_path, int cell_px, const std::string& title) {
    const ProbabilityGrid grid = load_grid(grid_path);
    RenderOptions ro;
    ro.cell_px = cell_px;
    ro.title = title;
    if (out_path.empty()) {
        fs::path p(grid_path);
        std::string s = p.string();
        for (const char* ext : {".grid.csv", ".grid.json", ".csv", ".json"}) {
            const std::string e(ext);
            if (s.size() > e.size() && s.compare(s.size() - e.size(), e.size(), e) == 0) {
                s.resize(s.size() - e.size());
                break;
            }
        }
        out_path = s + ".svg";
    }
    write_atomic(out_path, render_probability_svg(grid, ro));
    std::cout << out_path << std::endl;
    return kOk;
}

int cmd_presets(const std::string& name, bool as_config) {
    if (!name.empty()) {
        const HarvesterModel m = preset(name);
        if (as_config)
            std::cout << config_to_json(default_run_config(m.system_id())).dump(2) << std::endl;
        else
            std::cout << json{{"name", m.system_id() + "-ref"}, {"params", params_to_json(m)}}.dump(2) << std::endl;
        return kOk;
    }
    for (const auto& n : preset_names()) {
        const HarvesterModel m = preset(n);
        std::cout << n << " " << params_to_json(m).dump() << "\n";
    }
    return kOk;
}

int cmd_validate(const std::string& path, const std::vector<std::string>& overrides) {
    const RunConfig c = load_config(path, overrides);
    std::cout << json{{"valid", true},
                      {"system", c.system_id()},
                      {"config_hash", config_hash(c)},
                      {"output_stem", output_stem(c)},
                      {"n_samples", c.n_samples}}
                     .dump()
              << std::endl;
    return kOk;
}

int cmd_rerun(const std::string& manifest_path, const std::string& output_dir, int workers) {
    const json manifest = load_json_file(manifest_path);
    RunConfig c = config_from_manifest(manifest);
    const fs::path tmp = fs::path(output_dir.empty() ? "." : output_dir) / "manifest_config.json";
    fs::create_directories(tmp.parent_path());
    json doc = config_to_json(c);
    if (!output_dir.empty()) doc["output"]["dir"] = output_dir;
    write_atomic(tmp, doc.dump(2));
    RunArgs args;
    args.config_path = tmp.string();
    args.workers = workers;
    return cmd_run(args);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo basin stability of bistable energy harvesters under parameter mismatch"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a sampling campaign");
    auto* cfg_opt = run_cmd->add_option("-c,--config", run.config_path, "JSON run config");
    run_cmd->add_option("--preset", run.preset, "Start from a preset config (s1..s4) instead of a file")
        ->excludes(cfg_opt);
    run_cmd->add_option("-O,--override", run.overrides, "Dotted-path override, e.g. mismatch.relative_bound=0.1");
    run_cmd->add_option("-o,--output-dir", run.output_dir, "Output directory (overrides output.dir)");
    run_cmd->add_option("-w,--workers", run.workers, "Worker threads, 0 = all (default: $BASINSTAB_WORKERS or 0)");
    run_cmd->add_option("--seed", run.seed, "Seed override")->check(CLI::NonNegativeNumber);
    run_cmd->add_flag("--render", run.render, "Also write an SVG heatmap");
    run_cmd->add_flag("--progress", run.progress, "Print one JSON progress line per percent to stderr");
    run_cmd->add_option("--checkpoint-every", run.checkpoint_every, "Samples between checkpoints (0 = none)")
        ->capture_default_str();
    run_cmd->add_flag("--resume", run.resume, "Continue from an existing checkpoint");
    run_cmd->add_option("--stop-after", run.stop_after,
                        "Process at most N samples in this invocation, then checkpoint and exit");

    std::string rerun_manifest, rerun_out;
    int rerun_workers = -1;
    auto* rerun_cmd = app.add_subcommand("rerun", "Re-run the campaign recorded in a manifest");
    rerun_cmd->add_option("manifest", rerun_manifest, "Manifest JSON")->required();
    rerun_cmd->add_option("-o,--output-dir", rerun_out, "Output directory");
    rerun_cmd->add_option("-w,--workers", rerun_workers, "Worker threads");

    std::string diff_a, diff_b, diff_out;
    std::int64_t diff_min = 100;
    auto* diff_cmd = app.add_subcommand("diff", "Difference map b - a and max |change| statistic");
    diff_cmd->add_option("grid_a", diff_a, "Reference grid (.csv or .json)")->required();
    diff_cmd->add_option("grid_b", diff_b, "Compared grid (.csv or .json)")->required();
    diff_cmd->add_option("-o,--output", diff_out, "Output prefix for .diff.csv and .diff.svg");
    diff_cmd->add_option("--min-samples", diff_min, "Boxes with fewer samples in either grid are skipped")
        ->capture_default_str();

    std::string render_in, render_out, render_title;
    int render_cell = 12;
    auto* render_cmd = app.add_subcommand("render", "Render a grid file as an SVG heatmap");
    render_cmd->add_option("grid", render_in, "Grid (.csv or .json)")->required();
    render_cmd->add_option("-o,--output", render_out, "SVG path (default: next to the grid)");
    render_cmd->add_option("--cell-px", render_cell, "Pixels per box")->check(CLI::Range(1, 200));
    render_cmd->add_option("--title", render_title, "Title text");

    std::string presets_name;
    bool presets_config = false;
    auto* presets_cmd = app.add_subcommand("presets", "List reference parameter presets");
    presets_cmd->add_option("name", presets_name, "Show one preset (s1-ref..s4-ref)");
    presets_cmd->add_flag("--config", presets_config, "Print the preset's full run config instead");

    std::string validate_path;
    std::vector<std::string> validate_overrides;
    auto* validate_cmd = app.add_subcommand("validate", "Check a config file");
    validate_cmd->add_option("-c,--config,config", validate_path, "JSON run config")->required();
    validate_cmd->add_option("-O,--override", validate_overrides, "Dotted-path override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run_cmd) {
            if (run.config_path.empty() && run.preset.empty())
                throw ConfigError("run needs --config or --preset");
            return cmd_run(run);
        }
        if (*rerun_cmd) return cmd_rerun(rerun_manifest, rerun_out, rerun_workers);
        if (*diff_cmd) return cmd_diff(diff_a, diff_b, diff_out, diff_min);
        if (*render_cmd) return cmd_render(render_in, render_out, render_cell, render_title);
        if (*presets_cmd) return cmd_presets(presets_name, presets_config);
        if (*validate_cmd) return cmd_validate(validate_path, validate_overrides);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kConfigError;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kConfigError;
    } catch (const GridShapeMismatch& e) {
        std::cerr << "data error: GridShapeMismatch: " << e.what() << std::endl;
        return kDataError;
    } catch (const GridFormatError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return kDataError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << std::endl;
        return kInternalError;
    }
    return kInternalError;
}
