// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance --criterion 3            run one criterion
//   acceptance                          run 1..5
//   acceptance --criterion 6 --reduced  full-scale path at 1 sample per box
//   --scale s                           multiply sample counts (smoke runs)
//
// Exit status is 0 once every requested criterion has been evaluated; with
// --gate it is 1 when any of them failed. --verdicts appends the verdict lines
// to a file so a test run leaves a summary behind.

#include "basinstab/classifier.h"
#include "basinstab/config_io.h"
#include "basinstab/harvesters.h"
#include "basinstab/montecarlo.h"
#include "basinstab/ode.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace basinstab;
using nlohmann::json;

namespace {

struct Context {
    double scale = 1.0;
    int workers = 0;
    bool reduced = false;
    json report = json::object();
};

std::int64_t scaled(std::int64_t n, const Context& ctx, std::int64_t multiple = 1) {
    const auto s = static_cast<std::int64_t>(std::llround(static_cast<double>(n) * ctx.scale));
    return std::max<std::int64_t>(multiple, s / multiple * multiple);
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string g_verdict_file;

void verdict(int n, bool pass, const std::string& detail) {
    const std::string line = "criterion " + std::to_string(n) + ": " + (pass ? "PASS" : "FAIL") + "  " + detail;
    std::cout << line << std::endl;
    if (!g_verdict_file.empty()) std::ofstream(g_verdict_file, std::ios::app) << line << "\n";
}

void note(const std::string& line) {
    std::cout << "  " << line << std::endl;
}

ProbabilityGrid run(const RunConfig& c, const Context& ctx, const std::string& label) {
    CampaignOptions o;
    o.workers = ctx.workers;
    const auto r = run_campaign(c, o);
    note(label + ": " + std::to_string(c.n_samples) + " samples, " + fmt(r.wall_seconds, 1) + " s, " +
         std::to_string(r.workers) + " workers");
    return r.grid;
}

RunConfig tongue_config(double bound, int per_box, const Context& ctx) {
    RunConfig c = default_run_config("s1");
    c.domain.omega = {0.25, 0.35};
    c.domain.amplitude = {1.1, 1.5};
    c.nx = 10;
    c.ny = 10;
    c.n_samples = scaled(static_cast<std::int64_t>(per_box) * 100, ctx, 100);
    c.mismatch.relative_bound = bound;
    return c;
}

// ---- 1 ----------------------------------------------------------------------

bool criterion1(Context& ctx) {
    const RunConfig c = tongue_config(0.0, 100, ctx);
    const auto g = run(c, ctx, "S1 tongue, b=0");
    int high = 0;
    double lowest = 1.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double p = probability(g, i, j).value;
            high += p >= 0.95;
            lowest = std::min(lowest, p);
        }
    const double frac = high / static_cast<double>(g.boxes());
    const bool pass = frac >= 0.95;
    verdict(1, pass, "S1 tongue interior: " + fmt(100 * frac, 1) + "% of boxes with p >= 0.95 (need >= 95%); lowest box p = " +
                         fmt(lowest, 3));
    ctx.report["1"] = {{"fraction_high", frac}, {"lowest", lowest}, {"pass", pass}};
    return pass;
}

// ---- 2 ----------------------------------------------------------------------

RunConfig probe_config(double bound, const Context& ctx) {
    // The box of the default 40 x 40 S1 grid that contains (0.3, 1.25).
    RunConfig c = default_run_config("s1");
    const auto full = c.empty_grid();
    const auto box = full.locate(0.3, 1.25);
    c.domain.omega = {full.omega_edges[box->first], full.omega_edges[box->first + 1]};
    c.domain.amplitude = {full.amplitude_edges[box->second], full.amplitude_edges[box->second + 1]};
    c.nx = 1;
    c.ny = 1;
    c.n_samples = scaled(1000, ctx);
    c.mismatch.relative_bound = bound;
    return c;
}

bool criterion2(Context& ctx) {
    const RunConfig c0 = probe_config(0.0, ctx);
    note("probe box: omega [" + fmt(c0.domain.omega.lo) + ", " + fmt(c0.domain.omega.hi) + "), P [" +
         fmt(c0.domain.amplitude.lo) + ", " + fmt(c0.domain.amplitude.hi) + ")");
    const auto g0 = run(c0, ctx, "S1 probe, b=0");
    const auto g1 = run(probe_config(0.10, ctx), ctx, "S1 probe, b=0.10");
    const auto p0 = probability(g0, 0, 0);
    const auto p1 = probability(g1, 0, 0);
    const bool ok0 = std::abs(p0.value - 1.0) <= 0.05;
    const bool ok1 = p1.value >= 0.55 && p1.value <= 0.85;
    note("b=0:    p = " + fmt(p0.value) + " +/- " + fmt(p0.ci_halfwidth) + "  (need 1.0 +/- 0.05) " +
         (ok0 ? "ok" : "out of band"));
    note("b=0.10: p = " + fmt(p1.value) + " +/- " + fmt(p1.ci_halfwidth) + "  (need [0.55, 0.85]) " +
         (ok1 ? "ok" : "out of band"));
    note("b=0.10 cross-well periodic / aperiodic: " + std::to_string(g1.crosswell_periodic_counts[0]) + " / " +
         std::to_string(g1.crosswell_counts[0] - g1.crosswell_periodic_counts[0]) +
         ", undetermined " + std::to_string(g1.undetermined_counts[0]));
    const bool pass = ok0 && ok1;
    verdict(2, pass, "S1 erosion probe: p(b=0) = " + fmt(p0.value, 3) + ", p(b=0.10) = " + fmt(p1.value, 3));
    ctx.report["2"] = {{"p_b0", p0.value}, {"p_b10", p1.value}, {"pass", pass}};
    return pass;
}

// ---- 3 ----------------------------------------------------------------------

double desk_change(const std::string& id, Context& ctx) {
    RunConfig c = default_run_config(id);
    c.nx = 20;
    c.ny = 20;
    c.n_samples = scaled(100 * 400, ctx, 400);
    c.mismatch.relative_bound = 0.0;
    const auto a = run(c, ctx, id + " desk grid, b=0");
    c.mismatch.relative_bound = 0.10;
    const auto b = run(c, ctx, id + " desk grid, b=0.10");
    const auto min_samples = std::min<std::int64_t>(100, c.n_samples / 400);
    const auto s = max_abs_change_detail(a, b, min_samples);
    note(id + ": max |change| = " + fmt(s.max_abs_change, 3) + " at box (" + std::to_string(s.omega_index) + ", " +
         std::to_string(s.amplitude_index) + "), " + std::to_string(s.eligible_boxes) + " eligible boxes");
    return s.max_abs_change;
}

bool criterion3(Context& ctx) {
    const double s1 = desk_change("s1", ctx);
    const double s3 = desk_change("s3", ctx);
    const double s4 = desk_change("s4", ctx);
    const std::pair<const char*, std::pair<double, double>> rows[] = {
        {"S1", {s1, 0.75}}, {"S3", {s3, 0.23}}, {"S4", {s4, 0.30}}};
    for (const auto& [name, v] : rows)
        note(std::string(name) + ": " + fmt(v.first, 3) + " vs published " + fmt(v.second, 2) + " +/- 0.2 -> " +
             (std::abs(v.first - v.second) <= 0.2 ? "within" : "outside"));
    const bool pass = s3 < s1 && s4 < s1;
    verdict(3, pass, "mismatch-resilience ordering: S1 " + fmt(s1, 3) + ", S3 " + fmt(s3, 3) + ", S4 " + fmt(s4, 3) +
                         " (need S3 < S1 and S4 < S1)");
    ctx.report["3"] = {{"s1", s1}, {"s3", s3}, {"s4", s4}, {"pass", pass}};
    return pass;
}

// ---- 4 ----------------------------------------------------------------------

bool criterion4(Context& ctx) {
    const double bounds[] = {0.0, 0.025, 0.05, 0.10};
    std::vector<double> mean, se;
    for (double b : bounds) {
        const RunConfig c = tongue_config(b, 25, ctx);
        const auto g = run(c, ctx, "S1 tongue, b=" + fmt(b, 3));
        std::int64_t cross = 0;
        const std::int64_t n = g.total();
        for (auto v : g.crosswell_counts) cross += v;
        const double p = static_cast<double>(cross) / static_cast<double>(n);
        mean.push_back(p);
        se.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
        note("b=" + fmt(b, 3) + ": mean p = " + fmt(p) + " (se " + fmt(se.back(), 5) + ")");
    }
    bool pass = true;
    for (std::size_t k = 1; k < mean.size(); ++k) {
        const double allowance = 2.0 * std::hypot(se[k], se[k - 1]);
        if (mean[k] > mean[k - 1] + allowance) {
            pass = false;
            note("increase from b=" + fmt(bounds[k - 1], 3) + " to b=" + fmt(bounds[k], 3) + " exceeds 2 se");
        }
    }
    verdict(4, pass, "erosion monotonicity: mean p = " + fmt(mean[0], 3) + ", " + fmt(mean[1], 3) + ", " +
                         fmt(mean[2], 3) + ", " + fmt(mean[3], 3));
    ctx.report["4"] = {{"means", mean}, {"se", se}, {"pass", pass}};
    return pass;
}

// ---- 5 ----------------------------------------------------------------------

struct Oscillator {
    static constexpr std::size_t kDimension = 2;
    static constexpr std::size_t kWellIndex = 0;
    static constexpr bool kPiecewise = false;
    using State = StateArray<2>;
    State derivative(double, const State& y, Region) const { return {y[1], -y[0]}; }
};

IntegratorSettings fixed_rk4(double fraction) {
    IntegratorSettings s;
    s.method = IntegrationMethod::FixedRk4;
    s.fixed_step = fraction;
    return s;
}

TrajectorySummary from_amplitudes(const std::vector<double>& amp, double centre) {
    TrajectorySummary tr;
    tr.dimension = 1;
    for (double a : amp) {
        tr.period_min.push_back(centre - a);
        tr.period_max.push_back(centre + a);
        tr.strobe.push_back(a);
    }
    return tr;
}

bool criterion5(Context& ctx) {
    std::vector<std::pair<std::string, bool>> parts;

    // (a) RK4 order
    auto osc_err = [](double f) {
        const auto r = integrate_periods(Oscillator{}, {1.0, 0.0}, 1.0, 1, fixed_rk4(f));
        return std::hypot(r.state(0)[0] - 1.0, r.state(0)[1]);
    };
    const double factor = osc_err(1.0 / 50.0) / osc_err(1.0 / 100.0);
    parts.emplace_back("(a) RK4 order factor " + fmt(factor, 3), factor >= 12.0 && factor <= 20.0);

    // (b) S1 equilibria
    double worst = 0.0;
    for (double g : {0.6, 0.7, 0.8, 0.95}) {
        S1Params p;
        p.gamma1 = p.gamma2 = g;
        const auto w = well_geometry(p);
        const double x = std::sqrt(1.0 - g * g);
        worst = std::max({worst, std::abs(w.right_bound - x), std::abs(w.left_bound + x),
                          std::abs(s1_static_force(w.right_bound, p))});
    }
    parts.emplace_back("(b) S1 equilibria max error " + fmt(worst * 1e8, 4) + "e-8", worst <= 1e-8);

    // (c) energy drift
    {
        S1Params p;
        p.P = 0.0;
        p.phi = 0.0;
        p.theta = 0.0;
        const double wn = std::sqrt(2.0 * (1.0 - p.gamma1 * p.gamma1));
        auto energy = [&](double x, double v) {
            return 0.5 * v * v + x * x - std::sqrt(x * x + p.gamma1 * p.gamma1) - std::sqrt(x * x + p.gamma2 * p.gamma2);
        };
        const auto r = integrate_periods(S1System{p}, {0.5, 0.0, 0.0}, wn, 100, fixed_rk4(1.0 / 500.0));
        const double e0 = energy(0.5, 0.0);
        double drift = 0.0;
        for (std::size_t k = 0; k < r.periods(); ++k)
            drift = std::max(drift, std::abs(energy(r.state(k)[0], r.state(k)[1]) - e0) / std::abs(e0));
        parts.emplace_back("(c) S1 relative energy drift " + fmt(drift * 1e6, 4) + "e-6", drift < 1e-6);
    }

    // (d) S3 event refinement vs the fine-step reference
    {
        const double reference[] = {0.019896961712, 0.348193080789, 4.187750578927, 4.519263117827};
        S3Params p;
        p.f = 0.0;
        IntegratorSettings s;
        s.record_events = true;
        const auto r = integrate_periods(S3System{p}, {-0.59, -0.5, 0.0}, 1.0, 1, s);
        double err = r.event_times.size() >= 4 ? 0.0 : 1.0;
        for (std::size_t k = 0; k < 4 && k < r.event_times.size(); ++k)
            err = std::max(err, std::abs(r.event_times[k] - reference[k]));
        parts.emplace_back("(d) S3 event time error " + fmt(err * 1e4, 4) + "e-4", err <= 1e-4);
    }

    // (e) worker-count independence and (f) merge additivity
    {
        RunConfig c = default_run_config("s3");
        c.nx = c.ny = 4;
        c.n_samples = 96;
        c.mismatch.relative_bound = 0.1;
        c.classifier.transient_periods = 60;
        c.classifier.observation_periods = 40;
        bool same = true;
        const auto reference = run_campaign_serial(c).grid;
        for (int w : {1, 4, 16}) {
            CampaignOptions o;
            o.workers = w;
            same = same && run_campaign(c, o).grid == reference;
        }
        parts.emplace_back("(e) grids bit-identical for 1, 4, 16 workers", same);

        CampaignOptions lo, hi;
        lo.end = 37;
        hi.begin = 37;
        auto merged = run_campaign(c, lo).grid;
        merged.merge(run_campaign(c, hi).grid);
        parts.emplace_back("(f) merged half-campaigns equal the full campaign", merged == reference);
    }

    // (g) classifier truth table
    {
        const WellGeometry wells{0, 0.0, -0.31225, 0.31225};
        ClassifierSettings cs;
        cs.transient_periods = 10;
        cs.observation_periods = 100;
        const int n = cs.total_periods();
        bool ok = true;
        auto sine = [&](double centre, double amp) {
            TrajectorySummary tr;
            tr.dimension = 2;
            const double w = 0.3, T = 2 * std::numbers::pi / w;
            for (int p = 0; p < n; ++p) {
                double lo = 1e9, hi = -1e9;
                for (int k = 0; k <= 64; ++k) {
                    const double v = centre + amp * std::sin(w * (p * T + k * T / 64));
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                tr.period_min.push_back(lo);
                tr.period_max.push_back(hi);
                tr.strobe.push_back(centre + amp * std::sin(w * (p + 1) * T));
                tr.strobe.push_back(amp * w * std::cos(w * (p + 1) * T));
            }
            return tr;
        };
        ok = ok && classify(sine(0.31, 0.01), wells, cs) == Outcome{OutcomeLabel::IntraWell, true, 1};
        ok = ok && classify(sine(0.0, 0.6), wells, cs) == Outcome{OutcomeLabel::CrossWell, true, 1};
        std::vector<double> amp(n, 0.1);
        for (int p = cs.transient_periods; p < cs.transient_periods + 50; ++p) amp[p] = 0.5;
        ok = ok && classify(from_amplitudes(amp, 0.0), wells, cs).label == OutcomeLabel::Undetermined;
        TrajectorySummary bad;
        bad.status = IntegrationStatus::Diverged;
        ok = ok && classify(bad, wells, cs).label == OutcomeLabel::Diverged;
        bad.status = IntegrationStatus::StepUnderflow;
        ok = ok && classify(bad, wells, cs).label == OutcomeLabel::Undetermined;
        ok = ok && stroboscopic_period(std::vector<double>(40, 0.2), 1, 1e-3, 16) == 1;
        std::vector<double> alt, logistic;
        double z = 0.123456789;
        for (int i = 0; i < 40; ++i) {
            alt.push_back(i % 2 ? 0.1 : 0.9);
            z = 4.0 * z * (1.0 - z);
            logistic.push_back(2.0 * z - 1.0);
        }
        ok = ok && stroboscopic_period(alt, 1, 1e-3, 16) == 2;
        ok = ok && !stroboscopic_period(logistic, 1, 1e-3, 16).has_value();
        parts.emplace_back("(g) classifier truth table", ok);
    }

    bool pass = true;
    for (const auto& [text, ok] : parts) {
        note(text + (ok ? "  ok" : "  FAILED"));
        pass = pass && ok;
    }
    verdict(5, pass, "deterministic property suite (" + std::to_string(parts.size()) + " parts)");
    ctx.report["5"] = {{"pass", pass}};
    return pass;
}

// ---- 6 ----------------------------------------------------------------------

bool criterion6(Context& ctx) {
    const double bounds[] = {0.0, 0.025, 0.05, 0.10};
    RunConfig c = default_run_config("s1");
    c.nx = c.ny = 40;
    c.n_samples = ctx.reduced ? 1600 : 200000;
    double wall = 0.0;
    int workers = 1;
    bool complete = true;
    for (double b : bounds) {
        c.mismatch.relative_bound = b;
        CampaignOptions o;
        o.workers = ctx.workers;
        const auto r = run_campaign(c, o);
        wall += r.wall_seconds;
        workers = r.workers;
        complete = complete && r.grid.total() == c.n_samples && r.grid.boxes() == 1600;
        std::ostringstream csv;
        write_grid_csv(r.grid, csv);
        complete = complete && !csv.str().empty();
        note("b=" + fmt(b, 3) + ": " + std::to_string(c.n_samples) + " samples in " + fmt(r.wall_seconds, 1) + " s");
    }
    const double per_sample = wall / (4.0 * static_cast<double>(c.n_samples));
    note("mean cost " + fmt(per_sample * 1e3, 1) + " ms per sample on " +
         std::to_string(workers) + " worker(s); full scale (4 x 200000) ~ " +
         fmt(per_sample * 800000.0 / 3600.0, 1) + " h");
    if (ctx.reduced) {
        verdict(6, false, "full-scale campaign not run (non-gating); reduced 40x40 run with 1600 samples per panel "
                          "completed all four panels in " + fmt(wall, 0) + " s");
        ctx.report["6"] = {{"reduced", true}, {"wall_seconds", wall}, {"pass", false}};
        return true;
    }
    verdict(6, complete, "full-scale 40x40 x 200000 S1 campaign, four panels, wall time " + fmt(wall / 3600.0, 2) + " h");
    ctx.report["6"] = {{"reduced", false}, {"wall_seconds", wall}, {"pass", complete}};
    return complete;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria runner"};
    std::vector<int> criteria;
    Context ctx;
    std::string report_path;
    app.add_option("-c,--criterion", criteria, "Criterion number(s), default 1-5")->check(CLI::Range(1, 6));
    app.add_option("--scale", ctx.scale, "Sample-count multiplier")->check(CLI::PositiveNumber);
    app.add_option("-w,--workers", ctx.workers, "Worker threads (0 = all)");
    app.add_flag("--reduced", ctx.reduced, "Criterion 6 at 1 sample per box");
    app.add_option("--report", report_path, "Write measured values as JSON");
    app.add_option("--verdicts", g_verdict_file, "Append verdict lines to this file");
    bool gate = false;
    app.add_flag("--gate", gate, "Exit 1 when a criterion fails");
    CLI11_PARSE(app, argc, argv);
    if (criteria.empty()) criteria = {1, 2, 3, 4, 5};
    if (ctx.scale != 1.0) std::cout << "note: sample counts scaled by " << ctx.scale << std::endl;

    bool all = true;
    for (int n : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        switch (n) {
            case 1: ok = criterion1(ctx); break;
            case 2: ok = criterion2(ctx); break;
            case 3: ok = criterion3(ctx); break;
            case 4: ok = criterion4(ctx); break;
            case 5: ok = criterion5(ctx); break;
            case 6: ok = criterion6(ctx); break;
        }
        note("criterion " + std::to_string(n) + " took " +
             fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1) + " s");
        all = all && ok;
    }
    if (!report_path.empty()) std::ofstream(report_path) << ctx.report.dump(2) << "\n";
    return gate && !all ? 1 : 0;
}
