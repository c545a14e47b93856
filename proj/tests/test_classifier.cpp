#include "basinstab/classifier.h"
#include "basinstab/philox.h"

#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>

using namespace basinstab;

namespace {

const WellGeometry kS1Wells{0, 0.0, -0.31225, 0.31225};

// Samples x(t) densely over n periods of 2 pi / omega and fills the summary
// the way the integrator would: strobe (x, x') at period ends and per-period
// extrema of x.
TrajectorySummary synthesize(const std::function<double(double)>& x, double omega, int n) {
    const double T = 2.0 * std::numbers::pi / omega;
    const int per = 64;
    TrajectorySummary tr;
    tr.dimension = 2;
    for (int p = 0; p < n; ++p) {
        double lo = x(p * T), hi = lo;
        for (int k = 1; k <= per; ++k) {
            const double v = x(p * T + k * T / per);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        tr.period_min.push_back(lo);
        tr.period_max.push_back(hi);
        const double t = (p + 1) * T;
        const double h = 1e-6;
        tr.strobe.push_back(x(t));
        tr.strobe.push_back((x(t + h) - x(t - h)) / (2 * h));
    }
    return tr;
}

// Period extrema and strobe rows set directly, one amplitude per period.
TrajectorySummary from_amplitudes(const std::vector<double>& amp, double centre = 0.0) {
    TrajectorySummary tr;
    tr.dimension = 1;
    for (double a : amp) {
        tr.period_min.push_back(centre - a);
        tr.period_max.push_back(centre + a);
        tr.strobe.push_back(a);
    }
    return tr;
}

ClassifierSettings small_settings() {
    ClassifierSettings s;
    s.transient_periods = 10;
    s.observation_periods = 100;
    return s;
}

}  // namespace

TEST_CASE("small oscillation inside one well is intra-well period 1") {
    const double w = 0.3;
    const auto s = small_settings();
    const auto tr = synthesize([&](double t) { return 0.31 + 0.01 * std::sin(w * t); }, w, s.total_periods());
    const auto o = classify(tr, kS1Wells, s);
    CHECK(o.label == OutcomeLabel::IntraWell);
    REQUIRE(o.periodic.has_value());
    CHECK(*o.periodic);
    CHECK(o.period_multiple == 1);
}

TEST_CASE("large oscillation spanning both wells is cross-well period 1") {
    const double w = 0.3;
    const auto s = small_settings();
    const auto tr = synthesize([&](double t) { return 0.6 * std::sin(w * t); }, w, s.total_periods());
    const auto o = classify(tr, kS1Wells, s);
    CHECK(o.label == OutcomeLabel::CrossWell);
    CHECK(o.periodic == true);
    CHECK(o.period_multiple == 1);
}

TEST_CASE("subharmonic spanning motion reports its period multiple") {
    const double w = 0.3;
    const auto s = small_settings();
    const auto tr = synthesize([&](double t) { return 0.4 * std::sin(w * t) + 0.2 * std::sin(w * t / 3.0); }, w,
                               s.total_periods());
    const auto o = classify(tr, kS1Wells, s);
    CHECK(o.label == OutcomeLabel::CrossWell);
    CHECK(o.periodic == true);
    CHECK(o.period_multiple == 3);
}

TEST_CASE("intermittent spanning is undetermined") {
    auto s = small_settings();
    std::vector<double> amp(s.total_periods(), 0.1);
    // Spans only in the first half of the observation span.
    for (int p = s.transient_periods; p < s.transient_periods + 50; ++p) amp[p] = 0.5;
    const auto o = classify(from_amplitudes(amp), kS1Wells, s);
    CHECK(o.label == OutcomeLabel::Undetermined);
    CHECK_FALSE(o.periodic.has_value());
    CHECK_FALSE(o.period_multiple.has_value());
}

TEST_CASE("spanning once per window is enough") {
    auto s = small_settings();
    std::vector<double> amp(s.total_periods(), 0.1);
    for (std::size_t p = 0; p < amp.size(); p += 10) amp[p] = 0.5;
    CHECK(classify(from_amplitudes(amp), kS1Wells, s).label == OutcomeLabel::CrossWell);
    // One gap of a full window breaks it.
    for (int p = 50; p < 75; ++p) amp[p] = 0.1;
    CHECK(classify(from_amplitudes(amp), kS1Wells, s).label == OutcomeLabel::Undetermined);
}

TEST_CASE("persistently spanning aperiodic motion is cross-well, not periodic") {
    auto s = small_settings();
    std::vector<double> amp;
    double z = 0.3;
    for (int p = 0; p < s.total_periods(); ++p) {
        z = 3.9 * z * (1.0 - z);
        amp.push_back(0.4 + 0.3 * z);
    }
    const auto o = classify(from_amplitudes(amp), kS1Wells, s);
    CHECK(o.label == OutcomeLabel::CrossWell);
    CHECK(o.periodic == false);
    CHECK_FALSE(o.period_multiple.has_value());
}

TEST_CASE("reaching only one threshold is intra-well") {
    auto s = small_settings();
    std::vector<double> amp(s.total_periods(), 0.5);
    // Oscillates around 0.2: reaches the right threshold, never the left one.
    CHECK(classify(from_amplitudes(amp, 0.2), kS1Wells, s).label == OutcomeLabel::IntraWell);
}

TEST_CASE("integration failures map to labels") {
    auto s = small_settings();
    TrajectorySummary tr;
    tr.status = IntegrationStatus::Diverged;
    CHECK(classify(tr, kS1Wells, s) == Outcome{OutcomeLabel::Diverged, {}, {}});
    tr.status = IntegrationStatus::StepUnderflow;
    CHECK(classify(tr, kS1Wells, s) == Outcome{OutcomeLabel::Undetermined, {}, {}});
}

TEST_CASE("short trajectories are rejected") {
    auto s = small_settings();
    const auto tr = from_amplitudes(std::vector<double>(s.total_periods() - 1, 0.5));
    CHECK_THROWS_AS(classify(tr, kS1Wells, s), InsufficientData);
}

TEST_CASE("stroboscopic period detection") {
    const std::vector<double> constant(40, 0.25);
    CHECK(stroboscopic_period(constant, 1, 1e-3, 16) == 1);

    std::vector<double> alternating;
    for (int i = 0; i < 40; ++i) alternating.push_back(i % 2 ? 0.1 : 0.9);
    CHECK(stroboscopic_period(alternating, 1, 1e-3, 16) == 2);

    // Logistic map at r = 4 has no cycle of length <= 16 visible at this tolerance.
    std::vector<double> chaotic;
    double z = 0.123456789;
    for (int i = 0; i < 200; ++i) {
        z = 4.0 * z * (1.0 - z);
        chaotic.push_back(2.0 * z - 1.0);
    }
    CHECK_FALSE(stroboscopic_period(chaotic, 1, 1e-3, 16).has_value());
    CHECK_FALSE(stroboscopic_period(std::span<const double>(chaotic).subspan(100, 2 * 16), 1, 1e-3, 16).has_value());

    // Two-component rows: period is set by the slower component.
    std::vector<double> rows;
    for (int i = 0; i < 40; ++i) {
        rows.push_back(0.5);
        rows.push_back(i % 4 == 0 ? 1.0 : 0.0);
    }
    CHECK(stroboscopic_period(rows, 2, 1e-3, 16) == 4);

    CHECK_THROWS(stroboscopic_period(std::vector<double>(10, 0.0), 1, 1e-3, 16));
}

TEST_CASE("labels serialise to fixed strings") {
    for (auto l : {OutcomeLabel::CrossWell, OutcomeLabel::IntraWell, OutcomeLabel::Undetermined, OutcomeLabel::Diverged})
        CHECK(outcome_label_from_string(to_string(l)) == l);
    CHECK(to_string(OutcomeLabel::CrossWell) == "cross_well");
    CHECK(to_string(OutcomeLabel::IntraWell) == "intra_well");
    CHECK(to_string(OutcomeLabel::Undetermined) == "undetermined");
    CHECK(to_string(OutcomeLabel::Diverged) == "diverged");
    CHECK_THROWS(outcome_label_from_string("chaotic"));
}

TEST_CASE("mirrored trajectories with swapped thresholds classify identically") {
    auto s = small_settings();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        CounterRng r(seed, 0, 9);
        TrajectorySummary tr;
        tr.dimension = 1;
        const double centre = r.uniform(-0.3, 0.3);
        const double spread = r.uniform(0.0, 0.6);
        for (int p = 0; p < s.total_periods(); ++p) {
            const double c = centre + r.uniform(-0.1, 0.1);
            const double a = spread * r.uniform();
            tr.period_min.push_back(c - a);
            tr.period_max.push_back(c + a + r.uniform(0.0, 0.1));
            tr.strobe.push_back(c);
        }
        TrajectorySummary m = tr;
        for (std::size_t p = 0; p < tr.periods(); ++p) {
            m.period_min[p] = -tr.period_max[p];
            m.period_max[p] = -tr.period_min[p];
            m.strobe[p] = -tr.strobe[p];
        }
        const WellGeometry mirrored{0, -kS1Wells.unstable_point, -kS1Wells.right_bound, -kS1Wells.left_bound};
        CHECK(classify(tr, kS1Wells, s) == classify(m, mirrored, s));
    }
}

TEST_CASE("longer observation never turns cross-well into intra-well") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        CounterRng r(seed, 1, 9);
        const double p_span = r.uniform();
        std::vector<double> amp;
        for (int p = 0; p < 400; ++p) amp.push_back(r.uniform() < p_span ? 0.5 : 0.1);
        const auto tr = from_amplitudes(amp);
        for (const int obs : {40, 80, 160, 320}) {
            ClassifierSettings s;
            s.transient_periods = 400 - obs;
            s.observation_periods = obs;
            ClassifierSettings longer = s;
            longer.transient_periods = 400 - 2 * obs > 0 ? 400 - 2 * obs : 0;
            longer.observation_periods = 400 - longer.transient_periods;
            if (classify(tr, kS1Wells, s).label == OutcomeLabel::CrossWell)
                CHECK(classify(tr, kS1Wells, longer).label != OutcomeLabel::IntraWell);
        }
    }
}

TEST_CASE("every trajectory gets exactly one label") {
    auto s = small_settings();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        CounterRng r(seed, 2, 9);
        std::vector<double> amp;
        for (int p = 0; p < s.total_periods(); ++p) amp.push_back(r.uniform(0.0, 0.6));
        const auto o = classify(from_amplitudes(amp), kS1Wells, s);
        const bool determined = o.label == OutcomeLabel::CrossWell || o.label == OutcomeLabel::IntraWell;
        CHECK(o.periodic.has_value() == determined);
    }
}

TEST_CASE("classifier settings validation") {
    ClassifierSettings s;
    CHECK_NOTHROW(s.validate());
    s.observation_periods = 30;
    CHECK_THROWS(s.validate());
    s = ClassifierSettings{};
    s.periodicity_tol = 0.0;
    CHECK_THROWS(s.validate());
}
