#include "basinstab/classifier.h"

#include <algorithm>
#include <cmath>

namespace basinstab {

std::string to_string(OutcomeLabel label) {
    switch (label) {
        case OutcomeLabel::CrossWell: return "cross_well";
        case OutcomeLabel::IntraWell: return "intra_well";
        case OutcomeLabel::Undetermined: return "undetermined";
        case OutcomeLabel::Diverged: return "diverged";
    }
    return "undetermined";
}

OutcomeLabel outcome_label_from_string(const std::string& s) {
    if (s == "cross_well") return OutcomeLabel::CrossWell;
    if (s == "intra_well") return OutcomeLabel::IntraWell;
    if (s == "undetermined") return OutcomeLabel::Undetermined;
    if (s == "diverged") return OutcomeLabel::Diverged;
    throw std::invalid_argument("unknown outcome label '" + s + "'");
}

void ClassifierSettings::validate() const {
    if (transient_periods < 0) throw std::invalid_argument("classifier.transient_periods must be >= 0");
    if (window_periods < 1) throw std::invalid_argument("classifier.window_periods must be >= 1");
    if (observation_periods < 2 * window_periods)
        throw std::invalid_argument("classifier.observation_periods must be >= 2 * classifier.window_periods");
    if (!(periodicity_tol > 0.0)) throw std::invalid_argument("classifier.periodicity_tol must be > 0");
    if (max_period_multiple < 1) throw std::invalid_argument("classifier.max_period_multiple must be >= 1");
}

std::optional<int> stroboscopic_period(std::span<const double> states, std::size_t dimension, double tol,
                                       int max_multiple) {
    if (dimension == 0 || states.size() % dimension != 0)
        throw std::invalid_argument("stroboscopic_period: state buffer is not a whole number of rows");
    const std::size_t n = states.size() / dimension;
    if (max_multiple < 1 || n < 2 * static_cast<std::size_t>(max_multiple))
        throw std::invalid_argument("stroboscopic_period: need at least 2 * max_multiple states");

    auto row = [&](std::size_t i) { return states.subspan(i * dimension, dimension); };
    for (int k = 1; k <= max_multiple; ++k) {
        bool recurs = true;
        for (std::size_t i = 0; recurs && i + k < n; ++i) {
            const auto a = row(i);
            const auto b = row(i + k);
            for (std::size_t c = 0; c < dimension; ++c) {
                if (!(std::abs(b[c] - a[c]) < tol)) {
                    recurs = false;
                    break;
                }
            }
        }
        if (recurs) return k;
    }
    return std::nullopt;
}

Outcome classify(const TrajectorySummary& trajectory, const WellGeometry& wells, const ClassifierSettings& s) {
    if (trajectory.status == IntegrationStatus::Diverged) return {OutcomeLabel::Diverged, {}, {}};
    if (trajectory.status == IntegrationStatus::StepUnderflow) return {OutcomeLabel::Undetermined, {}, {}};

    const std::size_t total = trajectory.periods();
    if (total < static_cast<std::size_t>(s.total_periods()))
        throw InsufficientData("trajectory has " + std::to_string(total) + " periods, classification needs " +
                               std::to_string(s.total_periods()));

    const std::size_t begin = total - static_cast<std::size_t>(s.observation_periods);
    const std::size_t window = static_cast<std::size_t>(s.window_periods);

    std::size_t spanning = 0;
    std::size_t windows = 0;
    for (std::size_t w = begin; w + window <= total; ++w, ++windows) {
        const auto lo = std::min_element(trajectory.period_min.begin() + w, trajectory.period_min.begin() + w + window);
        const auto hi = std::max_element(trajectory.period_max.begin() + w, trajectory.period_max.begin() + w + window);
        if (*lo < wells.left_bound && *hi > wells.right_bound) ++spanning;
    }

    Outcome out;
    if (spanning == windows)
        out.label = OutcomeLabel::CrossWell;
    else if (spanning == 0)
        out.label = OutcomeLabel::IntraWell;
    else
        return {OutcomeLabel::Undetermined, {}, {}};

    const std::size_t tail =
        std::max(window, 2 * static_cast<std::size_t>(s.max_period_multiple));
    const std::size_t first = total >= tail ? total - tail : 0;
    const std::span<const double> strobe(trajectory.strobe);
    const auto k = stroboscopic_period(strobe.subspan(first * trajectory.dimension), trajectory.dimension,
                                       s.periodicity_tol, std::min<int>(s.max_period_multiple, (total - first) / 2));
    out.periodic = k.has_value();
    if (k) out.period_multiple = *k;
    return out;
}

}  // namespace basinstab
