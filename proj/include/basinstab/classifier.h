#pragma once

#include "basinstab/harvesters.h"
#include "basinstab/ode.h"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace basinstab {

enum class OutcomeLabel { CrossWell, IntraWell, Undetermined, Diverged };

// Fixed wire strings: "cross_well", "intra_well", "undetermined", "diverged".
std::string to_string(OutcomeLabel label);
OutcomeLabel outcome_label_from_string(const std::string& s);

struct Outcome {
    OutcomeLabel label = OutcomeLabel::Undetermined;
    std::optional<bool> periodic;
    std::optional<int> period_multiple;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct ClassifierSettings {
    int transient_periods = 500;
    int observation_periods = 200;
    int window_periods = 20;
    double periodicity_tol = 1e-3;
    int max_period_multiple = 16;

    int total_periods() const { return transient_periods + observation_periods; }
    void validate() const;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Smallest k <= max_multiple such that every state recurs after k steps within
// `tol` (max-norm). `states` holds rows of `dimension` values.
std::optional<int> stroboscopic_period(std::span<const double> states, std::size_t dimension, double tol,
                                       int max_multiple);

// Labels a trajectory. Cross-well requires every run of window_periods
// consecutive observed periods to reach below the left bound and above the
// right bound.
Outcome classify(const TrajectorySummary& trajectory, const WellGeometry& wells, const ClassifierSettings& s);

}  // namespace basinstab
