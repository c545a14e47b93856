#pragma once

#include "basinstab/classifier.h"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace basinstab {

class GridShapeMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyBox : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoEligibleBoxes : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    friend bool operator==(const Range&, const Range&) = default;
};

// Free-form provenance carried by every exported file.
struct GridMetadata {
    std::string system_id;
    std::uint64_t seed = 0;
    std::string config_hash;
    double relative_bound = 0.0;
};

// Per-box outcome counts over (frequency, amplitude). Box (i, j) covers
// omega in [omega_edges[i], omega_edges[i+1]) and amplitude in
// [amplitude_edges[j], amplitude_edges[j+1]); the last box on each axis is
// closed on the right.
struct ProbabilityGrid {
    int nx = 0;
    int ny = 0;
    std::vector<double> omega_edges;
    std::vector<double> amplitude_edges;
    std::vector<std::int64_t> total_counts;
    std::vector<std::int64_t> crosswell_counts;
    std::vector<std::int64_t> crosswell_periodic_counts;
    std::vector<std::int64_t> undetermined_counts;
    std::vector<std::int64_t> diverged_counts;
    GridMetadata metadata;

    static ProbabilityGrid uniform(int nx, int ny, Range omega, Range amplitude);

    std::size_t boxes() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

    // Box containing a point, or nullopt when outside the grid.
    std::optional<std::pair<int, int>> locate(double omega, double amplitude) const;

    void record(int i, int j, const Outcome& outcome);
    void merge(const ProbabilityGrid& other);
    bool same_shape(const ProbabilityGrid& other) const;
    std::int64_t total() const;

    // Throws GridFormatError on violated invariants.
    void validate() const;

    friend bool operator==(const ProbabilityGrid& a, const ProbabilityGrid& b) {
        return a.nx == b.nx && a.ny == b.ny && a.omega_edges == b.omega_edges &&
               a.amplitude_edges == b.amplitude_edges && a.total_counts == b.total_counts &&
               a.crosswell_counts == b.crosswell_counts &&
               a.crosswell_periodic_counts == b.crosswell_periodic_counts &&
               a.undetermined_counts == b.undetermined_counts && a.diverged_counts == b.diverged_counts;
    }
};

struct ProbabilityEstimate {
    double value = 0.0;
    double ci_halfwidth = 0.0;  // 95% normal approximation
};

ProbabilityEstimate probability(const ProbabilityGrid& grid, int i, int j);

// Binomial standard error sqrt(p (1 - p) / n) of a box.
double standard_error(const ProbabilityGrid& grid, int i, int j);

struct DifferenceMap {
    int nx = 0;
    int ny = 0;
    std::vector<double> omega_edges;
    std::vector<double> amplitude_edges;
    std::vector<std::optional<double>> values;  // p_b - p_a; empty when either box is empty

    std::optional<double> at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
};

DifferenceMap difference_map(const ProbabilityGrid& a, const ProbabilityGrid& b);

struct ChangeSummary {
    double max_abs_change = 0.0;
    int omega_index = 0;
    int amplitude_index = 0;
    std::size_t eligible_boxes = 0;
};

ChangeSummary max_abs_change_detail(const ProbabilityGrid& a, const ProbabilityGrid& b,
                                    std::int64_t min_samples = 100);
double max_abs_change(const ProbabilityGrid& a, const ProbabilityGrid& b, std::int64_t min_samples = 100);

// CSV columns: omega_lo, omega_hi, p_lo, p_hi, total, crosswell, undetermined,
// diverged, probability, ci_halfwidth, crosswell_periodic. Leading '#' lines
// carry the metadata.
void write_grid_csv(const ProbabilityGrid& grid, std::ostream& out);
ProbabilityGrid read_grid_csv(std::istream& in);

std::string grid_to_json(const ProbabilityGrid& grid);
ProbabilityGrid grid_from_json(const std::string& text);

// Loads .json or .csv by extension.
ProbabilityGrid load_grid(const std::string& path);

void write_difference_csv(const DifferenceMap& diff, std::ostream& out);

}  // namespace basinstab
