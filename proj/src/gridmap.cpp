#include "basinstab/gridmap.h"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace basinstab {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> linspace_edges(Range r, int n) {
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) e[k] = r.lo + r.width() * static_cast<double>(k) / static_cast<double>(n);
    e[n] = r.hi;
    return e;
}

std::optional<int> bin(const std::vector<double>& edges, double v) {
    if (!(v >= edges.front() && v <= edges.back())) return std::nullopt;
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    int k = static_cast<int>(it - edges.begin()) - 1;
    return std::min(k, static_cast<int>(edges.size()) - 2);
}

}  // namespace

ProbabilityGrid ProbabilityGrid::uniform(int nx, int ny, Range omega, Range amplitude) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("grid resolution must be at least 1x1");
    if (!(omega.lo < omega.hi) || !(amplitude.lo < amplitude.hi))
        throw std::invalid_argument("grid ranges must satisfy lo < hi");
    ProbabilityGrid g;
    g.nx = nx;
    g.ny = ny;
    g.omega_edges = linspace_edges(omega, nx);
    g.amplitude_edges = linspace_edges(amplitude, ny);
    const std::size_t n = g.boxes();
    g.total_counts.assign(n, 0);
    g.crosswell_counts.assign(n, 0);
    g.crosswell_periodic_counts.assign(n, 0);
    g.undetermined_counts.assign(n, 0);
    g.diverged_counts.assign(n, 0);
    return g;
}

std::optional<std::pair<int, int>> ProbabilityGrid::locate(double omega, double amplitude) const {
    const auto i = bin(omega_edges, omega);
    const auto j = bin(amplitude_edges, amplitude);
    if (!i || !j) return std::nullopt;
    return std::make_pair(*i, *j);
}

void ProbabilityGrid::record(int i, int j, const Outcome& outcome) {
    const std::size_t k = index(i, j);
    ++total_counts[k];
    switch (outcome.label) {
        case OutcomeLabel::CrossWell:
            ++crosswell_counts[k];
            if (outcome.periodic.value_or(false)) ++crosswell_periodic_counts[k];
            break;
        case OutcomeLabel::Undetermined: ++undetermined_counts[k]; break;
        case OutcomeLabel::Diverged: ++diverged_counts[k]; break;
        case OutcomeLabel::IntraWell: break;
    }
}

bool ProbabilityGrid::same_shape(const ProbabilityGrid& other) const {
    return nx == other.nx && ny == other.ny && omega_edges == other.omega_edges &&
           amplitude_edges == other.amplitude_edges;
}

void ProbabilityGrid::merge(const ProbabilityGrid& other) {
    if (!same_shape(other)) throw GridShapeMismatch("cannot merge grids with different edges or resolution");
    for (std::size_t k = 0; k < boxes(); ++k) {
        total_counts[k] += other.total_counts[k];
        crosswell_counts[k] += other.crosswell_counts[k];
        crosswell_periodic_counts[k] += other.crosswell_periodic_counts[k];
        undetermined_counts[k] += other.undetermined_counts[k];
        diverged_counts[k] += other.diverged_counts[k];
    }
}

std::int64_t ProbabilityGrid::total() const {
    std::int64_t s = 0;
    for (auto c : total_counts) s += c;
    return s;
}

void ProbabilityGrid::validate() const {
    if (nx < 1 || ny < 1) throw GridFormatError("grid resolution must be at least 1x1");
    if (omega_edges.size() != static_cast<std::size_t>(nx) + 1 ||
        amplitude_edges.size() != static_cast<std::size_t>(ny) + 1)
        throw GridFormatError("edge arrays must have nx+1 and ny+1 entries");
    for (const auto* e : {&omega_edges, &amplitude_edges})
        for (std::size_t k = 1; k < e->size(); ++k)
            if (!((*e)[k - 1] < (*e)[k])) throw GridFormatError("edges must be strictly increasing");
    for (const auto* c : {&total_counts, &crosswell_counts, &crosswell_periodic_counts, &undetermined_counts,
                          &diverged_counts})
        if (c->size() != boxes()) throw GridFormatError("count arrays must have nx*ny entries");
    for (std::size_t k = 0; k < boxes(); ++k) {
        if (total_counts[k] < 0 || crosswell_counts[k] < 0 || undetermined_counts[k] < 0 || diverged_counts[k] < 0 ||
            crosswell_periodic_counts[k] < 0)
            throw GridFormatError("counts must be non-negative");
        if (crosswell_counts[k] + undetermined_counts[k] + diverged_counts[k] > total_counts[k])
            throw GridFormatError("crosswell + undetermined + diverged exceeds total in box " + std::to_string(k));
        if (crosswell_periodic_counts[k] > crosswell_counts[k])
            throw GridFormatError("periodic cross-well count exceeds cross-well count in box " + std::to_string(k));
    }
}

ProbabilityEstimate probability(const ProbabilityGrid& grid, int i, int j) {
    const std::size_t k = grid.index(i, j);
    const auto n = grid.total_counts[k];
    if (n <= 0) throw EmptyBox("box (" + std::to_string(i) + ", " + std::to_string(j) + ") has no samples");
    const double p = static_cast<double>(grid.crosswell_counts[k]) / static_cast<double>(n);
    const double hw = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return {p, std::clamp(hw, 0.0, 1.0)};
}

double standard_error(const ProbabilityGrid& grid, int i, int j) {
    const auto est = probability(grid, i, j);
    return std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(grid.total_counts[grid.index(i, j)]));
}

DifferenceMap difference_map(const ProbabilityGrid& a, const ProbabilityGrid& b) {
    if (!a.same_shape(b)) throw GridShapeMismatch("difference_map: grids differ in resolution or edges");
    DifferenceMap d{a.nx, a.ny, a.omega_edges, a.amplitude_edges, {}};
    d.values.resize(a.boxes());
    for (int j = 0; j < a.ny; ++j)
        for (int i = 0; i < a.nx; ++i) {
            const std::size_t k = a.index(i, j);
            if (a.total_counts[k] > 0 && b.total_counts[k] > 0)
                d.values[k] = probability(b, i, j).value - probability(a, i, j).value;
        }
    return d;
}

ChangeSummary max_abs_change_detail(const ProbabilityGrid& a, const ProbabilityGrid& b, std::int64_t min_samples) {
    if (!a.same_shape(b)) throw GridShapeMismatch("max_abs_change: grids differ in resolution or edges");
    ChangeSummary s;
    bool any = false;
    for (int j = 0; j < a.ny; ++j)
        for (int i = 0; i < a.nx; ++i) {
            const std::size_t k = a.index(i, j);
            if (a.total_counts[k] < min_samples || b.total_counts[k] < min_samples || a.total_counts[k] == 0 ||
                b.total_counts[k] == 0)
                continue;
            ++s.eligible_boxes;
            const double c = std::abs(probability(b, i, j).value - probability(a, i, j).value);
            if (!any || c > s.max_abs_change) {
                s.max_abs_change = c;
                s.omega_index = i;
                s.amplitude_index = j;
                any = true;
            }
        }
    if (!any)
        throw NoEligibleBoxes("no box has at least " + std::to_string(min_samples) + " samples in both grids");
    return s;
}

double max_abs_change(const ProbabilityGrid& a, const ProbabilityGrid& b, std::int64_t min_samples) {
    return max_abs_change_detail(a, b, min_samples).max_abs_change;
}

void write_grid_csv(const ProbabilityGrid& grid, std::ostream& out) {
    out << "# system=" << grid.metadata.system_id << " seed=" << grid.metadata.seed
        << " config_hash=" << grid.metadata.config_hash << " relative_bound=" << fmt17(grid.metadata.relative_bound)
        << "\n";
    out << "# nx=" << grid.nx << " ny=" << grid.ny << "\n";
    out << "omega_lo,omega_hi,p_lo,p_hi,total,crosswell,undetermined,diverged,probability,ci_halfwidth,"
           "crosswell_periodic\n";
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = grid.index(i, j);
            out << fmt17(grid.omega_edges[i]) << ',' << fmt17(grid.omega_edges[i + 1]) << ','
                << fmt17(grid.amplitude_edges[j]) << ',' << fmt17(grid.amplitude_edges[j + 1]) << ','
                << grid.total_counts[k] << ',' << grid.crosswell_counts[k] << ',' << grid.undetermined_counts[k]
                << ',' << grid.diverged_counts[k] << ',';
            if (grid.total_counts[k] > 0) {
                const auto est = probability(grid, i, j);
                out << fmt17(est.value) << ',' << fmt17(est.ci_halfwidth);
            } else {
                out << ',';
            }
            out << ',' << grid.crosswell_periodic_counts[k] << '\n';
        }
}

ProbabilityGrid read_grid_csv(std::istream& in) {
    ProbabilityGrid g;
    std::string line;
    bool header = false;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string kv;
            while (ss >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq);
                const std::string val = kv.substr(eq + 1);
                if (key == "nx") g.nx = std::stoi(val);
                else if (key == "ny") g.ny = std::stoi(val);
                else if (key == "system") g.metadata.system_id = val;
                else if (key == "seed") g.metadata.seed = std::stoull(val);
                else if (key == "config_hash") g.metadata.config_hash = val;
                else if (key == "relative_bound") g.metadata.relative_bound = std::stod(val);
            }
            continue;
        }
        if (!header) {
            if (line.rfind("omega_lo,", 0) != 0) throw GridFormatError("grid CSV: missing header row");
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() < 8) throw GridFormatError("grid CSV: row has too few columns");
        rows.push_back(std::move(cells));
    }
    if (g.nx < 1 || g.ny < 1) throw GridFormatError("grid CSV: missing '# nx=.. ny=..' line");
    if (rows.size() != static_cast<std::size_t>(g.nx) * g.ny)
        throw GridFormatError("grid CSV: expected nx*ny data rows");
    try {
        g.omega_edges.resize(g.nx + 1);
        g.amplitude_edges.resize(g.ny + 1);
        const std::size_t n = g.boxes();
        g.total_counts.assign(n, 0);
        g.crosswell_counts.assign(n, 0);
        g.crosswell_periodic_counts.assign(n, 0);
        g.undetermined_counts.assign(n, 0);
        g.diverged_counts.assign(n, 0);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.index(i, j);
                const auto& r = rows[k];
                if (j == 0) {
                    g.omega_edges[i] = std::stod(r[0]);
                    g.omega_edges[i + 1] = std::stod(r[1]);
                }
                if (i == 0) {
                    g.amplitude_edges[j] = std::stod(r[2]);
                    g.amplitude_edges[j + 1] = std::stod(r[3]);
                }
                g.total_counts[k] = std::stoll(r[4]);
                g.crosswell_counts[k] = std::stoll(r[5]);
                g.undetermined_counts[k] = std::stoll(r[6]);
                g.diverged_counts[k] = std::stoll(r[7]);
                if (r.size() > 10 && !r[10].empty()) g.crosswell_periodic_counts[k] = std::stoll(r[10]);
            }
    } catch (const std::logic_error& e) {
        throw GridFormatError(std::string("grid CSV: malformed number (") + e.what() + ")");
    }
    g.validate();
    return g;
}

std::string grid_to_json(const ProbabilityGrid& grid) {
    json j;
    j["system"] = grid.metadata.system_id;
    j["seed"] = grid.metadata.seed;
    j["config_hash"] = grid.metadata.config_hash;
    j["relative_bound"] = grid.metadata.relative_bound;
    j["nx"] = grid.nx;
    j["ny"] = grid.ny;
    j["omega_edges"] = grid.omega_edges;
    j["amplitude_edges"] = grid.amplitude_edges;
    json boxes = json::array();
    for (int jj = 0; jj < grid.ny; ++jj)
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = grid.index(i, jj);
            json b{{"omega_lo", grid.omega_edges[i]},
                   {"omega_hi", grid.omega_edges[i + 1]},
                   {"p_lo", grid.amplitude_edges[jj]},
                   {"p_hi", grid.amplitude_edges[jj + 1]},
                   {"total", grid.total_counts[k]},
                   {"crosswell", grid.crosswell_counts[k]},
                   {"undetermined", grid.undetermined_counts[k]},
                   {"diverged", grid.diverged_counts[k]},
                   {"crosswell_periodic", grid.crosswell_periodic_counts[k]}};
            if (grid.total_counts[k] > 0) {
                const auto est = probability(grid, i, jj);
                b["probability"] = est.value;
                b["ci_halfwidth"] = est.ci_halfwidth;
            } else {
                b["probability"] = nullptr;
                b["ci_halfwidth"] = nullptr;
            }
            boxes.push_back(std::move(b));
        }
    j["boxes"] = std::move(boxes);
    return j.dump(1);
}

ProbabilityGrid grid_from_json(const std::string& text) {
    ProbabilityGrid g;
    try {
        const json j = json::parse(text);
        g.nx = j.at("nx").get<int>();
        g.ny = j.at("ny").get<int>();
        g.omega_edges = j.at("omega_edges").get<std::vector<double>>();
        g.amplitude_edges = j.at("amplitude_edges").get<std::vector<double>>();
        g.metadata.system_id = j.value("system", "");
        g.metadata.seed = j.value("seed", std::uint64_t{0});
        g.metadata.config_hash = j.value("config_hash", "");
        g.metadata.relative_bound = j.value("relative_bound", 0.0);
        const auto& boxes = j.at("boxes");
        if (g.nx < 1 || g.ny < 1 || boxes.size() != static_cast<std::size_t>(g.nx) * g.ny)
            throw GridFormatError("grid JSON: expected nx*ny boxes");
        const std::size_t n = g.boxes();
        g.total_counts.resize(n);
        g.crosswell_counts.resize(n);
        g.crosswell_periodic_counts.resize(n);
        g.undetermined_counts.resize(n);
        g.diverged_counts.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const auto& b = boxes[k];
            g.total_counts[k] = b.at("total").get<std::int64_t>();
            g.crosswell_counts[k] = b.at("crosswell").get<std::int64_t>();
            g.undetermined_counts[k] = b.at("undetermined").get<std::int64_t>();
            g.diverged_counts[k] = b.at("diverged").get<std::int64_t>();
            g.crosswell_periodic_counts[k] = b.value("crosswell_periodic", std::int64_t{0});
        }
    } catch (const json::exception& e) {
        throw GridFormatError(std::string("grid JSON: ") + e.what());
    }
    g.validate();
    return g;
}

ProbabilityGrid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GridFormatError("cannot open grid file '" + path + "'");
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (is_json) {
        std::stringstream ss;
        ss << in.rdbuf();
        return grid_from_json(ss.str());
    }
    return read_grid_csv(in);
}

void write_difference_csv(const DifferenceMap& diff, std::ostream& out) {
    out << "omega_lo,omega_hi,p_lo,p_hi,difference\n";
    for (int j = 0; j < diff.ny; ++j)
        for (int i = 0; i < diff.nx; ++i) {
            out << fmt17(diff.omega_edges[i]) << ',' << fmt17(diff.omega_edges[i + 1]) << ','
                << fmt17(diff.amplitude_edges[j]) << ',' << fmt17(diff.amplitude_edges[j + 1]) << ',';
            if (const auto v = diff.at(i, j)) out << fmt17(*v);
            out << '\n';
        }
}

}  // namespace basinstab
