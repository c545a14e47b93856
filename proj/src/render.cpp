#include "basinstab/render.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace basinstab {

namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 110;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

int lerp(int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
}

Rgb mix(Rgb a, Rgb b, double t) {
    return {lerp(a.r, b.r, t), lerp(a.g, b.g, t), lerp(a.b, b.b, t)};
}

std::string hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

const Rgb kBlue{49, 54, 149};
const Rgb kYellow{255, 230, 80};
const Rgb kRed{200, 30, 30};
const Rgb kWhite{255, 255, 255};
const Rgb kGrey{200, 200, 200};

struct Frame {
    int nx, ny, cell;
    const std::vector<double>& omega_edges;
    const std::vector<double>& amplitude_edges;
};

// Writes the shared frame: cells via `color_of`, axes, ticks, colour bar.
void write_svg(std::ostringstream& out, const Frame& f, const std::function<std::optional<Rgb>(int, int)>& color_of,
               const std::function<Rgb(double)>& bar_color, double bar_lo, double bar_hi, const std::string& comment,
               const RenderOptions& options) {
    const int w = f.nx * f.cell;
    const int h = f.ny * f.cell;
    const int width = kMarginLeft + w + kMarginRight;
    const int height = kMarginTop + h + kMarginBottom;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<!-- " << escape(comment) << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    if (!options.title.empty())
        out << "<text x=\"" << kMarginLeft << "\" y=\"22\" font-size=\"13\">" << escape(options.title) << "</text>\n";
    out << "<g shape-rendering=\"crispEdges\">\n";
    for (int j = 0; j < f.ny; ++j) {
        for (int i = 0; i < f.nx; ++i) {
            const auto c = color_of(i, j).value_or(kGrey);
            const int x = kMarginLeft + i * f.cell;
            const int y = kMarginTop + (f.ny - 1 - j) * f.cell;
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << f.cell << "\" height=\"" << f.cell
                << "\" fill=\"" << hex(c) << "\"/>\n";
        }
    }
    out << "</g>\n";
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"none\" stroke=\"#000000\"/>\n";

    const int xticks = std::min(f.nx, 5);
    for (int t = 0; t <= xticks; ++t) {
        const int i = f.nx * t / xticks;
        const int x = kMarginLeft + i * f.cell;
        out << "<line x1=\"" << x << "\" y1=\"" << kMarginTop + h << "\" x2=\"" << x << "\" y2=\""
            << kMarginTop + h + 4 << "\" stroke=\"#000000\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << kMarginTop + h + 16 << "\" text-anchor=\"middle\">"
            << num(f.omega_edges[static_cast<std::size_t>(i)]) << "</text>\n";
    }
    const int yticks = std::min(f.ny, 5);
    for (int t = 0; t <= yticks; ++t) {
        const int j = f.ny * t / yticks;
        const int y = kMarginTop + h - j * f.cell;
        out << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << y << "\" x2=\"" << kMarginLeft << "\" y2=\"" << y
            << "\" stroke=\"#000000\"/>\n";
        out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
            << num(f.amplitude_edges[static_cast<std::size_t>(j)]) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + w / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
        << escape(options.omega_label) << "</text>\n";
    out << "<text transform=\"translate(16," << kMarginTop + h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(options.amplitude_label) << "</text>\n";

    const int bx = kMarginLeft + w + 20;
    const int steps = 50;
    for (int s = 0; s < steps; ++s) {
        const double t = (s + 0.5) / steps;
        const int y = kMarginTop + h - (s + 1) * h / steps;
        const int y2 = kMarginTop + h - s * h / steps;
        out << "<rect x=\"" << bx << "\" y=\"" << y << "\" width=\"16\" height=\"" << y2 - y << "\" fill=\""
            << hex(bar_color(bar_lo + t * (bar_hi - bar_lo))) << "\"/>\n";
    }
    out << "<rect x=\"" << bx << "\" y=\"" << kMarginTop << "\" width=\"16\" height=\"" << h
        << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    for (int t = 0; t <= 2; ++t) {
        const int y = kMarginTop + h - t * h / 2;
        out << "<text x=\"" << bx + 22 << "\" y=\"" << y + 4 << "\">" << num(bar_lo + t * (bar_hi - bar_lo) / 2)
            << "</text>\n";
    }
    out << "</svg>\n";
}

std::string provenance(const GridMetadata& m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", m.relative_bound);
    return "system=" + m.system_id + " seed=" + std::to_string(m.seed) + " config_hash=" + m.config_hash +
           " relative_bound=" + buf;
}

}  // namespace

Rgb probability_color(double p) {
    if (!(p >= 0.0)) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p <= 0.5 ? mix(kBlue, kYellow, p / 0.5) : mix(kYellow, kRed, (p - 0.5) / 0.5);
}

Rgb signed_color(double v, double limit) {
    if (!(limit > 0.0)) limit = 1.0;
    const double t = std::clamp(v / limit, -1.0, 1.0);
    return t < 0.0 ? mix(kWhite, kBlue, -t) : mix(kWhite, kRed, t);
}

std::string render_probability_svg(const ProbabilityGrid& grid, const RenderOptions& options) {
    std::ostringstream out;
    const Frame f{grid.nx, grid.ny, options.cell_px, grid.omega_edges, grid.amplitude_edges};
    write_svg(
        out, f,
        [&](int i, int j) -> std::optional<Rgb> {
            if (grid.total_counts[grid.index(i, j)] == 0) return std::nullopt;
            return probability_color(probability(grid, i, j).value);
        },
        probability_color, 0.0, 1.0, "cross-well probability; " + provenance(grid.metadata), options);
    return out.str();
}

std::string render_difference_svg(const DifferenceMap& diff, const GridMetadata& a, const GridMetadata& b,
                                  const RenderOptions& options) {
    double limit = 0.0;
    for (const auto& v : diff.values)
        if (v) limit = std::max(limit, std::abs(*v));
    if (limit == 0.0) limit = 1.0;
    std::ostringstream out;
    const Frame f{diff.nx, diff.ny, options.cell_px, diff.omega_edges, diff.amplitude_edges};
    write_svg(
        out, f,
        [&](int i, int j) -> std::optional<Rgb> {
            const auto v = diff.at(i, j);
            if (!v) return std::nullopt;
            return signed_color(*v, limit);
        },
        [&](double v) { return signed_color(v, limit); }, -limit, limit,
        "probability difference b - a; a: " + provenance(a) + "; b: " + provenance(b), options);
    return out.str();
}

}  // namespace basinstab
