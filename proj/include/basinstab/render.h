#pragma once

// SVG maps over the (frequency, amplitude) grid.

#include "basinstab/gridmap.h"

#include <array>
#include <string>

namespace basinstab {

struct Rgb {
    int r = 0;
    int g = 0;
    int b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Blue at 0, yellow at 0.5, red at 1. Values are clamped to [0, 1].
Rgb probability_color(double p);

// Blue for negative, white at 0, red for positive; |v| >= limit saturates.
Rgb signed_color(double v, double limit);

struct RenderOptions {
    int cell_px = 12;
    std::string title;
    std::string omega_label = "forcing frequency";
    std::string amplitude_label = "forcing amplitude";
};

// Frequency on x, amplitude on y (increasing upwards). Empty boxes are grey.
// Output bytes depend only on the inputs.
std::string render_probability_svg(const ProbabilityGrid& grid, const RenderOptions& options = {});

// Signed difference map; the colour scale is symmetric around 0.
std::string render_difference_svg(const DifferenceMap& diff, const GridMetadata& a, const GridMetadata& b,
                                  const RenderOptions& options = {});

}  // namespace basinstab
