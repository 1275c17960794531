#pragma once

// Self-contained SVG line plots for report series.

#include <optional>
#include <string>
#include <vector>

namespace sbmkit {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
    std::vector<PlotSeries> series;
    std::optional<double> reference;  // horizontal line, e.g. a predicted constant
    std::string reference_label = "predicted";
};

/// SVG document for the spec. Throws std::invalid_argument when there is
/// nothing to draw (no series, or no finite point usable on the chosen axes).
std::string render_svg(const PlotSpec& spec);

/// Writes render_svg(spec) to path. Nothing is written when rendering fails.
void emit_plot(const PlotSpec& spec, const std::string& path);

}  // namespace sbmkit
