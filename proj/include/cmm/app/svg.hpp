#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cmm::app::svg {

enum class Style { Line, Stem, Markers, ColorMarkers };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_err;         // optional symmetric error bars
    std::vector<double> color_value;   // ColorMarkers only
    Style style = Style::Line;
    std::string color = "#1f77b4";
    bool dashed = false;
    bool secondary_axis = false;       // plotted against the right-hand y axis
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string y2_label;
    std::string color_label;
    bool log_x = false;
    bool log_y = false;
    std::optional<std::pair<double, double>> x_range;
    std::optional<std::pair<double, double>> y_range;
    double width = 760.0;
    double height = 480.0;
    std::vector<Series> series;

    /// Self-contained SVG document. Output depends only on the plot contents.
    std::string render() const;
};

/// Viridis-like colour for t in [0, 1].
std::string colormap(double t);

} // namespace cmm::app::svg
