#pragma once

#include <string>
#include <vector>

namespace ellq {

enum class LineStyle { solid, dashed, dashdot, dotted };

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    LineStyle style = LineStyle::solid;
    bool markers = false;
};

/// Shaded region between two curves sharing x.
struct PlotBand {
    std::string label;
    std::vector<double> x;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct ReferenceLine {
    std::string label;
    double value = 0.0;
    LineStyle style = LineStyle::dashed;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;
    std::vector<PlotBand> bands;
    std::vector<ReferenceLine> vertical;
    std::vector<ReferenceLine> horizontal;
    int width = 720;
    int height = 460;
};

/// Standalone SVG document. Points that are not finite (or not positive on a
/// log axis) break the polyline instead of being drawn.
[[nodiscard]] std::string render_svg(const PlotSpec& spec);

}  // namespace ellq
