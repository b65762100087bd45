#include "ellq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ellq {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

struct Axis {
    bool log = false;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    [[nodiscard]] bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
    [[nodiscard]] double map(double v) const { return log ? std::log10(v) : v; }
    void include(double v) {
        if (!usable(v)) return;
        lo = std::min(lo, map(v));
        hi = std::max(hi, map(v));
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (log) {
            lo = std::floor(lo);
            hi = std::ceil(hi);
            if (hi <= lo) hi = lo + 1.0;
        } else {
            if (hi <= lo) {
                const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
                lo -= pad;
                hi += pad;
            }
        }
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

const char* dash(LineStyle style) {
    switch (style) {
        case LineStyle::dashed: return " stroke-dasharray=\"8,5\"";
        case LineStyle::dashdot: return " stroke-dasharray=\"9,4,2,4\"";
        case LineStyle::dotted: return " stroke-dasharray=\"2,3\"";
        default: return "";
    }
}

// (value, label) pairs in mapped coordinates
std::vector<std::pair<double, std::string>> ticks(const Axis& axis) {
    std::vector<std::pair<double, std::string>> out;
    if (axis.log) {
        const int decades = static_cast<int>(axis.hi - axis.lo);
        const int stride = std::max(1, decades / 8 + (decades % 8 ? 1 : 0));
        for (int e = static_cast<int>(axis.lo); e <= static_cast<int>(axis.hi); e += stride) {
            out.emplace_back(e, "1e" + std::to_string(e));
        }
        return out;
    }
    const double raw = (axis.hi - axis.lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    for (double v = std::ceil(axis.lo / step) * step; v <= axis.hi + 1e-9 * step; v += step) {
        out.emplace_back(v, fmt(std::abs(v) < 1e-12 * step ? 0.0 : v));
    }
    return out;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    Axis ax{spec.log_x};
    Axis ay{spec.log_y};
    for (const auto& s : spec.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
            ax.include(s.x[i]);
            ay.include(s.y[i]);
        }
    }
    for (const auto& b : spec.bands) {
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            ax.include(b.x[i]);
            ay.include(b.lower[i]);
            ay.include(b.upper[i]);
        }
    }
    for (const auto& v : spec.vertical) ax.include(v.value);
    for (const auto& h : spec.horizontal) ay.include(h.value);
    ax.finish();
    ay.finish();

    const double left = 80.0, right = 190.0, top = 40.0, bottom = 55.0;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;
    auto px = [&](double v) { return left + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double v) { return top + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };
    auto mx = [&](double m) { return left + (m - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto my = [&](double m) { return top + ph - (m - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream o;
    o.precision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
      << "</text>\n";

    for (const auto& [m, label] : ticks(ax)) {
        const double x = mx(m);
        o << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
          << "\" stroke=\"#e6e6e6\"/>\n";
        o << "<text x=\"" << x << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << label << "</text>\n";
    }
    for (const auto& [m, label] : ticks(ay)) {
        const double y = my(m);
        o << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
          << "\" stroke=\"#e6e6e6\"/>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << label << "</text>\n";
    }
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << spec.height - 12 << "\" text-anchor=\"middle\">"
      << escape(spec.x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(spec.y_label) << "</text>\n";

    o << "<g>\n";
    for (const auto& b : spec.bands) {
        std::ostringstream pts;
        pts.precision(6);
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            if (ax.usable(b.x[i]) && ay.usable(b.upper[i])) pts << px(b.x[i]) << ',' << py(b.upper[i]) << ' ';
        }
        for (std::size_t i = b.x.size(); i-- > 0;) {
            const double lower = ay.usable(b.lower[i]) ? b.lower[i] : std::pow(10.0, ay.lo);
            if (ax.usable(b.x[i])) pts << px(b.x[i]) << ',' << py(lower) << ' ';
        }
        o << "<polygon points=\"" << pts.str() << "\" fill=\"#999999\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
    }

    std::size_t color = 0;
    for (const auto& s : spec.series) {
        const char* c = kPalette[color++ % std::size(kPalette)];
        std::ostringstream path;
        path.precision(6);
        bool pen = false;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) {
                pen = false;
                continue;
            }
            path << (pen ? 'L' : 'M') << px(s.x[i]) << ' ' << py(s.y[i]) << ' ';
            pen = true;
            if (s.markers) {
                o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << c
                  << "\"/>\n";
            }
        }
        o << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.6\""
          << dash(s.style) << "/>\n";
    }
    for (const auto& v : spec.vertical) {
        if (!ax.usable(v.value)) continue;
        o << "<line x1=\"" << px(v.value) << "\" y1=\"" << top << "\" x2=\"" << px(v.value) << "\" y2=\"" << top + ph
          << "\" stroke=\"black\" stroke-width=\"1.2\"" << dash(v.style) << "/>\n";
    }
    for (const auto& h : spec.horizontal) {
        if (!ay.usable(h.value)) continue;
        o << "<line x1=\"" << left << "\" y1=\"" << py(h.value) << "\" x2=\"" << left + pw << "\" y2=\""
          << py(h.value) << "\" stroke=\"#555555\" stroke-width=\"1.2\"" << dash(h.style) << "/>\n";
    }
    o << "</g>\n";

    // legend
    double ly = top + 8;
    const double lx = left + pw + 14;
    color = 0;
    for (const auto& s : spec.series) {
        const char* c = kPalette[color++ % std::size(kPalette)];
        o << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
          << c << "\" stroke-width=\"1.6\"" << dash(s.style) << "/>\n";
        o << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
        ly += 18;
    }
    for (const auto& b : spec.bands) {
        o << "<rect x=\"" << lx << "\" y=\"" << ly - 5 << "\" width=\"24\" height=\"10\" fill=\"#999999\" "
          << "fill-opacity=\"0.25\"/>\n";
        o << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << escape(b.label) << "</text>\n";
        ly += 18;
    }
    for (const auto* group : {&spec.vertical, &spec.horizontal}) {
        for (const auto& r : *group) {
            o << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly
              << "\" stroke=\"black\" stroke-width=\"1.2\"" << dash(r.style) << "/>\n";
            o << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << escape(r.label) << "</text>\n";
            ly += 18;
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace ellq
