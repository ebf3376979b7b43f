#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bargainlab/csv.hpp"
#include "bargainlab/errors.hpp"

namespace bargainlab::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 48.0;

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void take(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool ok() const { return lo <= hi; }
    void pad() {
        if (!ok()) {
            lo = 0.0;
            hi = 1.0;
            return;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
            return;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

std::string num(double v) { return csv::format_double(v, 6); }

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string LinePlot::render() const {
    Range rx, ry;
    for (const auto& b : bands) {
        for (std::size_t i = 0; i < b.x.size(); ++i) {
            if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i])) continue;
            rx.take(b.x[i]);
            ry.take(b.lo[i]);
            ry.take(b.hi[i]);
        }
    }
    for (const auto& s : lines) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            rx.take(s.x[i]);
            ry.take(s.y[i]);
        }
    }
    rx.pad();
    ry.pad();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + pw * (v - rx.lo) / (rx.hi - rx.lo); };
    auto py = [&](double v) { return kTop + ph * (ry.hi - v) / (ry.hi - ry.lo); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth)
        << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << " "
        << num(kHeight) << "\">\n";
    svg << "<rect width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
        << "\" fill=\"#ffffff\"/>\n";

    // Axis ticks: five even divisions per axis.
    svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 5.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 5.0;
        const double gx = px(fx);
        const double gy = py(fy);
        svg << "<line x1=\"" << num(gx) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(gx)
            << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"#e0e0e0\"/>\n";
        svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(gy) << "\" x2=\""
            << num(kLeft + pw) << "\" y2=\"" << num(gy) << "\" stroke=\"#e0e0e0\"/>\n";
        svg << "<text x=\"" << num(gx) << "\" y=\"" << num(kTop + ph + 18.0)
            << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
        svg << "<text x=\"" << num(kLeft - 8.0) << "\" y=\"" << num(gy + 4.0)
            << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
    }
    svg << "</g>\n";

    for (const auto& b : bands) {
        // Forward pass along hi, return pass along lo; gaps close the
        // polygon and reopen a fresh one.
        std::vector<std::pair<std::size_t, std::size_t>> runs;
        std::size_t start = 0;
        bool open = false;
        for (std::size_t i = 0; i <= b.x.size(); ++i) {
            const bool good = i < b.x.size() && std::isfinite(b.lo[i]) &&
                              std::isfinite(b.hi[i]) && std::isfinite(b.x[i]);
            if (good && !open) {
                start = i;
                open = true;
            } else if (!good && open) {
                runs.emplace_back(start, i);
                open = false;
            }
        }
        for (const auto& [a, e] : runs) {
            if (e - a < 2) continue;
            svg << "<polygon fill=\"" << b.color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (std::size_t i = a; i < e; ++i) {
                svg << num(px(b.x[i])) << "," << num(py(b.hi[i])) << " ";
            }
            for (std::size_t i = e; i-- > a;) {
                svg << num(px(b.x[i])) << "," << num(py(b.lo[i]));
                if (i != a) svg << " ";
            }
            svg << "\"/>\n";
        }
    }

    for (const auto& s : lines) {
        bool open = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const bool good = std::isfinite(s.x[i]) && std::isfinite(s.y[i]);
            if (good && !open) {
                svg << "<polyline fill=\"none\" stroke=\"" << s.color
                    << "\" stroke-width=\"1.5\" points=\"";
                open = true;
            }
            if (good) {
                svg << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
            } else if (open) {
                svg << "\"/>\n";
                open = false;
            }
        }
        if (open) svg << "\"/>\n";
    }

    svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
        << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    svg << "<g font-family=\"sans-serif\" fill=\"#111111\">\n";
    svg << "<text x=\"" << num(kLeft + pw / 2.0) << "\" y=\"20\" font-size=\"15\" "
        << "text-anchor=\"middle\">" << escape(title) << "</text>\n";
    svg << "<text x=\"" << num(kLeft + pw / 2.0) << "\" y=\"" << num(kHeight - 10.0)
        << "\" font-size=\"13\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << num(kTop + ph / 2.0) << "\" font-size=\"13\" "
        << "text-anchor=\"middle\" transform=\"rotate(-90 16 " << num(kTop + ph / 2.0)
        << ")\">" << escape(ylabel) << "</text>\n";

    // Legend for labeled series, top-right of the plot area.
    double ly = kTop + 14.0;
    for (const auto& s : lines) {
        if (s.label.empty()) continue;
        svg << "<line x1=\"" << num(kLeft + pw - 150.0) << "\" y1=\"" << num(ly - 4.0)
            << "\" x2=\"" << num(kLeft + pw - 126.0) << "\" y2=\"" << num(ly - 4.0)
            << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(kLeft + pw - 120.0) << "\" y=\"" << num(ly)
            << "\" font-size=\"12\">" << escape(s.label) << "</text>\n";
        ly += 16.0;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

void write_svg(const std::string& path, const LinePlot& plot) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write svg file '" + path + "'");
    out << plot.render();
    if (!out) throw IoError("failed while writing svg file '" + path + "'");
}

} // namespace bargainlab::plot
