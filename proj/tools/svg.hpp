#pragma once

#include <string>
#include <vector>

namespace bargainlab::plot {

// Minimal deterministic SVG line chart: fixed canvas, numeric output via
// the csv float formatter so identical data renders identical bytes.
// NaN in a series breaks the polyline; NaN in a band skips the cell.
struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f6f8b";
    std::string label;
};

struct Band {
    std::vector<double> x;
    std::vector<double> lo;
    std::vector<double> hi;
    std::string color = "#1f6f8b";
};

struct LinePlot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Band> bands;
    std::vector<Series> lines;

    void add_line(Series s) { lines.push_back(std::move(s)); }
    void add_band(Band b) { bands.push_back(std::move(b)); }

    std::string render() const;
};

void write_svg(const std::string& path, const LinePlot& plot);

} // namespace bargainlab::plot
