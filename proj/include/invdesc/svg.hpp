/**
 * @file svg.hpp
 * @brief Minimal line-plot SVG output with a fixed 640x400 viewBox.
 */
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace invdesc {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    double stroke_width = 1.5;
    double opacity = 1.0;
};

/// Shaded region between lo(x) and hi(x).
struct SvgBand {
    std::vector<double> x;
    std::vector<double> lo;
    std::vector<double> hi;
    std::string color = "#1f77b4";
    double opacity = 0.2;
};

struct SvgPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SvgSeries> series;
    std::vector<SvgBand> bands;
};

/// Polylines scaled to the joint data range of all series and bands.
std::string render_svg(const SvgPlot& plot);
/// Throws std::runtime_error when the file cannot be written.
void write_svg(const SvgPlot& plot, const std::filesystem::path& path);

}  // namespace invdesc
