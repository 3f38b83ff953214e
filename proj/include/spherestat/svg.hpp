#pragma once

#include <array>
#include <string>
#include <vector>

#include "spherestat/coords.hpp"

// Static SVG 1.1 charts: line, scatter and bar series on linear axes, and a
// Mollweide map of coloured points.
namespace spherestat::svg {

enum class Style { line, points, bars };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y; // NaN values are skipped
    Style style = Style::line;
    std::string color; // empty: palette colour
};

struct Chart {
    std::string title;
    std::string xLabel;
    std::string yLabel;
    std::vector<Series> series;
    int width = 720;
    int height = 480;
};

std::string render(const Chart& chart);

/// Mollweide coordinates, x in [-2 sqrt 2, 2 sqrt 2], y in [-sqrt 2, sqrt 2].
/// The auxiliary angle is solved with 25 Newton steps.
std::array<double, 2> mollweide(const SphericalPoint& p);

/// 256-entry blue-white-red ramp; t is clamped to [0, 1].
std::string rampColor(double t);

std::string renderMollweide(const std::vector<SphericalPoint>& points, const std::vector<double>& values,
                            const std::string& title, int width = 800);

void writeFile(const std::string& path, const std::string& svg);

} // namespace spherestat::svg
