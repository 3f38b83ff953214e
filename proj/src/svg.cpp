#include "spherestat/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spherestat/errors.hpp"

namespace spherestat::svg {

namespace {

const std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tickLabel(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-300 ? 0.0 : v);
    return buf;
}

double niceStep(double range, int targetTicks) {
    const double raw = range / targetTicks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
    return nice * mag;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo <= 0.0) {
            const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
            lo -= pad;
            hi += pad;
        }
    }
};

} // namespace

std::string render(const Chart& chart) {
    const double W = chart.width, H = chart.height;
    const double left = 80, right = 20, top = chart.title.empty() ? 20 : 44, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;

    Range xr, yr;
    bool hasBars = false;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            xr.add(s.x[i]);
            yr.add(s.y[i]);
        }
        if (s.style == Style::bars) hasBars = true;
    }
    if (hasBars) yr.add(0.0);
    xr.finish();
    yr.finish();
    if (hasBars) {
        // Leave room for half a bar at each end.
        const double pad = 0.5 * (xr.hi - xr.lo) / std::max<std::size_t>(1, chart.series.front().x.size());
        xr.lo -= pad;
        xr.hi += pad;
    }
    const double ys = niceStep(yr.hi - yr.lo, 6);
    yr.lo = std::floor(yr.lo / ys) * ys;
    yr.hi = std::ceil(yr.hi / ys) * ys;

    auto X = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto Y = [&](double v) { return top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << chart.width << "\" height=\""
      << chart.height << "\" viewBox=\"0 0 " << chart.width << ' ' << chart.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    if (!chart.title.empty())
        o << "<text x=\"" << num(W / 2) << "\" y=\"26\" text-anchor=\"middle\" font-size=\"16\">" << escape(chart.title)
          << "</text>\n";

    const double xs = niceStep(xr.hi - xr.lo, 8);
    for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
        o << "<line x1=\"" << num(X(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(X(t)) << "\" y2=\""
          << num(top + ph) << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << num(X(t)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
          << tickLabel(t) << "</text>\n";
    }
    for (double t = yr.lo; t <= yr.hi + 1e-9 * ys; t += ys) {
        o << "<line x1=\"" << num(left) << "\" y1=\"" << num(Y(t)) << "\" x2=\"" << num(left + pw) << "\" y2=\""
          << num(Y(t)) << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(Y(t) + 4) << "\" text-anchor=\"end\">" << tickLabel(t)
          << "</text>\n";
    }
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 16) << "\" text-anchor=\"middle\">"
      << escape(chart.xLabel) << "</text>\n";
    o << "<text transform=\"translate(18," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(chart.yLabel) << "</text>\n";

    std::size_t k = 0;
    for (const auto& s : chart.series) {
        const std::string color = s.color.empty() ? kPalette[k % kPalette.size()] : s.color;
        ++k;
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.style == Style::line) {
            std::string path;
            bool pen = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.y[i])) {
                    pen = false;
                    continue;
                }
                path += (pen ? " L" : " M") + num(X(s.x[i])) + ' ' + num(Y(s.y[i]));
                pen = true;
            }
            o << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        } else if (s.style == Style::points) {
            for (std::size_t i = 0; i < n; ++i)
                if (std::isfinite(s.y[i]))
                    o << "<circle cx=\"" << num(X(s.x[i])) << "\" cy=\"" << num(Y(s.y[i])) << "\" r=\"3\" fill=\""
                      << color << "\"/>\n";
        } else {
            const double bw = n > 0 ? 0.8 * pw / static_cast<double>(n) : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.y[i])) continue;
                const double y0 = Y(std::max(0.0, yr.lo)), y1 = Y(s.y[i]);
                o << "<rect x=\"" << num(X(s.x[i]) - bw / 2) << "\" y=\"" << num(std::min(y0, y1)) << "\" width=\""
                  << num(bw) << "\" height=\"" << num(std::abs(y1 - y0)) << "\" fill=\"" << color << "\"/>\n";
            }
        }
    }
    // Legend
    double ly = top + 16;
    k = 0;
    for (const auto& s : chart.series) {
        const std::string color = s.color.empty() ? kPalette[k % kPalette.size()] : s.color;
        ++k;
        if (s.label.empty()) continue;
        o << "<rect x=\"" << num(left + pw - 150) << "\" y=\"" << num(ly - 9) << "\" width=\"12\" height=\"10\" fill=\""
          << color << "\"/>\n";
        o << "<text x=\"" << num(left + pw - 132) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
        ly += 16;
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

std::array<double, 2> mollweide(const SphericalPoint& p) {
    const double lat = kPi / 2 - p.theta;
    double lon = wrapTwoPi(p.phi);
    if (lon > kPi) lon -= kTwoPi;
    double t = lat;
    const double target = kPi * std::sin(lat);
    for (int i = 0; i < 25; ++i) {
        const double denom = 2.0 + 2.0 * std::cos(2.0 * t);
        if (std::abs(denom) < 1e-15) break;
        t -= (2.0 * t + std::sin(2.0 * t) - target) / denom;
    }
    // Geographic convention: longitude increases to the left on sky maps.
    return {-2.0 * std::sqrt(2.0) / kPi * lon * std::cos(t), std::sqrt(2.0) * std::sin(t)};
}

std::string rampColor(double t) {
    struct Stop {
        double at;
        double r, g, b;
    };
    static const std::array<Stop, 7> stops{{{0.0, 0, 0, 255},
                                            {0.33, 0, 140, 255},
                                            {0.5, 255, 237, 217},
                                            {0.67, 255, 180, 30},
                                            {0.83, 255, 75, 0},
                                            {0.92, 200, 20, 0},
                                            {1.0, 100, 0, 0}}};
    if (!std::isfinite(t)) t = 0.5;
    const int idx = std::clamp(static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0)), 0, 255);
    const double u = idx / 255.0;
    std::size_t j = 1;
    while (j + 1 < stops.size() && stops[j].at < u) ++j;
    const Stop& a = stops[j - 1];
    const Stop& b = stops[j];
    const double f = (u - a.at) / (b.at - a.at);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(a.r + f * (b.r - a.r))),
                  static_cast<int>(std::lround(a.g + f * (b.g - a.g))),
                  static_cast<int>(std::lround(a.b + f * (b.b - a.b))));
    return buf;
}

std::string renderMollweide(const std::vector<SphericalPoint>& points, const std::vector<double>& values,
                            const std::string& title, int width) {
    if (points.size() != values.size()) throw DomainError("points and values differ in length");
    const double W = width;
    const double H = W / 2.0 + 60.0;
    const double scale = (W - 40.0) / (4.0 * std::sqrt(2.0));
    const double cx = W / 2.0, cy = 40.0 + std::sqrt(2.0) * scale;

    std::vector<double> sorted;
    for (double v : values)
        if (std::isfinite(v)) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());
    // Colour limits at the 1st and 99th percentiles keep outliers from
    // washing out the map.
    double lo = 0.0, hi = 1.0;
    if (!sorted.empty()) {
        lo = sorted[static_cast<std::size_t>(0.01 * static_cast<double>(sorted.size() - 1))];
        hi = sorted[static_cast<std::size_t>(0.99 * static_cast<double>(sorted.size() - 1))];
        if (!(hi > lo)) hi = lo + 1.0;
    }
    const double radius = std::clamp(1.2 * W / std::sqrt(static_cast<double>(std::max<std::size_t>(points.size(), 1))) / 2.0,
                                     0.6, 4.0);

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\""
      << static_cast<int>(H) << "\" viewBox=\"0 0 " << width << ' ' << static_cast<int>(H) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        o << "<text x=\"" << num(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          << "font-size=\"16\">" << escape(title) << "</text>\n";
    o << "<ellipse cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" rx=\"" << num(2 * std::sqrt(2.0) * scale)
      << "\" ry=\"" << num(std::sqrt(2.0) * scale) << "\" fill=\"#f4f4f4\" stroke=\"black\"/>\n<g stroke=\"none\">\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(values[i])) continue;
        const auto xy = mollweide(points[i]);
        o << "<circle cx=\"" << num(cx + scale * xy[0]) << "\" cy=\"" << num(cy - scale * xy[1]) << "\" r=\""
          << num(radius) << "\" fill=\"" << rampColor((values[i] - lo) / (hi - lo)) << "\"/>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

void writeFile(const std::string& path, const std::string& svg) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path + "'");
    out << svg;
    if (!out) throw IoError("write to '" + path + "' failed");
}

} // namespace spherestat::svg
