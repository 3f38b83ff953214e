#include "spherestat/stats.hpp"

#include <algorithm>
#include <cmath>

#include "spherestat/errors.hpp"

namespace spherestat::stats {

double mean(std::span<const double> v) {
    if (v.empty()) throw DomainError("mean of an empty sample");
    // Two-pass: rough mean, then a correction for accumulated rounding.
    double s = 0.0;
    for (double x : v) s += x;
    const double m = s / static_cast<double>(v.size());
    double c = 0.0;
    for (double x : v) c += x - m;
    return m + c / static_cast<double>(v.size());
}

double populationVariance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

double quantileSorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return quantileSorted(values, p);
}

} // namespace spherestat::stats
