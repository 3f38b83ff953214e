#pragma once

#include <span>
#include <vector>

namespace spherestat::stats {

double mean(std::span<const double> v);
/// Population variance (divides by n).
double populationVariance(std::span<const double> v);

/// Quantile with linear interpolation between order statistics
/// (h = (n - 1) p, the "type 7" rule). `sorted` must be ascending.
double quantileSorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

} // namespace spherestat::stats
