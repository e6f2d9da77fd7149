#pragma once

#include <span>
#include <vector>

namespace elaprobe::stats {

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> v);
/// Median; averages the two middle values for even sizes. Copies its input.
double median(std::span<const double> v);
/// Median that reorders `v` in place instead of copying.
double median_inplace(std::span<double> v);
/// Linear-interpolation quantile (R type 7) of unsorted data.
double quantile(std::span<const double> v, double p);
double iqr(std::span<const double> v);
/// Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace elaprobe::stats
