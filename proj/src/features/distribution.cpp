// ela_distr: skewness, kurtosis and KDE peak count of the objective values.
#include "elaprobe/features.hpp"
#include "elaprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace elaprobe::features {

int count_kde_peaks(std::span<const double> y) {
    const auto n = y.size();
    const double sd = stats::sample_sd(y);
    const double spread = stats::iqr(y) / 1.34;
    double scale = std::min(sd, spread);
    if (!(scale > 0.0)) scale = sd;
    if (!(scale > 0.0)) return 1;
    const double h = 0.9 * scale * std::pow(static_cast<double>(n), -0.2);

    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double lo = *lo_it - 3.0 * h;
    const double hi = *hi_it + 3.0 * h;
    const double step = (hi - lo) / (kKdeGridSize - 1);

    // Kernel mass beyond 9 bandwidths is below 1e-17 of the peak and is skipped.
    std::vector<double> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());
    constexpr double kCutoff = 9.0;
    std::vector<double> density(kKdeGridSize, 0.0);
    for (int g = 0; g < kKdeGridSize; ++g) {
        const double t = lo + step * g;
        const auto first = std::lower_bound(sorted.begin(), sorted.end(), t - kCutoff * h);
        const auto last = std::upper_bound(first, sorted.end(), t + kCutoff * h);
        double sum = 0.0;
        for (auto it = first; it != last; ++it) {
            const double u = (t - *it) / h;
            sum += std::exp(-0.5 * u * u);
        }
        density[g] = sum / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
    }

    const double threshold = kKdePeakThreshold * *std::max_element(density.begin(), density.end());
    int peaks = 0;
    for (int g = 0; g < kKdeGridSize; ++g) {
        const bool rises = g == 0 || density[g] > density[g - 1];
        const bool holds = g == kKdeGridSize - 1 || density[g] >= density[g + 1];
        if (rises && holds && density[g] > threshold) ++peaks;
    }
    return std::max(peaks, 1);
}

SetResult ela_distr(const EvaluatedSample& sample) {
    validate(sample);
    const std::span<const double> y(sample.y.data(), static_cast<std::size_t>(sample.y.size()));
    const double n = static_cast<double>(y.size());
    const double m = stats::mean(y);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : y) {
        const double c = v - m;
        const double c2 = c * c;
        m2 += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    SetResult out;
    if (!(m2 > 0.0)) {
        out.values = {0.0, 0.0, 1.0};
        out.flags.emplace_back("ela_distr:degenerate");
        return out;
    }
    out.values = {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0, static_cast<double>(count_kde_peaks(y))};
    return out;
}

}  // namespace elaprobe::features
