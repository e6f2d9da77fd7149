// disp and nbc: distance structure of the best points and nearest-better relations.
#include "elaprobe/errors.hpp"
#include "elaprobe/features.hpp"
#include "elaprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace elaprobe::features {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Row-major copy so distance loops read contiguous memory.
std::vector<double> row_major(const Eigen::MatrixXd& X) {
    std::vector<double> out(static_cast<std::size_t>(X.size()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out.data(), X.rows(), X.cols()) = X;
    return out;
}

inline double distance(const double* a, const double* b, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return std::sqrt(s);
}

// Indices sorted by (y, index).
std::vector<Eigen::Index> fitness_order(const Eigen::VectorXd& y) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return y[a] < y[b]; });
    return order;
}

struct DistanceStats {
    double mean = 0.0;
    double median = 0.0;
};

DistanceStats subset_distance_stats(const std::vector<double>& rows, std::span<const Eigen::Index> subset,
                                    Eigen::Index d) {
    std::vector<double> dist;
    dist.reserve(subset.size() * (subset.size() - 1) / 2);
    for (std::size_t a = 0; a < subset.size(); ++a)
        for (std::size_t b = a + 1; b < subset.size(); ++b)
            dist.push_back(distance(&rows[subset[a] * d], &rows[subset[b] * d], d));
    DistanceStats s;
    s.mean = stats::mean(dist);
    s.median = stats::median_inplace(dist);
    return s;
}

double ratio_or_one(double num, double den) { return den == 0.0 && num == 0.0 ? 1.0 : num / den; }

}  // namespace

Eigen::Index disp_subset_size(int percent, Eigen::Index n) {
    const Eigen::Index k = (static_cast<Eigen::Index>(percent) * n + 99) / 100;
    return std::min(n, std::max<Eigen::Index>(2, k));
}

SetResult disp(const EvaluatedSample& sample) {
    validate(sample);
    const Eigen::Index n = sample.n();
    const Eigen::Index d = sample.d();
    const std::vector<double> rows = row_major(sample.X);

    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) all.push_back(distance(&rows[i * d], &rows[j * d], d));
    const double full_mean = stats::mean(all);
    const double full_median = stats::median_inplace(all);

    const std::vector<Eigen::Index> order = fitness_order(sample.y);
    std::array<DistanceStats, kDispQuantilesPercent.size()> best{};
    for (std::size_t q = 0; q < kDispQuantilesPercent.size(); ++q) {
        const Eigen::Index k = disp_subset_size(kDispQuantilesPercent[q], n);
        best[q] = subset_distance_stats(rows, std::span<const Eigen::Index>(order.data(), static_cast<std::size_t>(k)), d);
    }

    SetResult out;
    out.values.reserve(16);
    for (const auto& s : best) out.values.push_back(ratio_or_one(s.mean, full_mean));
    for (const auto& s : best) out.values.push_back(ratio_or_one(s.median, full_median));
    for (const auto& s : best) out.values.push_back(s.mean - full_mean);
    for (const auto& s : best) out.values.push_back(s.median - full_median);
    if (full_mean == 0.0) out.flags.emplace_back("disp:coincident_points");
    return out;
}

NearestBetter nearest_better(const EvaluatedSample& sample) {
    validate(sample);
    const Eigen::Index n = sample.n();
    const Eigen::Index d = sample.d();
    const std::vector<double> rows = row_major(sample.X);
    const std::vector<Eigen::Index> order = fitness_order(sample.y);
    std::vector<Eigen::Index> rank(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) rank[order[r]] = r;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    NearestBetter nb;
    nb.nn_distance.assign(static_cast<std::size_t>(n), kInf);
    nb.nb_distance.assign(static_cast<std::size_t>(n), kInf);
    nb.nb_index.assign(static_cast<std::size_t>(n), -1);
    nb.best = order[0];

    // Candidates reach each point in increasing index order, so strict '<' keeps the lowest index on ties.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* xi = &rows[i * d];
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist = distance(xi, &rows[j * d], d);
            nb.nn_distance[i] = std::min(nb.nn_distance[i], dist);
            nb.nn_distance[j] = std::min(nb.nn_distance[j], dist);
            const bool i_better = rank[i] < rank[j];
            const Eigen::Index worse = i_better ? j : i;
            const Eigen::Index better = i_better ? i : j;
            if (dist < nb.nb_distance[worse]) {
                nb.nb_distance[worse] = dist;
                nb.nb_index[worse] = better;
            }
        }
    }

    double far = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) far = std::max(far, distance(&rows[nb.best * d], &rows[j * d], d));
    nb.nb_distance[nb.best] = far;
    return nb;
}

SetResult nbc(const EvaluatedSample& sample) {
    validate(sample);
    SetResult out;
    if (sample.y.maxCoeff() == sample.y.minCoeff()) {
        out.values.assign(5, kNaN);
        out.flags.emplace_back("nbc:degenerate");
        return out;
    }
    const NearestBetter nb = nearest_better(sample);
    const auto n = static_cast<std::size_t>(sample.n());

    std::vector<double> ratio(n);
    for (std::size_t i = 0; i < n; ++i) ratio[i] = ratio_or_one(nb.nn_distance[i], nb.nb_distance[i]);
    std::vector<double> indegree(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (nb.nb_index[i] >= 0) indegree[static_cast<std::size_t>(nb.nb_index[i])] += 1.0;

    const std::span<const double> y(sample.y.data(), n);
    out.values = {
        stats::sample_sd(nb.nn_distance) / stats::sample_sd(nb.nb_distance),
        stats::mean(nb.nn_distance) / stats::mean(nb.nb_distance),
        stats::pearson(nb.nn_distance, nb.nb_distance),
        stats::sample_sd(ratio) / stats::mean(ratio),
        stats::pearson(indegree, y),
    };
    return out;
}

}  // namespace elaprobe::features
