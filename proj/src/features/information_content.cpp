// ic: entropy of slope-sign symbols along a nearest-neighbour tour.
#include "elaprobe/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace elaprobe::features {

namespace {

int symbol(double slope, double eps) {
    if (slope < -eps) return -1;
    if (slope > eps) return 1;
    return 0;
}

std::vector<double> epsilon_grid(double max_slope) {
    std::vector<double> grid;
    grid.reserve(kIcLogGridSize + 1);
    grid.push_back(0.0);
    const double lo = std::log10(kIcGridLowerFactor * max_slope);
    const double hi = std::log10(max_slope);
    for (int k = 0; k < kIcLogGridSize; ++k) {
        if (k == 0) {
            grid.push_back(kIcGridLowerFactor * max_slope);
        } else if (k == kIcLogGridSize - 1) {
            grid.push_back(max_slope);
        } else {
            grid.push_back(std::pow(10.0, lo + (hi - lo) * k / (kIcLogGridSize - 1)));
        }
    }
    return grid;
}

}  // namespace

std::vector<Eigen::Index> nearest_neighbour_tour(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    std::vector<double> rows(static_cast<std::size_t>(X.size()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(rows.data(), n, d) = X;

    // Unvisited indices kept in increasing order so the first minimum is the lowest index.
    std::vector<Eigen::Index> open;
    open.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 1; i < n; ++i) open.push_back(i);

    std::vector<Eigen::Index> tour;
    tour.reserve(static_cast<std::size_t>(n));
    Eigen::Index current = 0;
    tour.push_back(current);
    while (!open.empty()) {
        const double* c = &rows[current * d];
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_pos = 0;
        for (std::size_t p = 0; p < open.size(); ++p) {
            const double* q = &rows[open[p] * d];
            double s = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = c[k] - q[k];
                s += diff * diff;
            }
            if (s < best) {
                best = s;
                best_pos = p;
            }
        }
        current = open[best_pos];
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(best_pos));
        tour.push_back(current);
    }
    return tour;
}

std::vector<double> tour_slopes(const EvaluatedSample& sample, const std::vector<Eigen::Index>& tour) {
    std::vector<double> slopes;
    slopes.reserve(tour.size());
    for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
        const double dist = (sample.X.row(tour[i + 1]) - sample.X.row(tour[i])).norm();
        const double dy = sample.y[tour[i + 1]] - sample.y[tour[i]];
        slopes.push_back(dist > 0.0 ? dy / dist : 0.0);
    }
    return slopes;
}

double information_entropy(std::span<const double> slopes, double epsilon) {
    if (slopes.size() < 2) return 0.0;
    std::array<std::size_t, 9> counts{};
    int prev = symbol(slopes[0], epsilon);
    for (std::size_t i = 1; i < slopes.size(); ++i) {
        const int cur = symbol(slopes[i], epsilon);
        if (cur != prev) ++counts[static_cast<std::size_t>((prev + 1) * 3 + (cur + 1))];
        prev = cur;
    }
    const double pairs = static_cast<double>(slopes.size() - 1);
    double h = 0.0;
    for (const std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / pairs;
        h -= p * std::log(p);
    }
    return h / std::log(6.0);
}

double partial_information(std::span<const double> slopes, double epsilon) {
    if (slopes.empty()) return 0.0;
    std::size_t runs = 0;
    int last = 0;
    for (const double s : slopes) {
        const int cur = symbol(s, epsilon);
        if (cur == 0 || cur == last) continue;
        ++runs;
        last = cur;
    }
    return static_cast<double>(runs) / static_cast<double>(slopes.size());
}

InformationCurve information_curve(const EvaluatedSample& sample) {
    validate(sample);
    InformationCurve curve;
    curve.tour = nearest_neighbour_tour(sample.X);
    curve.slopes = tour_slopes(sample, curve.tour);
    double max_slope = 0.0;
    for (double s : curve.slopes) max_slope = std::max(max_slope, std::abs(s));
    if (max_slope == 0.0) return curve;
    curve.epsilon = epsilon_grid(max_slope);
    for (const double eps : curve.epsilon) {
        curve.entropy.push_back(information_entropy(curve.slopes, eps));
        curve.partial.push_back(partial_information(curve.slopes, eps));
    }
    return curve;
}

SetResult ic(const EvaluatedSample& sample) {
    const InformationCurve curve = information_curve(sample);
    SetResult out;
    if (curve.epsilon.empty()) {
        out.values.assign(5, 0.0);
        out.flags.emplace_back("ic:degenerate");
        return out;
    }
    const auto& eps = curve.epsilon;
    const double max_slope = eps.back();

    std::size_t arg_max = 0;
    for (std::size_t k = 1; k < eps.size(); ++k)
        if (curve.entropy[k] > curve.entropy[arg_max]) arg_max = k;

    // Log-valued thresholds search the positive part of the grid only.
    double eps_s = std::log10(max_slope);
    for (std::size_t k = 1; k < eps.size(); ++k) {
        if (curve.entropy[k] < 0.05) {
            eps_s = std::log10(eps[k]);
            break;
        }
    }
    const double m0 = curve.partial[0];
    double eps_ratio = std::log10(max_slope);
    for (std::size_t k = 1; k < eps.size(); ++k) {
        if (curve.partial[k] < 0.5 * m0) {
            eps_ratio = std::log10(eps[k]);
            break;
        }
    }
    out.values = {curve.entropy[arg_max], eps_s, eps[arg_max], eps_ratio, m0};
    return out;
}

}  // namespace elaprobe::features
