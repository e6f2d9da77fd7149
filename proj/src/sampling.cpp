#include "elaprobe/sampling.hpp"

#include "elaprobe/errors.hpp"
#include "elaprobe/io.hpp"
#include "elaprobe/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

namespace elaprobe::sampling {

namespace {

constexpr std::array<std::string_view, 5> kStrategyNames = {"random-mt", "random-randu", "lhs-centered",
                                                            "lhs-improved", "sobol"};

void check_size(int n, int d) {
    if (n <= 0 || d <= 0)
        throw InvalidSize("design needs n >= 1 and d >= 1, got n=" + std::to_string(n) + " d=" + std::to_string(d));
}

Design make_design(int n, int d, Strategy s, std::uint64_t seed) {
    Design design;
    design.points.resize(n, d);
    design.strategy = s;
    design.seed = seed;
    return design;
}

// Joe & Kuo (new-joe-kuo-6.21201) rows for dimensions 2..25: degree s, coefficient a, initial m_1..m_s.
struct DirectionRow {
    int degree;
    std::uint32_t coeff;
    std::array<std::uint32_t, 8> m;
};

constexpr std::array<DirectionRow, 24> kDirectionRows = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
}};

constexpr int kBits = 32;
using DirectionVector = std::array<std::uint32_t, kBits>;

DirectionVector direction_numbers(int dim) {
    DirectionVector v{};
    if (dim == 0) {
        for (int k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
        return v;
    }
    const DirectionRow& row = kDirectionRows[dim - 1];
    const int s = row.degree;
    for (int k = 0; k < s; ++k) v[k] = row.m[k] << (kBits - 1 - k);
    for (int k = s; k < kBits; ++k) {
        std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
        for (int l = 1; l < s; ++l)
            if ((row.coeff >> (s - 1 - l)) & 1u) value ^= v[k - l];
        v[k] = value;
    }
    return v;
}

}  // namespace

std::string_view to_string(Strategy s) { return kStrategyNames[static_cast<std::size_t>(strategy_index(s))]; }

std::optional<Strategy> parse_strategy(std::string_view name) {
    for (std::size_t i = 0; i < kStrategyNames.size(); ++i)
        if (kStrategyNames[i] == name) return kAllStrategies[i];
    return std::nullopt;
}

int strategy_index(Strategy s) { return static_cast<int>(s); }

Design generate(Strategy strategy, int n, int d, std::uint64_t seed) {
    switch (strategy) {
        case Strategy::RandomMT: return random_mt(n, d, seed);
        case Strategy::RandomRandu: return random_randu(n, d, seed);
        case Strategy::LhsCentered: return lhs_centered(n, d, seed);
        case Strategy::LhsImproved: return lhs_improved(n, d, seed);
        case Strategy::Sobol: return sobol(n, d, seed);
    }
    throw InvalidArgument("unknown strategy");
}

Design random_mt(int n, int d, std::uint64_t seed) {
    check_size(n, d);
    Design design = make_design(n, d, Strategy::RandomMT, seed);
    rng::MersenneTwister mt(rng::fold_seed32(seed));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) design.points(i, j) = mt.next_unit();
    return design;
}

Design random_randu(int n, int d, std::uint64_t seed) {
    check_size(n, d);
    Design design = make_design(n, d, Strategy::RandomRandu, seed);
    rng::Randu randu(rng::fold_seed32(seed));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) design.points(i, j) = randu.next_unit();
    return design;
}

Design lhs_centered(int n, int d, std::uint64_t seed) {
    check_size(n, d);
    Design design = make_design(n, d, Strategy::LhsCentered, seed);
    rng::MersenneTwister mt(rng::fold_seed32(seed));
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        rng::shuffle(mt, std::span<int>(perm));
        for (int i = 0; i < n; ++i) design.points(i, j) = (perm[i] + 0.5) / n;
    }
    return design;
}

double improved_lhs_target_distance(int n, int d) { return std::pow(static_cast<double>(n), -1.0 / d); }

// Greedy construction: each step draws kImprovedLhsCandidates points from the still-free
// intervals and keeps the one whose nearest-neighbour distance is closest to the target.
Design lhs_improved(int n, int d, std::uint64_t seed) {
    check_size(n, d);
    Design design = make_design(n, d, Strategy::LhsImproved, seed);
    rng::MersenneTwister mt(rng::fold_seed32(seed));
    const double target = improved_lhs_target_distance(n, d);

    std::vector<std::vector<int>> free_cells(static_cast<std::size_t>(d), std::vector<int>(static_cast<std::size_t>(n)));
    for (auto& cells : free_cells) std::iota(cells.begin(), cells.end(), 0);

    // Placed points, row-major.
    std::vector<double> placed;
    placed.reserve(static_cast<std::size_t>(n) * d);
    std::vector<std::uint32_t> slot(static_cast<std::size_t>(d));
    std::vector<double> point(static_cast<std::size_t>(d));
    std::vector<std::uint32_t> best_slot(static_cast<std::size_t>(d));
    std::vector<double> best_point(static_cast<std::size_t>(d));

    auto commit = [&](int row) {
        for (int j = 0; j < d; ++j) {
            auto& cells = free_cells[j];
            cells[best_slot[j]] = cells.back();
            cells.pop_back();
            design.points(row, j) = best_point[j];
            placed.push_back(best_point[j]);
        }
    };

    auto draw_candidate = [&](std::uint32_t remaining) {
        for (int j = 0; j < d; ++j) {
            slot[j] = rng::uniform_below(mt, remaining);
            point[j] = (free_cells[j][slot[j]] + mt.next_unit()) / n;
        }
    };

    draw_candidate(static_cast<std::uint32_t>(n));
    best_slot = slot;
    best_point = point;
    commit(0);

    for (int step = 1; step < n; ++step) {
        const auto remaining = static_cast<std::uint32_t>(n - step);
        double best_score = std::numeric_limits<double>::infinity();
        for (int c = 0; c < kImprovedLhsCandidates; ++c) {
            draw_candidate(remaining);
            double nearest_sq = std::numeric_limits<double>::infinity();
            for (int p = 0; p < step; ++p) {
                const double* q = &placed[static_cast<std::size_t>(p) * d];
                double dist = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double diff = point[j] - q[j];
                    dist += diff * diff;
                }
                nearest_sq = std::min(nearest_sq, dist);
            }
            const double score = std::abs(std::sqrt(nearest_sq) - target);
            if (score < best_score) {
                best_score = score;
                best_slot = slot;
                best_point = point;
            }
        }
        commit(step);
    }
    return design;
}

int sobol_max_dimension() { return static_cast<int>(kDirectionRows.size()) + 1; }

Eigen::MatrixXd sobol_sequence(std::uint64_t first_index, int n, int d) {
    check_size(n, d);
    if (d > sobol_max_dimension())
        throw UnsupportedDimension("Sobol' direction numbers cover d <= " + std::to_string(sobol_max_dimension()) +
                                   ", got " + std::to_string(d));
    if (first_index + static_cast<std::uint64_t>(n) > (std::uint64_t{1} << kBits))
        throw InvalidSize("Sobol' index range exceeds 2^32");

    std::vector<DirectionVector> v;
    v.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) v.push_back(direction_numbers(j));

    // Gray-code jump to the first index, then one xor per step.
    std::vector<std::uint32_t> x(static_cast<std::size_t>(d), 0u);
    const std::uint64_t gray = first_index ^ (first_index >> 1);
    for (int b = 0; b < kBits; ++b)
        if ((gray >> b) & 1u)
            for (int j = 0; j < d; ++j) x[j] ^= v[j][b];

    Eigen::MatrixXd points(n, d);
    std::uint64_t index = first_index;
    for (int i = 0; i < n; ++i, ++index) {
        for (int j = 0; j < d; ++j) points(i, j) = static_cast<double>(x[j]) * 0x1.0p-32;
        const int c = std::countr_one(index);
        if (c < kBits)
            for (int j = 0; j < d; ++j) x[j] ^= v[j][c];
    }
    return points;
}

std::uint32_t sobol_offset(std::uint64_t seed) {
    rng::MersenneTwister mt(rng::fold_seed32(seed));
    return rng::uniform_below(mt, kSobolOffsetRange);
}

Design sobol(int n, int d, std::uint64_t seed) {
    check_size(n, d);
    Design design;
    design.strategy = Strategy::Sobol;
    design.seed = seed;
    design.points = sobol_sequence(std::uint64_t{sobol_offset(seed)} + 1, n, d);
    return design;
}

Eigen::MatrixXd scale_to_domain(const Eigen::MatrixXd& unit_points, std::span<const double> lower,
                                std::span<const double> upper) {
    const auto d = unit_points.cols();
    if (static_cast<Eigen::Index>(lower.size()) != d || static_cast<Eigen::Index>(upper.size()) != d)
        throw DimensionMismatch("bounds have length " + std::to_string(lower.size()) + "/" +
                                std::to_string(upper.size()) + ", design has d=" + std::to_string(d));
    Eigen::MatrixXd out(unit_points.rows(), d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!(lower[j] < upper[j])) throw InvalidArgument("lower bound must be below upper bound");
        out.col(j) = lower[j] + unit_points.col(j).array() * (upper[j] - lower[j]);
    }
    return out;
}

Eigen::MatrixXd scale_to_domain(const Eigen::MatrixXd& unit_points, double lower, double upper) {
    const std::vector<double> lo(static_cast<std::size_t>(unit_points.cols()), lower);
    const std::vector<double> hi(static_cast<std::size_t>(unit_points.cols()), upper);
    return scale_to_domain(unit_points, lo, hi);
}

Eigen::MatrixXd scale_from_domain(const Eigen::MatrixXd& points, std::span<const double> lower,
                                  std::span<const double> upper) {
    const auto d = points.cols();
    if (static_cast<Eigen::Index>(lower.size()) != d || static_cast<Eigen::Index>(upper.size()) != d)
        throw DimensionMismatch("bounds do not match point dimension");
    Eigen::MatrixXd out(points.rows(), d);
    for (Eigen::Index j = 0; j < d; ++j) out.col(j) = (points.col(j).array() - lower[j]) / (upper[j] - lower[j]);
    return out;
}

double centered_l2_discrepancy(const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    const auto d = x.cols();
    if (n == 0 || d == 0) throw InvalidSize("empty design");
    const Eigen::ArrayXXd centered = (x.array() - 0.5).abs();

    double single = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double prod = 1.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            const double a = centered(i, k);
            prod *= 1.0 + 0.5 * a - 0.5 * a * a;
        }
        single += prod;
    }

    double pairs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double prod = 1.0;
            for (Eigen::Index k = 0; k < d; ++k)
                prod *= 1.0 + 0.5 * centered(i, k) + 0.5 * centered(j, k) - 0.5 * std::abs(x(i, k) - x(j, k));
            pairs += prod;
        }
    }

    const double nn = static_cast<double>(n);
    const double value = std::pow(13.0 / 12.0, static_cast<double>(d)) - 2.0 / nn * single + pairs / (nn * nn);
    return std::max(0.0, value);
}

void write_design_csv(std::ostream& out, const Eigen::MatrixXd& points) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < points.cols(); ++j) out << (j ? "," : "") << io::format_double(points(i, j));
        out << '\n';
    }
}

Eigen::MatrixXd read_design_csv(std::istream& in) {
    const io::CsvTable table = io::read_csv(in);
    const auto d = static_cast<Eigen::Index>(table.header.size());
    for (Eigen::Index j = 0; j < d; ++j)
        if (table.header[j] != "x" + std::to_string(j + 1)) throw IoError("design CSV header must be x1..xd");
    Eigen::MatrixXd points(static_cast<Eigen::Index>(table.rows.size()), d);
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            points(static_cast<Eigen::Index>(i), j) = io::parse_double(table.rows[i][j]);
    return points;
}

}  // namespace elaprobe::sampling
