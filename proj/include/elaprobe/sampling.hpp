#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace elaprobe::sampling {

enum class Strategy { RandomMT, RandomRandu, LhsCentered, LhsImproved, Sobol };

inline constexpr std::array<Strategy, 5> kAllStrategies = {
    Strategy::RandomMT, Strategy::RandomRandu, Strategy::LhsCentered, Strategy::LhsImproved, Strategy::Sobol};

/// CLI / file-name identifier, e.g. "lhs-improved".
std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
/// Position in kAllStrategies; also the strategy slot of derived seeds.
int strategy_index(Strategy s);

/// n x d points in the unit cube plus the inputs that reproduce them.
struct Design {
    Eigen::MatrixXd points;
    Strategy strategy = Strategy::RandomMT;
    std::uint64_t seed = 0;

    Eigen::Index n() const { return points.rows(); }
    Eigen::Index d() const { return points.cols(); }
};

/// Candidates drawn per greedy step of the improved LHS.
inline constexpr int kImprovedLhsCandidates = 10;
/// Random Sobol' offsets are drawn from [0, 2^16).
inline constexpr std::uint32_t kSobolOffsetRange = 1u << 16;

Design generate(Strategy strategy, int n, int d, std::uint64_t seed);

Design random_mt(int n, int d, std::uint64_t seed);
Design random_randu(int n, int d, std::uint64_t seed);
Design lhs_centered(int n, int d, std::uint64_t seed);
Design lhs_improved(int n, int d, std::uint64_t seed);
Design sobol(int n, int d, std::uint64_t seed);

/// Equal-spacing target nearest-neighbour distance of the improved LHS: n^(-1/d).
double improved_lhs_target_distance(int n, int d);

/// Highest dimension covered by the built-in direction numbers.
int sobol_max_dimension();
/// Points with sequence indices first_index .. first_index + n - 1 of the unscrambled Gray-code
/// Sobol' sequence (index 0 is the origin).
Eigen::MatrixXd sobol_sequence(std::uint64_t first_index, int n, int d);
/// Offset m drawn from the seed; sobol(n, d, seed) returns indices m+1 .. m+n.
std::uint32_t sobol_offset(std::uint64_t seed);

/// Affine map of unit-cube points onto the box [lower, upper].
Eigen::MatrixXd scale_to_domain(const Eigen::MatrixXd& unit_points, std::span<const double> lower,
                                std::span<const double> upper);
Eigen::MatrixXd scale_to_domain(const Eigen::MatrixXd& unit_points, double lower, double upper);
Eigen::MatrixXd scale_from_domain(const Eigen::MatrixXd& points, std::span<const double> lower,
                                  std::span<const double> upper);

/// Squared centered L2 discrepancy (Hickernell closed form, O(n^2 d)).
double centered_l2_discrepancy(const Eigen::MatrixXd& unit_points);
inline double centered_l2_discrepancy(const Design& design) { return centered_l2_discrepancy(design.points); }

/// Design CSV: header x1..xd, 17 significant digits.
void write_design_csv(std::ostream& out, const Eigen::MatrixXd& points);
Eigen::MatrixXd read_design_csv(std::istream& in);

}  // namespace elaprobe::sampling
