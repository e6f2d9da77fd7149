#pragma once

#include "elaprobe/sampling.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elaprobe::features {

inline constexpr std::size_t kNumFeatures = 46;

/// Canonical feature names in vector order: ela_distr, ela_meta, disp, nbc, ic, pca.
const std::array<std::string_view, kNumFeatures>& feature_names();
/// Index of a canonical name, or nullopt.
std::optional<std::size_t> feature_index(std::string_view name);

/// Where a sample came from. Every field is optional because samples may be read from files.
struct Provenance {
    std::optional<sampling::Strategy> strategy;
    std::optional<std::uint64_t> seed;
    std::optional<int> function;
    std::optional<std::uint64_t> instance_seed;
};

/// Points in domain coordinates with their objective values.
struct EvaluatedSample {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Provenance provenance;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index d() const { return X.cols(); }
};

inline constexpr Eigen::Index kMinSampleSize = 10;

/// Throws InvalidSize / DimensionMismatch / NonFiniteInput when the sample violates its invariants.
void validate(const EvaluatedSample& sample);

/// Values of one feature set plus degenerate-case flags such as "nbc:degenerate".
struct SetResult {
    std::vector<double> values;
    std::vector<std::string> flags;
};

struct FeatureVector {
    std::array<double, kNumFeatures> values{};
    Provenance provenance;
    Eigen::Index n = 0;
    Eigen::Index d = 0;
    std::vector<std::string> flags;

    double operator[](std::string_view name) const;
};

// ---- y-distribution ---------------------------------------------------------------------------

inline constexpr int kKdeGridSize = 512;
inline constexpr double kKdePeakThreshold = 0.1;

SetResult ela_distr(const EvaluatedSample& sample);
/// Local maxima of a Silverman-bandwidth Gaussian KDE above kKdePeakThreshold * max density.
int count_kde_peaks(std::span<const double> y);

// ---- meta models ------------------------------------------------------------------------------

struct ModelFit {
    Eigen::VectorXd coefficients;  // intercept first
    double r2 = 0.0;
    double adj_r2 = 0.0;
    bool rank_deficient = false;
};

enum class MetaModel { Linear, LinearInteractions, Quadratic, QuadraticInteractions };

/// Column basis of a meta model: intercept, linear, [interactions], [squares].
Eigen::MatrixXd meta_model_basis(const Eigen::MatrixXd& X, MetaModel model);
ModelFit fit_meta_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, MetaModel model);
/// Minimum sample size for the largest model: 1 + 2d + d(d-1)/2.
Eigen::Index meta_min_sample_size(Eigen::Index d);
SetResult ela_meta(const EvaluatedSample& sample);

// ---- dispersion -------------------------------------------------------------------------------

inline constexpr std::array<int, 4> kDispQuantilesPercent = {2, 5, 10, 25};
/// max(2, ceil(q n)) with q in percent, computed in integers.
Eigen::Index disp_subset_size(int percent, Eigen::Index n);
SetResult disp(const EvaluatedSample& sample);

// ---- nearest better clustering ----------------------------------------------------------------

struct NearestBetter {
    std::vector<double> nn_distance;
    std::vector<double> nb_distance;
    std::vector<Eigen::Index> nb_index;  // -1 for the best point
    Eigen::Index best = 0;
};
/// Better means smaller y, ties broken by lower index.
NearestBetter nearest_better(const EvaluatedSample& sample);
SetResult nbc(const EvaluatedSample& sample);

// ---- information content ----------------------------------------------------------------------

inline constexpr int kIcLogGridSize = 200;
inline constexpr double kIcGridLowerFactor = 1e-5;

struct InformationCurve {
    std::vector<Eigen::Index> tour;
    std::vector<double> slopes;   // delta_i along the tour
    std::vector<double> epsilon;  // 0 followed by the ascending log grid
    std::vector<double> entropy;  // H(eps)
    std::vector<double> partial;  // M(eps)
};

/// Greedy nearest-neighbour tour starting at row 0, ties by lowest index.
std::vector<Eigen::Index> nearest_neighbour_tour(const Eigen::MatrixXd& X);
std::vector<double> tour_slopes(const EvaluatedSample& sample, const std::vector<Eigen::Index>& tour);
double information_entropy(std::span<const double> slopes, double epsilon);
double partial_information(std::span<const double> slopes, double epsilon);
InformationCurve information_curve(const EvaluatedSample& sample);
SetResult ic(const EvaluatedSample& sample);

// ---- principal components ---------------------------------------------------------------------

inline constexpr double kPcaVarianceShare = 0.9;

struct ExplainedVariance {
    double share_needed = 0.0;  // (#components reaching 90%) / dimension
    double first_share = 0.0;   // lambda_1 / sum(lambda)
};
/// From a symmetric matrix's eigenvalues.
ExplainedVariance explained_variance(const Eigen::MatrixXd& symmetric);
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& data);
/// Zero-variance columns get an identity row and column.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data);
SetResult pca(const EvaluatedSample& sample);

// ---- all sets ---------------------------------------------------------------------------------

FeatureVector compute_all(const EvaluatedSample& sample);

/// Feature JSON object: {"provenance": {...}, "features": {name: value|null}, "flags": [...]}.
std::string to_json(const FeatureVector& fv, int indent = 2);
FeatureVector from_json(std::string_view text);

}  // namespace elaprobe::features
