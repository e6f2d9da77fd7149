#pragma once

#include "elaprobe/classify.hpp"
#include "elaprobe/features.hpp"
#include "elaprobe/problems.hpp"
#include "elaprobe/sampling.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace elaprobe::experiment {

struct ExperimentConfig {
    std::vector<sampling::Strategy> strategies{sampling::kAllStrategies.begin(), sampling::kAllStrategies.end()};
    std::vector<int> sample_sizes{30, 300, 3125};
    std::vector<int> functions;  // ids; all 24 when built through full_preset()
    int reps = 100;
    int splits = 50;
    std::vector<classify::ClassifierKind> classifiers{classify::ClassifierKind::Knn, classify::ClassifierKind::Tree};
    int dim = 5;
    std::uint64_t base_seed = 1;
    std::filesystem::path output_dir = "ela_probe_out";

    ExperimentConfig();
};

/// The complete study: 24 functions, 100 reps, 50 splits, n in {30, 300, 3125}.
ExperimentConfig full_preset();
/// Desk-scale study: the 12 odd function ids, 30 reps, 20 splits, n in {30, 300}.
ExperimentConfig quick_preset();
std::optional<ExperimentConfig> preset(std::string_view name);

/// Throws InvalidArgument unless every list is non-empty and reps is even and >= 2.
void validate(const ExperimentConfig& config);

/// JSON object with the field names above; absent fields keep their defaults.
ExperimentConfig config_from_json(std::string_view text, ExperimentConfig defaults = {});
std::string config_to_json(const ExperimentConfig& config);

// ---- seeds ------------------------------------------------------------------------------------

std::uint64_t design_seed(std::uint64_t base_seed, sampling::Strategy strategy, int function, int rep);
/// Shared by every strategy and rep of a function.
std::uint64_t instance_seed(std::uint64_t base_seed, int function);
/// Seed handed to subsample validation of one (classifier, n) block; independent of the strategies.
std::uint64_t validation_seed(std::uint64_t base_seed, int n);

// ---- scheduling -------------------------------------------------------------------------------

/// jobs <= 0 means available hardware parallelism.
int resolve_jobs(int jobs);
/// Runs body(0..count-1) on up to `jobs` threads. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

// ---- datasets ---------------------------------------------------------------------------------

/// Evaluates and featurizes one (strategy, n, function, rep) sample.
features::FeatureVector featurize_rep(sampling::Strategy strategy, int n, int function, int rep,
                                      const ExperimentConfig& config);
/// Rows ordered by function then rep.
classify::FeatureDataset build_dataset(sampling::Strategy strategy, int n, const ExperimentConfig& config,
                                       int jobs = 1);

std::filesystem::path dataset_path(const std::filesystem::path& output_dir, sampling::Strategy strategy, int n);
/// Reads a cached dataset when its manifest matches `config`; otherwise nullopt.
std::optional<classify::FeatureDataset> load_cached_dataset(const std::filesystem::path& output_dir,
                                                            sampling::Strategy strategy, int n,
                                                            const ExperimentConfig& config);
void save_dataset(const std::filesystem::path& output_dir, const classify::FeatureDataset& ds,
                  const ExperimentConfig& config);
/// Throws MissingDataset when the CSV does not exist.
classify::FeatureDataset load_dataset(const std::filesystem::path& output_dir, sampling::Strategy strategy, int n);

// ---- statistics -------------------------------------------------------------------------------

struct FeatureStat {
    double median = 0.0;
    double iqr = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    int finite = 0;  // reps contributing; NaN statistics when 0
};

struct StatKey {
    sampling::Strategy strategy;
    int n;
    int function;
    std::size_t feature;
    friend auto operator<=>(const StatKey&, const StatKey&) = default;
};
using FeatureStats = std::map<StatKey, FeatureStat>;

FeatureStat summarize(std::span<const double> values);
/// Per (function, feature) statistics of one dataset over the finite values of its reps.
void add_feature_stats(const classify::FeatureDataset& ds, FeatureStats& out);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value. Both sides need >= 5 values.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Flagged share of (function, feature) pairs per strategy, in kAllStrategies order: the strategy's
/// median lies strictly outside [min, max] of the other four medians.
struct Divergence {
    std::array<int, 5> flagged{};
    int pairs = 0;
    std::array<double, 5> fraction{};
};
Divergence divergence_census(const FeatureStats& stats, int n, std::span<const int> functions);

// ---- grid -------------------------------------------------------------------------------------

struct CellKey {
    classify::ClassifierKind classifier;
    int n;
    sampling::Strategy train;
    sampling::Strategy test;
    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct ExperimentReport {
    std::map<CellKey, std::vector<double>> accuracy_cells;
    std::map<CellKey, classify::ConfusionMatrix> confusion;
    FeatureStats feature_stats;
    std::map<int, Divergence> divergence;  // by n, when all five strategies ran
};

struct RunOptions {
    int jobs = 0;
    /// Reuse datasets/<strategy>_n<k>.csv when their manifest matches the config.
    bool reuse_datasets = false;
    /// Receives one line per finished dataset or grid block.
    std::function<void(const std::string&)> progress;
};

/// Builds or loads every dataset, fills every cell and writes all report files under output_dir.
ExperimentReport run_grid(const ExperimentConfig& config, const RunOptions& options = {});

/// Median cell values as a strategies x strategies matrix (row = train strategy).
Eigen::MatrixXd heatmap(const ExperimentReport& report, classify::ClassifierKind classifier, int n,
                        std::span<const sampling::Strategy> strategies, bool use_mean = false);
/// Aligned text table of a heatmap.
std::string heatmap_text(const Eigen::MatrixXd& values, std::span<const sampling::Strategy> strategies,
                         const std::string& title);

// ---- report files -----------------------------------------------------------------------------

std::string heatmap_csv(const Eigen::MatrixXd& values, std::span<const sampling::Strategy> strategies);
std::string accuracies_csv(const ExperimentReport& report, classify::ClassifierKind classifier, int n);
std::string divergence_csv(const Divergence& div);
std::string feature_stats_csv(const FeatureStats& stats, int n);

/// File names under output_dir.
std::string heatmap_name(classify::ClassifierKind classifier, int n, std::string_view extension, bool mean = false);
std::string accuracies_name(classify::ClassifierKind classifier, int n);
std::string confusion_name(classify::ClassifierKind classifier, int n, sampling::Strategy train, sampling::Strategy test);
std::string divergence_name(int n);
std::string feature_stats_name(int n);

/// Long-form accuracies file: train,test,split,accuracy.
struct AccuracyRow {
    sampling::Strategy train;
    sampling::Strategy test;
    int split;
    double accuracy;
};
std::vector<AccuracyRow> read_accuracies(const std::filesystem::path& path);
FeatureStats read_feature_stats(const std::filesystem::path& path, int n);

}  // namespace elaprobe::experiment
