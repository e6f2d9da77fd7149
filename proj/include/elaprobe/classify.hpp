#pragma once

#include "elaprobe/features.hpp"
#include "elaprobe/sampling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace elaprobe::classify {

struct LabeledRow {
    int label = 0;  // function id
    int rep = 0;
    features::FeatureVector vector;
};

/// Feature vectors of one (strategy, sample size) cell, rows unique by (label, rep).
struct FeatureDataset {
    sampling::Strategy strategy = sampling::Strategy::RandomMT;
    int n_samples = 0;
    std::vector<LabeledRow> rows;

    std::vector<int> labels() const;
    /// Row index of (label, rep), or nullopt.
    std::optional<std::size_t> find(int label, int rep) const;
    Eigen::MatrixXd matrix() const;
};

/// Dataset CSV: function,rep,<46 canonical names>.
void write_dataset_csv(std::ostream& out, const FeatureDataset& ds);
FeatureDataset read_dataset_csv(std::istream& in, sampling::Strategy strategy, int n_samples);

// ---- imputation -------------------------------------------------------------------------------

struct Imputation {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd medians;  // per column, over finite entries; 0 for all-non-finite columns
};
Imputation impute(const Eigen::MatrixXd& train);
/// Replaces non-finite entries of `row` by the stored medians.
Eigen::VectorXd apply_imputation(const Eigen::Ref<const Eigen::VectorXd>& row, const Eigen::VectorXd& medians);

// ---- classifiers ------------------------------------------------------------------------------

enum class ClassifierKind { Knn, Tree };
std::string_view to_string(ClassifierKind k);
std::optional<ClassifierKind> parse_classifier(std::string_view name);

inline constexpr int kDefaultNeighbours = 5;

/// Euclidean KNN on raw imputed features.
struct KnnModel {
    int k = kDefaultNeighbours;
    Eigen::MatrixXd train;  // imputed
    std::vector<int> labels;
    Eigen::VectorXd medians;
};

KnnModel knn_fit(const Eigen::MatrixXd& train, std::span<const int> labels, int k = kDefaultNeighbours);
/// Majority of the k nearest (distance ties by lower row), vote ties by smaller summed distance, then smaller label.
int knn_predict(const KnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
};

/// Binary CART with Gini impurity; values <= threshold go left.
struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    Eigen::VectorXd medians;
    Eigen::Index n_features = 0;

    int depth() const;
};

TreeModel tree_fit(const Eigen::MatrixXd& train, std::span<const int> labels);
int tree_predict(const TreeModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);
double gini(std::span<const int> class_counts);

/// Either classifier behind one interface.
struct TrainedModel {
    ClassifierKind kind;
    std::variant<KnnModel, TreeModel> payload;
};
TrainedModel fit(ClassifierKind kind, const Eigen::MatrixXd& train, std::span<const int> labels);
int predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);

// ---- random sub-sampling validation -------------------------------------------------------------

/// Per label: the training half and the test half of its repetition ids.
struct SplitPlan {
    std::vector<int> labels;
    std::vector<std::vector<int>> train_reps;
    std::vector<std::vector<int>> test_reps;
};
SplitPlan make_split_plan(std::span<const int> labels, std::span<const int> rep_ids, std::uint64_t seed);

struct ConfusionMatrix {
    std::vector<int> labels;
    Eigen::MatrixXi counts;  // rows = true label, cols = predicted label

    explicit ConfusionMatrix(std::vector<int> labels_ = {});
    void add(int truth, int predicted);
    long long total() const;
    long long correct() const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};
/// Header row and column of function ids (f01..f24).
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_csv(std::istream& in);

struct ValidationResult {
    std::vector<double> accuracies;  // one per split, in split order
    ConfusionMatrix confusion;       // summed over splits
};

struct ValidationOptions {
    int splits = 50;
    std::uint64_t seed = 0;
    /// Permute training labels (chance-level sanity check); the permutation seed is derived per split.
    bool shuffle_train_labels = false;
};

/// Split seeds depend only on (seed, split index), so every (train, test) pairing sees the same partitions.
ValidationResult subsample_validate(const FeatureDataset& train_set, const FeatureDataset& test_set,
                                    ClassifierKind kind, const ValidationOptions& options);
/// Trains once per split and evaluates against every test set.
std::vector<ValidationResult> subsample_validate_many(const FeatureDataset& train_set,
                                                      std::span<const FeatureDataset* const> test_sets,
                                                      ClassifierKind kind, const ValidationOptions& options);

}  // namespace elaprobe::classify
