#include "elaprobe/classify.hpp"

#include "elaprobe/errors.hpp"
#include "elaprobe/io.hpp"
#include "elaprobe/problems.hpp"
#include "elaprobe/rng.hpp"
#include "elaprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

namespace elaprobe::classify {

// ---- dataset ----------------------------------------------------------------------------------

std::vector<int> FeatureDataset::labels() const {
    std::set<int> s;
    for (const auto& r : rows) s.insert(r.label);
    return {s.begin(), s.end()};
}

std::optional<std::size_t> FeatureDataset::find(int label, int rep) const {
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].label == label && rows[i].rep == rep) return i;
    return std::nullopt;
}

Eigen::MatrixXd FeatureDataset::matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features::kNumFeatures));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < features::kNumFeatures; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].vector.values[j];
    return m;
}

void write_dataset_csv(std::ostream& out, const FeatureDataset& ds) {
    out << "function,rep";
    for (const auto name : features::feature_names()) out << ',' << name;
    out << '\n';
    for (const auto& row : ds.rows) {
        out << row.label << ',' << row.rep;
        for (const double v : row.vector.values) out << ',' << io::format_double(v);
        out << '\n';
    }
}

FeatureDataset read_dataset_csv(std::istream& in, sampling::Strategy strategy, int n_samples) {
    const io::CsvTable table = io::read_csv(in);
    const auto& names = features::feature_names();
    if (table.header.size() != names.size() + 2 || table.header[0] != "function" || table.header[1] != "rep")
        throw SchemaMismatch("dataset CSV must start with function,rep followed by the 46 feature names");
    for (std::size_t j = 0; j < names.size(); ++j)
        if (table.header[j + 2] != names[j])
            throw SchemaMismatch("dataset column " + std::to_string(j + 2) + " is '" + table.header[j + 2] +
                                 "', expected '" + std::string(names[j]) + "'");
    FeatureDataset ds;
    ds.strategy = strategy;
    ds.n_samples = n_samples;
    std::set<std::pair<int, int>> seen;
    for (const auto& fields : table.rows) {
        LabeledRow row;
        row.label = static_cast<int>(io::parse_int(fields[0]));
        row.rep = static_cast<int>(io::parse_int(fields[1]));
        if (!seen.emplace(row.label, row.rep).second)
            throw SchemaMismatch("duplicate (function, rep) row in dataset CSV");
        for (std::size_t j = 0; j < names.size(); ++j) row.vector.values[j] = io::parse_double(fields[j + 2]);
        row.vector.provenance.strategy = strategy;
        row.vector.provenance.function = row.label;
        row.vector.n = n_samples;
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

// ---- imputation -------------------------------------------------------------------------------

Imputation impute(const Eigen::MatrixXd& train) {
    if (train.rows() < 1) throw InvalidSize("imputation needs at least one row");
    Imputation out;
    out.matrix = train;
    out.medians.resize(train.cols());
    std::vector<double> finite;
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        finite.clear();
        for (Eigen::Index i = 0; i < train.rows(); ++i)
            if (std::isfinite(train(i, j))) finite.push_back(train(i, j));
        const double med = finite.empty() ? 0.0 : stats::median_inplace(finite);
        out.medians[j] = med;
        for (Eigen::Index i = 0; i < train.rows(); ++i)
            if (!std::isfinite(out.matrix(i, j))) out.matrix(i, j) = med;
    }
    return out;
}

Eigen::VectorXd apply_imputation(const Eigen::Ref<const Eigen::VectorXd>& row, const Eigen::VectorXd& medians) {
    if (row.size() != medians.size())
        throw SchemaMismatch("query has " + std::to_string(row.size()) + " features, model expects " +
                             std::to_string(medians.size()));
    Eigen::VectorXd out = row;
    for (Eigen::Index j = 0; j < out.size(); ++j)
        if (!std::isfinite(out[j])) out[j] = medians[j];
    return out;
}

// ---- classifiers ------------------------------------------------------------------------------

std::string_view to_string(ClassifierKind k) { return k == ClassifierKind::Knn ? "knn" : "tree"; }

std::optional<ClassifierKind> parse_classifier(std::string_view name) {
    if (name == "knn") return ClassifierKind::Knn;
    if (name == "tree") return ClassifierKind::Tree;
    return std::nullopt;
}

namespace {
void check_training(const Eigen::MatrixXd& train, std::span<const int> labels) {
    if (static_cast<std::size_t>(train.rows()) != labels.size())
        throw SchemaMismatch("training matrix has " + std::to_string(train.rows()) + " rows but " +
                             std::to_string(labels.size()) + " labels");
    if (train.rows() < 1) throw InvalidSize("training set is empty");
}
}  // namespace

KnnModel knn_fit(const Eigen::MatrixXd& train, std::span<const int> labels, int k) {
    check_training(train, labels);
    if (k < 1 || train.rows() < k)
        throw InvalidSize("KNN needs at least k=" + std::to_string(k) + " training rows, got " +
                          std::to_string(train.rows()));
    Imputation imp = impute(train);
    KnnModel model;
    model.k = k;
    model.train = std::move(imp.matrix);
    model.labels.assign(labels.begin(), labels.end());
    model.medians = std::move(imp.medians);
    return model;
}

int knn_predict(const KnnModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
    const Eigen::VectorXd q = apply_imputation(query, model.medians);
    const Eigen::Index n = model.train.rows();
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) dist[i] = {(model.train.row(i).transpose() - q).squaredNorm(), i};
    const auto k = static_cast<std::size_t>(model.k);
    // Pair ordering breaks distance ties by lower row index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    std::map<int, std::pair<int, double>> votes;  // label -> (count, summed distance)
    for (std::size_t r = 0; r < k; ++r) {
        auto& v = votes[model.labels[dist[r].second]];
        v.first += 1;
        v.second += std::sqrt(dist[r].first);
    }
    int best_label = votes.begin()->first;
    auto best = votes.begin()->second;
    for (const auto& [label, v] : votes) {
        if (v.first > best.first || (v.first == best.first && v.second < best.second)) {
            best_label = label;
            best = v;
        }
    }
    return best_label;
}

double gini(std::span<const int> class_counts) {
    double total = 0.0;
    for (int c : class_counts) total += c;
    if (total == 0.0) return 0.0;
    double sum_sq = 0.0;
    for (int c : class_counts) sum_sq += (c / total) * (c / total);
    return 1.0 - sum_sq;
}

int TreeModel::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<int, int>> stack = {{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        const auto [idx, dep] = stack.back();
        stack.pop_back();
        best = std::max(best, dep);
        const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
        if (node.feature >= 0) {
            stack.emplace_back(node.left, dep + 1);
            stack.emplace_back(node.right, dep + 1);
        }
    }
    return best;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    std::vector<int> cls;         // class index per row
    std::vector<int> class_label;  // class index -> label
    std::vector<TreeNode> nodes;

    int majority(std::span<const int> counts) const {
        // Classes are in ascending label order, so the first maximum is the smaller label.
        return class_label[static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin())];
    }

    // `sorted[f]` holds this node's rows ordered by feature f (ties by row index).
    int build(std::vector<std::vector<Eigen::Index>> sorted) {
        const std::size_t num_classes = class_label.size();
        const auto& rows = sorted[0];
        const std::size_t count = rows.size();
        std::vector<int> counts(num_classes, 0);
        for (const Eigen::Index r : rows) ++counts[static_cast<std::size_t>(cls[r])];

        const int node_index = static_cast<int>(nodes.size());
        nodes.push_back(TreeNode{-1, 0.0, -1, -1, majority(counts)});
        const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
        if (pure) return node_index;

        // Weighted child impurity n_L * gini_L + n_R * gini_R, from running sums of squared counts.
        double best_cost = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        std::size_t best_pos = 0;
        double best_threshold = 0.0;
        std::vector<int> left(num_classes);
        for (std::size_t f = 0; f < sorted.size(); ++f) {
            const auto& order = sorted[f];
            std::fill(left.begin(), left.end(), 0);
            double sq_left = 0.0;
            double sq_right = 0.0;
            for (int c : counts) sq_right += static_cast<double>(c) * c;
            for (std::size_t i = 0; i + 1 < count; ++i) {
                const auto c = static_cast<std::size_t>(cls[order[i]]);
                sq_left += 2.0 * left[c] + 1.0;
                sq_right -= 2.0 * (counts[c] - left[c]) - 1.0;
                ++left[c];
                const double v = x(order[i], static_cast<Eigen::Index>(f));
                const double next = x(order[i + 1], static_cast<Eigen::Index>(f));
                if (!(v < next)) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = static_cast<double>(count - i - 1);
                const double cost = (nl - sq_left / nl) + (nr - sq_right / nr);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_feature = static_cast<int>(f);
                    best_pos = i;
                    double mid = 0.5 * (v + next);
                    if (!(mid < next)) mid = v;
                    best_threshold = mid;
                }
            }
        }
        // Impure but every row identical in every feature.
        if (best_feature < 0) return node_index;

        std::vector<char> goes_left(static_cast<std::size_t>(x.rows()), 0);
        const auto& best_order = sorted[static_cast<std::size_t>(best_feature)];
        for (std::size_t i = 0; i <= best_pos; ++i) goes_left[static_cast<std::size_t>(best_order[i])] = 1;

        std::vector<std::vector<Eigen::Index>> left_sorted(sorted.size()), right_sorted(sorted.size());
        for (std::size_t f = 0; f < sorted.size(); ++f) {
            left_sorted[f].reserve(best_pos + 1);
            right_sorted[f].reserve(count - best_pos - 1);
            for (const Eigen::Index r : sorted[f]) (goes_left[static_cast<std::size_t>(r)] ? left_sorted[f] : right_sorted[f]).push_back(r);
        }
        sorted.clear();
        sorted.shrink_to_fit();

        const int l = build(std::move(left_sorted));
        const int r = build(std::move(right_sorted));
        TreeNode& node = nodes[static_cast<std::size_t>(node_index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return node_index;
    }
};

}  // namespace

TreeModel tree_fit(const Eigen::MatrixXd& train, std::span<const int> labels) {
    check_training(train, labels);
    Imputation imp = impute(train);
    const Eigen::MatrixXd& x = imp.matrix;

    std::vector<int> class_label(labels.begin(), labels.end());
    std::sort(class_label.begin(), class_label.end());
    class_label.erase(std::unique(class_label.begin(), class_label.end()), class_label.end());
    std::vector<int> cls(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        cls[i] = static_cast<int>(std::lower_bound(class_label.begin(), class_label.end(), labels[i]) - class_label.begin());

    std::vector<std::vector<Eigen::Index>> sorted(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        auto& order = sorted[static_cast<std::size_t>(f)];
        order.resize(static_cast<std::size_t>(x.rows()));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
    }

    TreeBuilder builder{x, std::move(cls), std::move(class_label), {}};
    builder.build(std::move(sorted));

    TreeModel model;
    model.nodes = std::move(builder.nodes);
    model.medians = std::move(imp.medians);
    model.n_features = x.cols();
    return model;
}

int tree_predict(const TreeModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
    const Eigen::VectorXd q = apply_imputation(query, model.medians);
    std::size_t idx = 0;
    for (;;) {
        const TreeNode& node = model.nodes[idx];
        if (node.feature < 0) return node.label;
        idx = static_cast<std::size_t>(q[node.feature] <= node.threshold ? node.left : node.right);
    }
}

TrainedModel fit(ClassifierKind kind, const Eigen::MatrixXd& train, std::span<const int> labels) {
    if (kind == ClassifierKind::Knn) return {kind, knn_fit(train, labels)};
    return {kind, tree_fit(train, labels)};
}

int predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
    if (const auto* knn = std::get_if<KnnModel>(&model.payload)) return knn_predict(*knn, query);
    return tree_predict(std::get<TreeModel>(model.payload), query);
}

// ---- validation -------------------------------------------------------------------------------

SplitPlan make_split_plan(std::span<const int> labels, std::span<const int> rep_ids, std::uint64_t seed) {
    if (rep_ids.size() < 2 || rep_ids.size() % 2 != 0)
        throw InsufficientReps("split plans need an even number (>= 2) of repetitions, got " +
                               std::to_string(rep_ids.size()));
    rng::MersenneTwister mt(rng::fold_seed32(seed));
    SplitPlan plan;
    plan.labels.assign(labels.begin(), labels.end());
    const std::size_t half = rep_ids.size() / 2;
    for (std::size_t l = 0; l < labels.size(); ++l) {
        std::vector<int> reps(rep_ids.begin(), rep_ids.end());
        rng::shuffle(mt, std::span<int>(reps));
        plan.train_reps.emplace_back(reps.begin(), reps.begin() + static_cast<std::ptrdiff_t>(half));
        plan.test_reps.emplace_back(reps.begin() + static_cast<std::ptrdiff_t>(half), reps.end());
    }
    return plan;
}

ConfusionMatrix::ConfusionMatrix(std::vector<int> labels_) : labels(std::move(labels_)) {
    counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(labels.size()));
}

void ConfusionMatrix::add(int truth, int predicted) {
    const auto t = std::find(labels.begin(), labels.end(), truth);
    const auto p = std::find(labels.begin(), labels.end(), predicted);
    if (t == labels.end() || p == labels.end()) throw LabelMismatch("label outside the confusion matrix");
    ++counts(t - labels.begin(), p - labels.begin());
}

long long ConfusionMatrix::total() const { return counts.cast<long long>().sum(); }
long long ConfusionMatrix::correct() const { return counts.diagonal().cast<long long>().sum(); }

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (labels != other.labels) throw LabelMismatch("confusion matrices over different labels");
    counts += other.counts;
    return *this;
}

namespace {
std::string label_name(int label) {
    if (label >= 1 && label <= problems::kNumFunctions) return problems::FunctionId(label).label();
    return std::to_string(label);
}
int parse_label(const std::string& text) {
    if (const auto fid = problems::parse_function_id(text)) return fid->value();
    return static_cast<int>(io::parse_int(text));
}
}  // namespace

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
    out << "function";
    for (int l : cm.labels) out << ',' << label_name(l);
    out << '\n';
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        out << label_name(cm.labels[i]);
        for (std::size_t j = 0; j < cm.labels.size(); ++j)
            out << ',' << cm.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        out << '\n';
    }
}

ConfusionMatrix read_confusion_csv(std::istream& in) {
    const io::CsvTable table = io::read_csv(in);
    std::vector<int> labels;
    for (std::size_t j = 1; j < table.header.size(); ++j) labels.push_back(parse_label(table.header[j]));
    if (table.rows.size() != labels.size()) throw SchemaMismatch("confusion CSV must be square");
    ConfusionMatrix cm(labels);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (parse_label(table.rows[i][0]) != labels[i]) throw SchemaMismatch("confusion row labels out of order");
        for (std::size_t j = 0; j < labels.size(); ++j)
            cm.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<int>(io::parse_int(table.rows[i][j + 1]));
    }
    return cm;
}

namespace {

// Rep ids per label, checked to be identical across labels.
std::vector<int> common_reps(const FeatureDataset& ds, const std::vector<int>& labels) {
    std::map<int, std::vector<int>> reps;
    for (const auto& r : ds.rows) reps[r.label].push_back(r.rep);
    std::vector<int> ref;
    for (int label : labels) {
        auto& v = reps[label];
        std::sort(v.begin(), v.end());
        if (ref.empty()) ref = v;
        if (v != ref) throw InsufficientReps("labels carry different repetition sets");
    }
    return ref;
}

struct RowIndex {
    std::map<std::pair<int, int>, std::size_t> at;
    explicit RowIndex(const FeatureDataset& ds) {
        for (std::size_t i = 0; i < ds.rows.size(); ++i) at.emplace(std::make_pair(ds.rows[i].label, ds.rows[i].rep), i);
    }
};

}  // namespace

std::vector<ValidationResult> subsample_validate_many(const FeatureDataset& train_set,
                                                      std::span<const FeatureDataset* const> test_sets,
                                                      ClassifierKind kind, const ValidationOptions& options) {
    if (options.splits < 1) throw InvalidArgument("splits must be >= 1");
    const std::vector<int> labels = train_set.labels();
    if (labels.empty()) throw InsufficientReps("training set is empty");
    const std::vector<int> reps = common_reps(train_set, labels);
    for (const FeatureDataset* ts : test_sets) {
        if (ts->labels() != labels) throw LabelMismatch("train and test datasets cover different functions");
        if (common_reps(*ts, labels) != reps) throw InsufficientReps("train and test datasets differ in repetitions");
    }

    const Eigen::MatrixXd train_all = train_set.matrix();
    const RowIndex train_index(train_set);
    std::vector<Eigen::MatrixXd> test_all;
    std::vector<RowIndex> test_index;
    for (const FeatureDataset* ts : test_sets) {
        test_all.push_back(ts->matrix());
        test_index.emplace_back(*ts);
    }

    std::vector<ValidationResult> results(test_sets.size());
    for (auto& r : results) r.confusion = ConfusionMatrix(labels);

    const std::size_t half = reps.size() / 2;
    for (int s = 0; s < options.splits; ++s) {
        const std::uint64_t split_seed =
            rng::derive_seed(options.seed, {static_cast<std::uint64_t>(rng::Purpose::Split), static_cast<std::uint64_t>(s)});
        const SplitPlan plan = make_split_plan(labels, reps, split_seed);

        Eigen::MatrixXd train(static_cast<Eigen::Index>(labels.size() * half), train_all.cols());
        std::vector<int> train_labels;
        train_labels.reserve(labels.size() * half);
        Eigen::Index row = 0;
        for (std::size_t l = 0; l < labels.size(); ++l) {
            for (const int rep : plan.train_reps[l]) {
                train.row(row++) = train_all.row(static_cast<Eigen::Index>(train_index.at.at({labels[l], rep})));
                train_labels.push_back(labels[l]);
            }
        }
        if (options.shuffle_train_labels) {
            rng::MersenneTwister mt(rng::fold_seed32(rng::derive_seed(
                options.seed, {static_cast<std::uint64_t>(rng::Purpose::Shuffle), static_cast<std::uint64_t>(s)})));
            rng::shuffle(mt, std::span<int>(train_labels));
        }
        const TrainedModel model = fit(kind, train, train_labels);

        for (std::size_t t = 0; t < test_sets.size(); ++t) {
            ConfusionMatrix cm(labels);
            for (std::size_t l = 0; l < labels.size(); ++l) {
                for (const int rep : plan.test_reps[l]) {
                    const auto idx = static_cast<Eigen::Index>(test_index[t].at.at({labels[l], rep}));
                    cm.add(labels[l], predict(model, test_all[t].row(idx).transpose()));
                }
            }
            results[t].accuracies.push_back(static_cast<double>(cm.correct()) / static_cast<double>(cm.total()));
            results[t].confusion += cm;
        }
    }
    return results;
}

ValidationResult subsample_validate(const FeatureDataset& train_set, const FeatureDataset& test_set,
                                    ClassifierKind kind, const ValidationOptions& options) {
    const FeatureDataset* tests[] = {&test_set};
    return std::move(subsample_validate_many(train_set, tests, kind, options).front());
}

}  // namespace elaprobe::classify
