#include "elaprobe/classify.hpp"
#include "elaprobe/errors.hpp"
#include "elaprobe/rng.hpp"
#include "elaprobe/stats.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

using namespace elaprobe;
using namespace elaprobe::classify;

namespace {

// Labels 1..labels, reps 0..reps-1; feature j of (label, rep) is label-centred noise.
FeatureDataset synthetic(int labels, int reps, double noise, std::uint32_t seed) {
    rng::MersenneTwister mt(seed);
    FeatureDataset ds;
    ds.n_samples = 30;
    for (int l = 1; l <= labels; ++l)
        for (int r = 0; r < reps; ++r) {
            LabeledRow row{l, r, {}};
            for (std::size_t j = 0; j < features::kNumFeatures; ++j)
                row.vector.values[j] = (j % 3 == 0 ? l : -0.5 * l) + noise * rng::standard_normal(mt);
            ds.rows.push_back(row);
        }
    return ds;
}

std::vector<int> labels_of(const FeatureDataset& ds) {
    std::vector<int> out;
    for (const auto& r : ds.rows) out.push_back(r.label);
    return out;
}

// All-pairs reference: sort all training rows by (distance, index), vote among the first k.
int knn_reference(const Eigen::MatrixXd& train, const std::vector<int>& labels, const Eigen::VectorXd& q, int k) {
    std::vector<std::pair<double, int>> all;
    for (int i = 0; i < train.rows(); ++i) all.emplace_back((train.row(i).transpose() - q).norm(), i);
    std::sort(all.begin(), all.end());
    std::map<int, std::pair<int, double>> votes;
    for (int i = 0; i < k; ++i) {
        votes[labels[all[i].second]].first++;
        votes[labels[all[i].second]].second += all[i].first;
    }
    int best = -1;
    std::pair<int, double> bv{-1, 0.0};
    for (const auto& [l, v] : votes)
        if (v.first > bv.first || (v.first == bv.first && v.second < bv.second)) {
            best = l;
            bv = v;
        }
    return best;
}

}  // namespace

TEST_CASE("imputation by training medians") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd m(4, 3);
    m << 1, nan, nan, 2, 5, nan, 3, 7, nan, 10, nan, nan;
    const Imputation imp = impute(m);
    CHECK(imp.medians[0] == 2.5);
    CHECK(imp.medians[1] == 6.0);
    CHECK(imp.medians[2] == 0.0);
    CHECK(imp.matrix(0, 1) == 6.0);
    CHECK(imp.matrix(1, 2) == 0.0);
    CHECK(imp.matrix(3, 0) == 10.0);
    Eigen::MatrixXd finite = Eigen::MatrixXd::Random(5, 2);
    CHECK(impute(finite).matrix == finite);
    const Eigen::VectorXd q = (Eigen::VectorXd(3) << nan, 1.0, std::numeric_limits<double>::infinity()).finished();
    const Eigen::VectorXd fixed = apply_imputation(q, imp.medians);
    CHECK(fixed[0] == 2.5);
    CHECK(fixed[1] == 1.0);
    CHECK(fixed[2] == 0.0);
    CHECK_THROWS_AS(apply_imputation(Eigen::VectorXd::Zero(2), imp.medians), SchemaMismatch);
    CHECK_THROWS_AS(impute(Eigen::MatrixXd(0, 3)), InvalidSize);
}

TEST_CASE("knn equals the brute-force oracle on 200 instances") {
    rng::MersenneTwister mt(77);
    for (int inst = 0; inst < 200; ++inst) {
        const int rows = 6 + static_cast<int>(rng::uniform_below(mt, 30));
        const int cols = 1 + static_cast<int>(rng::uniform_below(mt, 4));
        const int classes = 2 + static_cast<int>(rng::uniform_below(mt, 4));
        Eigen::MatrixXd train(rows, cols);
        std::vector<int> labels(static_cast<std::size_t>(rows));
        // Coarse integer grid so distance ties and vote ties actually occur.
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) train(i, j) = static_cast<double>(rng::uniform_below(mt, 4));
            labels[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng::uniform_below(mt, static_cast<std::uint32_t>(classes)));
        }
        const KnnModel model = knn_fit(train, labels);
        for (int t = 0; t < 5; ++t) {
            Eigen::VectorXd q(cols);
            for (int j = 0; j < cols; ++j) q[j] = static_cast<double>(rng::uniform_below(mt, 4));
            REQUIRE(knn_predict(model, q) == knn_reference(train, labels, q, 5));
        }
    }
}

TEST_CASE("knn basic behaviour") {
    Eigen::MatrixXd train(7, 1);
    train << 0, 0, 0, 0, 0, 10, 10;
    const std::vector<int> labels = {3, 3, 3, 3, 3, 1, 1};
    const KnnModel m = knn_fit(train, labels);
    CHECK(knn_predict(m, Eigen::VectorXd::Zero(1)) == 3);
    const KnnModel one = knn_fit(train, labels, 1);
    CHECK(knn_predict(one, Eigen::VectorXd::Constant(1, 9.0)) == 1);
    CHECK_THROWS_AS(knn_fit(train.topRows(4), std::vector<int>(4, 1)), InvalidSize);
    CHECK_THROWS_AS(knn_fit(train, std::vector<int>(3, 1)), SchemaMismatch);
    CHECK_THROWS_AS(knn_predict(m, Eigen::VectorXd::Zero(2)), SchemaMismatch);
}

TEST_CASE("gini impurity") {
    const int half[] = {5, 5};
    const int pure[] = {0, 9};
    const int three[] = {1, 1, 1};
    CHECK(gini(half) == doctest::Approx(0.5));
    CHECK(gini(pure) == 0.0);
    CHECK(gini(three) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("tree with one separating threshold has depth one") {
    Eigen::MatrixXd train(6, 2);
    train << 0.0, 5, 1.0, 3, 2.0, 9, 10.0, 1, 11.0, 4, 12.0, 2;
    const std::vector<int> labels = {1, 1, 1, 2, 2, 2};
    const TreeModel t = tree_fit(train, labels);
    CHECK(t.depth() == 1);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 6.0);
    for (int i = 0; i < 6; ++i) CHECK(tree_predict(t, train.row(i).transpose()) == labels[static_cast<std::size_t>(i)]);
}

TEST_CASE("tree fits conflict-free training sets perfectly, including XOR") {
    Eigen::MatrixXd xor_x(4, 2);
    xor_x << 0, 0, 0, 1, 1, 0, 1, 1;
    const std::vector<int> xor_y = {1, 2, 2, 1};
    const TreeModel x = tree_fit(xor_x, xor_y);
    for (int i = 0; i < 4; ++i) CHECK(tree_predict(x, xor_x.row(i).transpose()) == xor_y[static_cast<std::size_t>(i)]);

    for (std::uint32_t seed = 1; seed <= 10; ++seed) {
        const FeatureDataset ds = synthetic(6, 10, 2.0, seed);
        const Eigen::MatrixXd m = ds.matrix();
        const auto labels = labels_of(ds);
        const TreeModel t = tree_fit(m, labels);
        for (Eigen::Index i = 0; i < m.rows(); ++i) REQUIRE(tree_predict(t, m.row(i).transpose()) == labels[static_cast<std::size_t>(i)]);
        for (const auto& node : t.nodes)
            if (node.feature >= 0) {
                CHECK(node.left > 0);
                CHECK(node.right > 0);
                CHECK(static_cast<std::size_t>(node.left) < t.nodes.size());
                CHECK(static_cast<std::size_t>(node.right) < t.nodes.size());
            }
    }
}

TEST_CASE("tree leaf for identical conflicting rows takes the smaller majority label") {
    Eigen::MatrixXd train = Eigen::MatrixXd::Ones(4, 2);
    const std::vector<int> labels = {7, 4, 7, 4};
    const TreeModel t = tree_fit(train, labels);
    CHECK(t.nodes.size() == 1);
    CHECK(t.nodes[0].label == 4);
}

TEST_CASE("generic fit and predict dispatch") {
    const FeatureDataset ds = synthetic(3, 10, 0.1, 3);
    const auto labels = labels_of(ds);
    for (ClassifierKind k : {ClassifierKind::Knn, ClassifierKind::Tree}) {
        const TrainedModel m = fit(k, ds.matrix(), labels);
        CHECK(m.kind == k);
        CHECK(predict(m, ds.matrix().row(4).transpose()) == labels[4]);
    }
    CHECK(parse_classifier("knn") == ClassifierKind::Knn);
    CHECK(parse_classifier("tree") == ClassifierKind::Tree);
    CHECK_FALSE(parse_classifier("forest").has_value());
    CHECK(to_string(ClassifierKind::Tree) == "tree");
}

TEST_CASE("split plans partition every label's reps in half") {
    const std::vector<int> labels = {1, 2, 3};
    std::vector<int> reps(100);
    for (int i = 0; i < 100; ++i) reps[static_cast<std::size_t>(i)] = i;
    const SplitPlan p = make_split_plan(labels, reps, 42);
    const SplitPlan q = make_split_plan(labels, reps, 42);
    CHECK(p.train_reps == q.train_reps);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(p.train_reps[l].size() == 50);
        CHECK(p.test_reps[l].size() == 50);
        std::set<int> all(p.train_reps[l].begin(), p.train_reps[l].end());
        all.insert(p.test_reps[l].begin(), p.test_reps[l].end());
        CHECK(all.size() == 100);
    }
    CHECK(p.train_reps[0] != p.train_reps[1]);
    CHECK(make_split_plan(labels, reps, 43).train_reps != p.train_reps);
    const std::vector<int> odd = {0, 1, 2};
    CHECK_THROWS_AS(make_split_plan(labels, odd, 1), InsufficientReps);
}

TEST_CASE("confusion matrices and CSV") {
    ConfusionMatrix cm({1, 2, 5});
    cm.add(1, 1);
    cm.add(1, 2);
    cm.add(5, 5);
    CHECK(cm.total() == 3);
    CHECK(cm.correct() == 2);
    CHECK_THROWS_AS(cm.add(3, 1), LabelMismatch);
    ConfusionMatrix other({1, 2, 5});
    other.add(2, 2);
    cm += other;
    CHECK(cm.correct() == 3);
    CHECK_THROWS_AS(cm += ConfusionMatrix({1, 2}), LabelMismatch);
    std::stringstream ss;
    write_confusion_csv(ss, cm);
    CHECK(ss.str().rfind("function,f01,f02,f05\nf01,1,1,0\n", 0) == 0);
    const ConfusionMatrix back = read_confusion_csv(ss);
    CHECK(back.labels == cm.labels);
    CHECK(back.counts == cm.counts);
}

TEST_CASE("subsample validation counting identities and determinism") {
    const FeatureDataset ds = synthetic(4, 20, 1.5, 5);
    ValidationOptions o;
    o.splits = 12;
    o.seed = 99;
    for (ClassifierKind k : {ClassifierKind::Knn, ClassifierKind::Tree}) {
        const ValidationResult a = subsample_validate(ds, ds, k, o);
        const ValidationResult b = subsample_validate(ds, ds, k, o);
        CHECK(a.accuracies == b.accuracies);
        CHECK(a.confusion.counts == b.confusion.counts);
        REQUIRE(a.accuracies.size() == 12);
        CHECK(a.confusion.total() == 4 * 10 * 12);
        for (int r = 0; r < 4; ++r) CHECK(a.confusion.counts.row(r).sum() == 10 * 12);
        double sum = 0.0;
        for (double acc : a.accuracies) {
            CHECK(acc >= 0.0);
            CHECK(acc <= 1.0);
            sum += acc;
        }
        CHECK(sum * 40.0 == doctest::Approx(static_cast<double>(a.confusion.correct())));
    }
}

TEST_CASE("cross-dataset validation uses aligned plans and checks compatibility") {
    const FeatureDataset a = synthetic(3, 10, 0.5, 1);
    FeatureDataset b = synthetic(3, 10, 0.5, 2);
    ValidationOptions o;
    o.splits = 5;
    o.seed = 3;
    const FeatureDataset* tests[] = {&a, &b};
    const auto many = subsample_validate_many(a, tests, ClassifierKind::Knn, o);
    CHECK(many[0].accuracies == subsample_validate(a, a, ClassifierKind::Knn, o).accuracies);
    CHECK(many[1].accuracies == subsample_validate(a, b, ClassifierKind::Knn, o).accuracies);

    FeatureDataset fewer = synthetic(2, 10, 0.5, 2);
    CHECK_THROWS_AS(subsample_validate(a, fewer, ClassifierKind::Knn, o), LabelMismatch);
    FeatureDataset shorter = synthetic(3, 8, 0.5, 2);
    CHECK_THROWS_AS(subsample_validate(a, shorter, ClassifierKind::Knn, o), InsufficientReps);
}

TEST_CASE("shuffled training labels fall to chance") {
    const FeatureDataset ds = synthetic(24, 20, 0.3, 8);
    ValidationOptions o;
    o.splits = 5;
    o.seed = 1;
    const double clean = stats::median(subsample_validate(ds, ds, ClassifierKind::Knn, o).accuracies);
    o.shuffle_train_labels = true;
    const double shuffled = stats::median(subsample_validate(ds, ds, ClassifierKind::Knn, o).accuracies);
    CHECK(clean > 0.9);
    CHECK(shuffled < 0.1);
}

TEST_CASE("dataset CSV round-trips") {
    FeatureDataset ds = synthetic(2, 3, 1.0, 4);
    ds.rows[1].vector.values[5] = std::numeric_limits<double>::quiet_NaN();
    std::stringstream ss;
    write_dataset_csv(ss, ds);
    const std::string text = ss.str();
    CHECK(text.rfind("function,rep,ela_distr.skewness,", 0) == 0);
    const FeatureDataset back = read_dataset_csv(ss, sampling::Strategy::Sobol, 30);
    REQUIRE(back.rows.size() == ds.rows.size());
    CHECK(back.strategy == sampling::Strategy::Sobol);
    CHECK(std::isnan(back.rows[1].vector.values[5]));
    CHECK(back.rows[2].vector.values[7] == ds.rows[2].vector.values[7]);
    CHECK(back.find(2, 1).value() == 4u);
    CHECK_FALSE(back.find(3, 0).has_value());
    std::stringstream again;
    write_dataset_csv(again, back);
    CHECK(again.str() == text);

    std::stringstream bad("function,rep,x\n1,0,2\n");
    CHECK_THROWS_AS(read_dataset_csv(bad, sampling::Strategy::Sobol, 30), SchemaMismatch);
}
