#include "elaprobe/errors.hpp"
#include "elaprobe/experiment.hpp"
#include "elaprobe/io.hpp"
#include "elaprobe/rng.hpp"

#include "doctest.h"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <stdexcept>

using namespace elaprobe;
using namespace elaprobe::experiment;
using sampling::Strategy;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(const fs::path& dir) {
    ExperimentConfig c;
    c.functions = {1, 5, 20};
    c.sample_sizes = {30};
    c.reps = 6;
    c.splits = 3;
    c.base_seed = 17;
    c.output_dir = dir;
    return c;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("elaprobe_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("presets") {
    const ExperimentConfig full = full_preset();
    CHECK(full.functions.size() == 24);
    CHECK(full.reps == 100);
    CHECK(full.splits == 50);
    CHECK(full.sample_sizes == std::vector<int>{30, 300, 3125});
    CHECK(full.strategies.size() == 5);
    CHECK(full.classifiers.size() == 2);
    CHECK(full.dim == 5);
    const ExperimentConfig quick = quick_preset();
    CHECK(quick.functions.size() == 12);
    CHECK(quick.reps == 30);
    CHECK(quick.splits == 20);
    CHECK(quick.sample_sizes == std::vector<int>{30, 300});
    CHECK(preset("quick").has_value());
    CHECK_FALSE(preset("medium").has_value());
}

TEST_CASE("config JSON round-trip and validation") {
    ExperimentConfig c = tiny("out_dir");
    c.strategies = {Strategy::Sobol, Strategy::RandomMT};
    c.classifiers = {classify::ClassifierKind::Tree};
    const ExperimentConfig back = config_from_json(config_to_json(c));
    CHECK(back.strategies == c.strategies);
    CHECK(back.functions == c.functions);
    CHECK(back.sample_sizes == c.sample_sizes);
    CHECK(back.reps == c.reps);
    CHECK(back.classifiers == c.classifiers);
    CHECK(back.base_seed == c.base_seed);
    CHECK(back.output_dir == c.output_dir);
    CHECK(config_from_json(R"({"functions": ["f02", 3]})").functions == std::vector<int>{2, 3});
    CHECK(config_from_json(R"({"reps": 10})").splits == 50);
    CHECK_THROWS_AS(config_from_json(R"({"reps": 7})"), InvalidArgument);
    CHECK_THROWS_AS(config_from_json(R"({"reps": 0})"), InvalidArgument);
    CHECK_THROWS_AS(config_from_json(R"({"strategies": []})"), InvalidArgument);
    CHECK_THROWS_AS(config_from_json(R"({"strategies": ["foo"]})"), InvalidArgument);
    CHECK_THROWS_AS(config_from_json(R"({"colour": 1})"), InvalidArgument);
    CHECK_THROWS_AS(config_from_json(R"({"reps": "ten"})"), InvalidArgument);
    CHECK_THROWS_AS(config_from_json("not json"), InvalidArgument);
}

TEST_CASE("seed derivation separates strategies but shares instances") {
    std::set<std::uint64_t> seeds;
    for (Strategy s : sampling::kAllStrategies)
        for (int f = 1; f <= 24; ++f)
            for (int r = 0; r < 100; ++r) seeds.insert(design_seed(1, s, f, r));
    CHECK(seeds.size() == 5u * 24u * 100u);
    CHECK(instance_seed(1, 3) == instance_seed(1, 3));
    CHECK(instance_seed(1, 3) != instance_seed(2, 3));
    CHECK(validation_seed(1, 30) != validation_seed(1, 300));
}

TEST_CASE("parallel_for covers every index and surfaces the lowest failing index") {
    std::vector<int> hits(101, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK(resolve_jobs(3) == 3);
    CHECK(resolve_jobs(0) >= 1);
    try {
        parallel_for(10, 1, [](std::size_t i) {
            if (i >= 4) throw std::runtime_error("index " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "index 4");
    }
}

TEST_CASE("summary statistics skip non-finite values") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> v = {1, 2, nan, 3, 4};
    const FeatureStat s = summarize(v);
    CHECK(s.finite == 4);
    CHECK(s.median == 2.5);
    CHECK(s.mean == 2.5);
    CHECK(s.iqr == doctest::Approx(1.5));
    const std::vector<double> none = {nan, nan};
    CHECK(std::isnan(summarize(none).median));
}

TEST_CASE("KS test edge cases") {
    const std::vector<double> a = {1, 2, 3, 4, 5, 6};
    const KsResult same = ks_two_sample(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);
    const std::vector<double> lo = {0, 0, 0, 0, 0}, hi = {1, 1, 1, 1, 1};
    const KsResult apart = ks_two_sample(lo, hi);
    CHECK(apart.statistic == 1.0);
    CHECK(apart.p_value < 0.01);
    const std::vector<double> four = {1, 2, 3, 4};
    CHECK_THROWS_AS(ks_two_sample(four, a), TooFewSamples);
    const std::vector<double> b = {0.5, 2.5, 3.5, 10, 11, 12, 13};
    // Largest ECDF gap occurs after 6 from a: 1 - 3/7.
    CHECK(ks_two_sample(a, b).statistic == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("KS rejection rate is calibrated under the null") {
    rng::MersenneTwister mt(31337);
    int rejections = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> a(50), b(50);
        for (auto& v : a) v = rng::standard_normal(mt);
        for (auto& v : b) v = rng::standard_normal(mt);
        if (ks_two_sample(a, b).p_value < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / trials;
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.09);
}

TEST_CASE("divergence census") {
    FeatureStats stats;
    const std::vector<int> functions = {1, 2};
    for (int f : functions)
        for (Strategy s : sampling::kAllStrategies)
            for (std::size_t k = 0; k < features::kNumFeatures; ++k) stats[StatKey{s, 30, f, k}].median = 1.0;
    const Divergence flat = divergence_census(stats, 30, functions);
    CHECK(flat.pairs == 92);
    for (double fr : flat.fraction) CHECK(fr == 0.0);

    stats[StatKey{Strategy::Sobol, 30, 2, 7}].median = std::numeric_limits<double>::infinity();
    stats[StatKey{Strategy::LhsCentered, 30, 1, 0}].median = -3.0;
    const Divergence d = divergence_census(stats, 30, functions);
    CHECK(d.flagged[4] == 1);
    CHECK(d.flagged[2] == 1);
    CHECK(d.flagged[0] == 0);
    CHECK(d.fraction[4] == doctest::Approx(1.0 / 92.0));

    stats.erase(StatKey{Strategy::RandomRandu, 30, 1, 0});
    CHECK_THROWS_AS(divergence_census(stats, 30, functions), MissingStrategy);
}

TEST_CASE("dataset cells are deterministic and share instances across strategies") {
    const ExperimentConfig c = tiny(scratch("ds"));
    const classify::FeatureDataset a = build_dataset(Strategy::Sobol, 30, c, 2);
    const classify::FeatureDataset b = build_dataset(Strategy::Sobol, 30, c, 1);
    REQUIRE(a.rows.size() == 18);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].label == c.functions[i / 6]);
        CHECK(a.rows[i].rep == static_cast<int>(i % 6));
        CHECK(a.rows[i].vector.values == b.rows[i].vector.values);
    }
    const auto mt = featurize_rep(Strategy::RandomMT, 30, 5, 0, c);
    const auto sb = featurize_rep(Strategy::Sobol, 30, 5, 0, c);
    CHECK(mt.provenance.instance_seed == sb.provenance.instance_seed);
    CHECK(mt.provenance.seed != sb.provenance.seed);
    CHECK(std::abs(mt["ela_meta.lin_simple.adj_r2"] - 1.0) < 1e-9);
}

TEST_CASE("dataset cache honours its manifest") {
    const fs::path dir = scratch("cache");
    ExperimentConfig c = tiny(dir);
    CHECK_FALSE(load_cached_dataset(dir, Strategy::RandomMT, 30, c).has_value());
    CHECK_THROWS_AS(load_dataset(dir, Strategy::RandomMT, 30), MissingDataset);
    const auto ds = build_dataset(Strategy::RandomMT, 30, c, 1);
    save_dataset(dir, ds, c);
    const auto cached = load_cached_dataset(dir, Strategy::RandomMT, 30, c);
    REQUIRE(cached.has_value());
    CHECK(cached->rows.size() == ds.rows.size());
    CHECK(cached->rows[3].vector.values == ds.rows[3].vector.values);
    c.base_seed += 1;
    CHECK_FALSE(load_cached_dataset(dir, Strategy::RandomMT, 30, c).has_value());
}

TEST_CASE("grid run writes every artifact and reruns byte-identically") {
    const fs::path dir1 = scratch("grid1"), dir2 = scratch("grid2");
    const ExperimentConfig c1 = tiny(dir1);
    ExperimentConfig c2 = c1;
    c2.output_dir = dir2;
    std::vector<std::string> lines;
    RunOptions o;
    o.jobs = 2;
    o.progress = [&](const std::string& l) { lines.push_back(l); };
    const ExperimentReport r = run_grid(c1, o);
    RunOptions serial;
    serial.jobs = 1;
    run_grid(c2, serial);
    CHECK(r.accuracy_cells.size() == 2u * 25u);
    for (const auto& [key, acc] : r.accuracy_cells) CHECK(acc.size() == 3);
    for (const auto& [key, cm] : r.confusion) CHECK(cm.total() == 3 * 3 * 3);
    CHECK(r.divergence.count(30) == 1);
    CHECK(lines.size() == 5 + 10);

    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir1)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const fs::path rel = fs::relative(entry.path(), dir1);
        if (rel == "config.json") continue;
        CHECK_MESSAGE(io::read_text_file(entry.path()) == io::read_text_file(dir2 / rel), rel.string());
    }
    // 5 datasets + manifests, 2 x (heatmap csv, mean csv, svg, accuracies, 25 confusion), stats, divergence, config.
    CHECK(files == 10 + 2 * 29 + 3);
    CHECK(fs::exists(dir1 / "heatmap_knn_n30.csv"));
    CHECK(fs::exists(dir1 / "confusion_tree_n30_sobol_lhs-centered.csv"));

    const auto rows = read_accuracies(dir1 / accuracies_name(classify::ClassifierKind::Knn, 30));
    CHECK(rows.size() == 25 * 3);
    const auto stats = read_feature_stats(dir1 / feature_stats_name(30), 30);
    CHECK(stats.size() == r.feature_stats.size());

    RunOptions reuse;
    reuse.reuse_datasets = true;
    std::vector<std::string> reuse_lines;
    reuse.progress = [&](const std::string& l) { reuse_lines.push_back(l); };
    const ExperimentReport again = run_grid(c1, reuse);
    CHECK(again.accuracy_cells == r.accuracy_cells);
    CHECK(reuse_lines[0].find("(cached)") != std::string::npos);
}

TEST_CASE("heatmap rendering") {
    ExperimentReport r;
    const std::vector<Strategy> s = {Strategy::RandomMT, Strategy::Sobol};
    r.accuracy_cells[CellKey{classify::ClassifierKind::Knn, 30, Strategy::RandomMT, Strategy::RandomMT}] = {0.5, 0.7, 0.9};
    r.accuracy_cells[CellKey{classify::ClassifierKind::Knn, 30, Strategy::RandomMT, Strategy::Sobol}] = {0.1, 0.2};
    const Eigen::MatrixXd h = heatmap(r, classify::ClassifierKind::Knn, 30, s);
    CHECK(h(0, 0) == 0.7);
    CHECK(h(0, 1) == doctest::Approx(0.15));
    CHECK(std::isnan(h(1, 1)));
    CHECK(heatmap(r, classify::ClassifierKind::Knn, 30, s, true)(0, 0) == doctest::Approx(0.7));
    CHECK(heatmap_csv(h, s).rfind("train,random-mt,sobol\nrandom-mt,0.69999999999999996,", 0) == 0);
    CHECK(heatmap_csv(h, s).find("\nsobol,nan,nan\n") != std::string::npos);
    const std::string text = heatmap_text(h, s, "title");
    CHECK(text.find("0.700") != std::string::npos);
    CHECK(text.rfind("title\n", 0) == 0);
}
