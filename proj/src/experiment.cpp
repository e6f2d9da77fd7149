#include "elaprobe/experiment.hpp"

#include "elaprobe/errors.hpp"
#include "elaprobe/io.hpp"
#include "elaprobe/plots.hpp"
#include "elaprobe/rng.hpp"
#include "elaprobe/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace elaprobe::experiment {

using classify::ClassifierKind;
using classify::FeatureDataset;
using sampling::Strategy;
using json = nlohmann::ordered_json;

namespace {

constexpr int kManifestVersion = 1;

std::uint64_t u64(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }
std::uint64_t tag(rng::Purpose p) { return static_cast<std::uint64_t>(p); }

}  // namespace

// ---- config -----------------------------------------------------------------------------------

ExperimentConfig::ExperimentConfig() {
    functions.resize(problems::kNumFunctions);
    std::iota(functions.begin(), functions.end(), 1);
}

ExperimentConfig full_preset() { return ExperimentConfig{}; }

ExperimentConfig quick_preset() {
    ExperimentConfig c;
    c.functions.clear();
    for (int f = 1; f <= problems::kNumFunctions; f += 2) c.functions.push_back(f);
    c.reps = 30;
    c.splits = 20;
    c.sample_sizes = {30, 300};
    return c;
}

std::optional<ExperimentConfig> preset(std::string_view name) {
    if (name == "full") return full_preset();
    if (name == "quick") return quick_preset();
    return std::nullopt;
}

void validate(const ExperimentConfig& c) {
    if (c.strategies.empty() || c.sample_sizes.empty() || c.functions.empty() || c.classifiers.empty())
        throw InvalidArgument("strategies, sample_sizes, functions and classifiers must be non-empty");
    if (c.reps < 2 || c.reps % 2 != 0) throw InvalidArgument("reps must be even and >= 2, got " + std::to_string(c.reps));
    if (c.splits < 1) throw InvalidArgument("splits must be >= 1");
    if (c.dim < 2) throw InvalidArgument("dim must be >= 2");
    for (int n : c.sample_sizes)
        if (n < features::kMinSampleSize) throw InvalidArgument("sample sizes must be >= 10, got " + std::to_string(n));
    for (int f : c.functions) (void)problems::FunctionId(f);
    auto has_duplicates = [](auto v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) != v.end();
    };
    if (has_duplicates(c.strategies) || has_duplicates(c.sample_sizes) || has_duplicates(c.functions) ||
        has_duplicates(c.classifiers))
        throw InvalidArgument("config lists must not repeat entries");
}

ExperimentConfig config_from_json(std::string_view text, ExperimentConfig c) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
    static const std::vector<std::string> known = {"strategies", "sample_sizes", "functions", "reps",     "splits",
                                                   "classifiers", "dim",         "base_seed", "output_dir"};
    for (const auto& [key, _] : doc.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw InvalidArgument("unknown config field '" + key + "'");
    try {
        if (doc.contains("strategies")) {
            c.strategies.clear();
            for (const auto& s : doc["strategies"]) {
                const auto parsed = sampling::parse_strategy(s.get<std::string>());
                if (!parsed) throw InvalidArgument("unknown strategy '" + s.get<std::string>() + "'");
                c.strategies.push_back(*parsed);
            }
        }
        if (doc.contains("sample_sizes")) c.sample_sizes = doc["sample_sizes"].get<std::vector<int>>();
        if (doc.contains("functions")) {
            c.functions.clear();
            for (const auto& f : doc["functions"]) {
                if (f.is_string()) {
                    const auto fid = problems::parse_function_id(f.get<std::string>());
                    if (!fid) throw InvalidArgument("unknown function '" + f.get<std::string>() + "'");
                    c.functions.push_back(fid->value());
                } else {
                    c.functions.push_back(f.get<int>());
                }
            }
        }
        if (doc.contains("reps")) c.reps = doc["reps"].get<int>();
        if (doc.contains("splits")) c.splits = doc["splits"].get<int>();
        if (doc.contains("classifiers")) {
            c.classifiers.clear();
            for (const auto& k : doc["classifiers"]) {
                const auto parsed = classify::parse_classifier(k.get<std::string>());
                if (!parsed) throw InvalidArgument("unknown classifier '" + k.get<std::string>() + "'");
                c.classifiers.push_back(*parsed);
            }
        }
        if (doc.contains("dim")) c.dim = doc["dim"].get<int>();
        if (doc.contains("base_seed")) c.base_seed = doc["base_seed"].get<std::uint64_t>();
        if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config field has the wrong type: ") + e.what());
    }
    validate(c);
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json doc = json::object();
    json strategies = json::array();
    for (Strategy s : c.strategies) strategies.push_back(std::string(sampling::to_string(s)));
    doc["strategies"] = strategies;
    doc["sample_sizes"] = c.sample_sizes;
    doc["functions"] = c.functions;
    doc["reps"] = c.reps;
    doc["splits"] = c.splits;
    json classifiers = json::array();
    for (ClassifierKind k : c.classifiers) classifiers.push_back(std::string(classify::to_string(k)));
    doc["classifiers"] = classifiers;
    doc["dim"] = c.dim;
    doc["base_seed"] = c.base_seed;
    doc["output_dir"] = c.output_dir.string();
    return doc.dump(2) + "\n";
}

// ---- seeds ------------------------------------------------------------------------------------

std::uint64_t design_seed(std::uint64_t base, Strategy s, int function, int rep) {
    return rng::derive_seed(base, {tag(rng::Purpose::Design), u64(sampling::strategy_index(s)), u64(function), u64(rep)});
}

std::uint64_t instance_seed(std::uint64_t base, int function) {
    return rng::derive_seed(base, {tag(rng::Purpose::Instance), u64(function), 0, 0});
}

std::uint64_t validation_seed(std::uint64_t base, int n) { return rng::derive_seed(base, {tag(rng::Purpose::Split), u64(n)}); }

// ---- scheduling -------------------------------------------------------------------------------

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    const auto workers = std::min<std::size_t>(count, static_cast<std::size_t>(resolve_jobs(jobs)));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (std::size_t i; !failed.load() && (i = next.fetch_add(1)) < count;) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---- datasets ---------------------------------------------------------------------------------

features::FeatureVector featurize_rep(Strategy strategy, int n, int function, int rep, const ExperimentConfig& config) {
    const std::uint64_t dseed = design_seed(config.base_seed, strategy, function, rep);
    const std::uint64_t iseed = instance_seed(config.base_seed, function);
    const sampling::Design design = sampling::generate(strategy, n, config.dim, dseed);
    const problems::ProblemInstance instance = problems::instantiate(problems::FunctionId(function), config.dim, iseed);
    features::EvaluatedSample sample;
    sample.X = sampling::scale_to_domain(design.points, problems::kDomainLower, problems::kDomainUpper);
    sample.y = problems::batch_evaluate(instance, sample.X);
    sample.provenance = {strategy, dseed, function, iseed};
    return features::compute_all(sample);
}

FeatureDataset build_dataset(Strategy strategy, int n, const ExperimentConfig& config, int jobs) {
    validate(config);
    FeatureDataset ds;
    ds.strategy = strategy;
    ds.n_samples = n;
    const std::size_t reps = static_cast<std::size_t>(config.reps);
    ds.rows.resize(config.functions.size() * reps);
    parallel_for(ds.rows.size(), jobs, [&](std::size_t i) {
        const int function = config.functions[i / reps];
        const int rep = static_cast<int>(i % reps);
        try {
            ds.rows[i] = {function, rep, featurize_rep(strategy, n, function, rep, config)};
        } catch (const std::exception& e) {
            throw Error("cell strategy=" + std::string(sampling::to_string(strategy)) + " n=" + std::to_string(n) +
                        " function=" + std::to_string(function) + " rep=" + std::to_string(rep) + ": " + e.what());
        }
    });
    return ds;
}

std::filesystem::path dataset_path(const std::filesystem::path& dir, Strategy strategy, int n) {
    return dir / "datasets" / (std::string(sampling::to_string(strategy)) + "_n" + std::to_string(n) + ".csv");
}

namespace {

std::filesystem::path manifest_path(const std::filesystem::path& dir, Strategy strategy, int n) {
    auto p = dataset_path(dir, strategy, n);
    p.replace_extension(".json");
    return p;
}

json manifest(Strategy strategy, int n, const ExperimentConfig& c) {
    json m = json::object();
    m["version"] = kManifestVersion;
    m["strategy"] = std::string(sampling::to_string(strategy));
    m["n"] = n;
    m["dim"] = c.dim;
    m["functions"] = c.functions;
    m["reps"] = c.reps;
    m["base_seed"] = c.base_seed;
    return m;
}

}  // namespace

std::optional<FeatureDataset> load_cached_dataset(const std::filesystem::path& dir, Strategy strategy, int n,
                                                  const ExperimentConfig& config) {
    const auto csv = dataset_path(dir, strategy, n);
    const auto man = manifest_path(dir, strategy, n);
    if (!std::filesystem::exists(csv) || !std::filesystem::exists(man)) return std::nullopt;
    try {
        if (json::parse(io::read_text_file(man)) != manifest(strategy, n, config)) return std::nullopt;
        std::ifstream in(csv);
        FeatureDataset ds = classify::read_dataset_csv(in, strategy, n);
        if (ds.rows.size() != config.functions.size() * static_cast<std::size_t>(config.reps)) return std::nullopt;
        return ds;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void save_dataset(const std::filesystem::path& dir, const FeatureDataset& ds, const ExperimentConfig& config) {
    std::ostringstream csv;
    classify::write_dataset_csv(csv, ds);
    io::write_text_file(dataset_path(dir, ds.strategy, ds.n_samples), csv.str());
    io::write_text_file(manifest_path(dir, ds.strategy, ds.n_samples), manifest(ds.strategy, ds.n_samples, config).dump(2) + "\n");
}

FeatureDataset load_dataset(const std::filesystem::path& dir, Strategy strategy, int n) {
    const auto csv = dataset_path(dir, strategy, n);
    if (!std::filesystem::exists(csv)) throw MissingDataset("no dataset at " + csv.string());
    std::ifstream in(csv);
    return classify::read_dataset_csv(in, strategy, n);
}

// ---- statistics -------------------------------------------------------------------------------

FeatureStat summarize(std::span<const double> values) {
    std::vector<double> finite;
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    FeatureStat s;
    s.finite = static_cast<int>(finite.size());
    if (finite.empty()) {
        s.median = s.iqr = s.mean = s.sd = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.median = stats::median(finite);
    s.iqr = stats::iqr(finite);
    s.mean = stats::mean(finite);
    s.sd = finite.size() > 1 ? stats::sample_sd(finite) : std::numeric_limits<double>::quiet_NaN();
    return s;
}

void add_feature_stats(const FeatureDataset& ds, FeatureStats& out) {
    std::map<int, std::vector<const classify::LabeledRow*>> by_label;
    for (const auto& row : ds.rows) by_label[row.label].push_back(&row);
    std::vector<double> values;
    for (const auto& [label, rows] : by_label) {
        for (std::size_t f = 0; f < features::kNumFeatures; ++f) {
            values.clear();
            for (const auto* r : rows) values.push_back(r->vector.values[f]);
            out[StatKey{ds.strategy, ds.n_samples, label, f}] = summarize(values);
        }
    }
}

KsResult ks_two_sample(std::span<const double> a_in, std::span<const double> b_in) {
    if (a_in.size() < 5 || b_in.size() < 5)
        throw TooFewSamples("KS test needs at least 5 values per side, got " + std::to_string(a_in.size()) + " and " +
                            std::to_string(b_in.size()));
    std::vector<double> a(a_in.begin(), a_in.end()), b(b_in.begin(), b_in.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    }
    if (d == 0.0) p = 1.0;
    return {d, std::clamp(p, 0.0, 1.0)};
}

Divergence divergence_census(const FeatureStats& stats, int n, std::span<const int> functions) {
    Divergence div;
    div.pairs = static_cast<int>(functions.size() * features::kNumFeatures);
    for (int f : functions)
        for (Strategy s : sampling::kAllStrategies)
            if (!stats.count(StatKey{s, n, f, 0}))
                throw MissingStrategy("no statistics for " + std::string(sampling::to_string(s)) + " at n=" +
                                      std::to_string(n) + ", function " + std::to_string(f));
    for (int f : functions) {
        for (std::size_t feat = 0; feat < features::kNumFeatures; ++feat) {
            std::array<double, 5> med{};
            for (std::size_t s = 0; s < 5; ++s) {
                const auto it = stats.find(StatKey{sampling::kAllStrategies[s], n, f, feat});
                if (it == stats.end()) throw MissingStrategy("incomplete statistics at n=" + std::to_string(n));
                med[s] = it->second.median;
            }
            for (std::size_t s = 0; s < 5; ++s) {
                if (std::isnan(med[s])) continue;
                double lo = std::numeric_limits<double>::infinity();
                double hi = -std::numeric_limits<double>::infinity();
                for (std::size_t o = 0; o < 5; ++o) {
                    if (o == s || std::isnan(med[o])) continue;
                    lo = std::min(lo, med[o]);
                    hi = std::max(hi, med[o]);
                }
                if (lo > hi) continue;
                if (med[s] < lo || med[s] > hi) ++div.flagged[s];
            }
        }
    }
    for (std::size_t s = 0; s < 5; ++s)
        div.fraction[s] = div.pairs > 0 ? static_cast<double>(div.flagged[s]) / div.pairs : 0.0;
    return div;
}

// ---- report files -----------------------------------------------------------------------------

std::string heatmap_name(ClassifierKind k, int n, std::string_view ext, bool mean) {
    return std::string(mean ? "heatmap_mean_" : "heatmap_") + std::string(classify::to_string(k)) + "_n" +
           std::to_string(n) + "." + std::string(ext);
}
std::string accuracies_name(ClassifierKind k, int n) {
    return "accuracies_" + std::string(classify::to_string(k)) + "_n" + std::to_string(n) + ".csv";
}
std::string confusion_name(ClassifierKind k, int n, Strategy train, Strategy test) {
    return "confusion_" + std::string(classify::to_string(k)) + "_n" + std::to_string(n) + "_" +
           std::string(sampling::to_string(train)) + "_" + std::string(sampling::to_string(test)) + ".csv";
}
std::string divergence_name(int n) { return "divergence_n" + std::to_string(n) + ".csv"; }
std::string feature_stats_name(int n) { return "feature_stats_n" + std::to_string(n) + ".csv"; }

Eigen::MatrixXd heatmap(const ExperimentReport& report, ClassifierKind k, int n, std::span<const Strategy> strategies,
                        bool use_mean) {
    const auto m = static_cast<Eigen::Index>(strategies.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto it = report.accuracy_cells.find(CellKey{k, n, strategies[i], strategies[j]});
            if (it == report.accuracy_cells.end() || it->second.empty()) continue;
            out(i, j) = use_mean ? stats::mean(it->second) : stats::median(it->second);
        }
    }
    return out;
}

std::string heatmap_csv(const Eigen::MatrixXd& values, std::span<const Strategy> strategies) {
    std::string out = "train";
    for (Strategy s : strategies) out += "," + std::string(sampling::to_string(s));
    out += "\n";
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out += sampling::to_string(strategies[i]);
        for (Eigen::Index j = 0; j < values.cols(); ++j) out += "," + io::format_double(values(i, j));
        out += "\n";
    }
    return out;
}

std::string heatmap_text(const Eigen::MatrixXd& values, std::span<const Strategy> strategies, const std::string& title) {
    std::size_t width = 5;
    for (Strategy s : strategies) width = std::max(width, sampling::to_string(s).size());
    auto pad = [&](std::string_view s) { return std::string(s) + std::string(width + 2 - std::min(width, s.size()), ' '); };
    std::string out = title + "\n" + pad("train\\test");
    for (Strategy s : strategies) out += pad(sampling::to_string(s));
    out += "\n";
    char buf[32];
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out += pad(sampling::to_string(strategies[i]));
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.3f", values(i, j));
            out += pad(buf);
        }
        out += "\n";
    }
    return out;
}

std::string accuracies_csv(const ExperimentReport& report, ClassifierKind k, int n) {
    std::string out = "train,test,split,accuracy\n";
    for (const auto& [key, acc] : report.accuracy_cells) {
        if (key.classifier != k || key.n != n) continue;
        for (std::size_t s = 0; s < acc.size(); ++s)
            out += std::string(sampling::to_string(key.train)) + "," + std::string(sampling::to_string(key.test)) + "," +
                   std::to_string(s) + "," + io::format_double(acc[s]) + "\n";
    }
    return out;
}

std::string divergence_csv(const Divergence& div) {
    std::string out = "strategy,flagged,pairs,fraction\n";
    for (std::size_t s = 0; s < 5; ++s)
        out += std::string(sampling::to_string(sampling::kAllStrategies[s])) + "," + std::to_string(div.flagged[s]) + "," +
               std::to_string(div.pairs) + "," + io::format_double(div.fraction[s]) + "\n";
    return out;
}

std::string feature_stats_csv(const FeatureStats& stats, int n) {
    std::string out = "strategy,function,feature,finite,median,iqr,mean,sd\n";
    for (const auto& [key, st] : stats) {
        if (key.n != n) continue;
        out += std::string(sampling::to_string(key.strategy)) + "," + std::to_string(key.function) + "," +
               std::string(features::feature_names()[key.feature]) + "," + std::to_string(st.finite) + "," +
               io::format_double(st.median) + "," + io::format_double(st.iqr) + "," + io::format_double(st.mean) + "," +
               io::format_double(st.sd) + "\n";
    }
    return out;
}

std::vector<AccuracyRow> read_accuracies(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingDataset("no accuracies file at " + path.string());
    std::ifstream in(path);
    const io::CsvTable t = io::read_csv(in);
    if (t.header != std::vector<std::string>{"train", "test", "split", "accuracy"})
        throw SchemaMismatch("accuracies file header must be train,test,split,accuracy");
    std::vector<AccuracyRow> rows;
    for (const auto& r : t.rows) {
        const auto train = sampling::parse_strategy(r[0]);
        const auto test = sampling::parse_strategy(r[1]);
        if (!train || !test) throw SchemaMismatch("unknown strategy in accuracies file");
        rows.push_back({*train, *test, static_cast<int>(io::parse_int(r[2])), io::parse_double(r[3])});
    }
    return rows;
}

FeatureStats read_feature_stats(const std::filesystem::path& path, int n) {
    if (!std::filesystem::exists(path)) throw MissingDataset("no feature statistics at " + path.string());
    std::ifstream in(path);
    const io::CsvTable t = io::read_csv(in);
    if (t.header.size() != 8 || t.header[0] != "strategy") throw SchemaMismatch("unexpected feature statistics header");
    FeatureStats stats;
    for (const auto& r : t.rows) {
        const auto s = sampling::parse_strategy(r[0]);
        const auto f = features::feature_index(r[2]);
        if (!s || !f) throw SchemaMismatch("unknown strategy or feature in feature statistics");
        FeatureStat st;
        st.finite = static_cast<int>(io::parse_int(r[3]));
        st.median = io::parse_double(r[4]);
        st.iqr = io::parse_double(r[5]);
        st.mean = io::parse_double(r[6]);
        st.sd = io::parse_double(r[7]);
        stats[StatKey{*s, n, static_cast<int>(io::parse_int(r[1])), *f}] = st;
    }
    return stats;
}

// ---- grid -------------------------------------------------------------------------------------

ExperimentReport run_grid(const ExperimentConfig& config, const RunOptions& options) {
    validate(config);
    const auto& dir = config.output_dir;
    auto say = [&](const std::string& line) {
        if (options.progress) options.progress(line);
    };

    std::map<std::pair<int, Strategy>, FeatureDataset> datasets;
    ExperimentReport report;
    for (int n : config.sample_sizes) {
        for (Strategy s : config.strategies) {
            std::optional<FeatureDataset> ds;
            if (options.reuse_datasets) ds = load_cached_dataset(dir, s, n, config);
            const bool cached = ds.has_value();
            if (!ds) {
                ds = build_dataset(s, n, config, options.jobs);
                save_dataset(dir, *ds, config);
            }
            add_feature_stats(*ds, report.feature_stats);
            say("dataset " + std::string(sampling::to_string(s)) + " n=" + std::to_string(n) +
                (cached ? " (cached)" : " built"));
            datasets.emplace(std::make_pair(n, s), std::move(*ds));
        }
    }

    // One job per (classifier, n, train strategy); it trains once per split and scores all test strategies.
    struct Block {
        ClassifierKind k;
        int n;
        Strategy train;
    };
    std::vector<Block> blocks;
    for (ClassifierKind k : config.classifiers)
        for (int n : config.sample_sizes)
            for (Strategy s : config.strategies) blocks.push_back({k, n, s});
    std::vector<std::vector<classify::ValidationResult>> results(blocks.size());
    std::mutex say_mutex;
    parallel_for(blocks.size(), options.jobs, [&](std::size_t b) {
        const Block& blk = blocks[b];
        std::vector<const FeatureDataset*> tests;
        for (Strategy t : config.strategies) tests.push_back(&datasets.at({blk.n, t}));
        classify::ValidationOptions vo;
        vo.splits = config.splits;
        vo.seed = validation_seed(config.base_seed, blk.n);
        try {
            results[b] = classify::subsample_validate_many(datasets.at({blk.n, blk.train}), tests, blk.k, vo);
        } catch (const std::exception& e) {
            throw Error("cell classifier=" + std::string(classify::to_string(blk.k)) + " n=" + std::to_string(blk.n) +
                        " train=" + std::string(sampling::to_string(blk.train)) + ": " + e.what());
        }
        std::lock_guard lock(say_mutex);
        say("grid " + std::string(classify::to_string(blk.k)) + " n=" + std::to_string(blk.n) + " train=" +
            std::string(sampling::to_string(blk.train)));
    });
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t t = 0; t < config.strategies.size(); ++t) {
            const CellKey key{blocks[b].k, blocks[b].n, blocks[b].train, config.strategies[t]};
            report.accuracy_cells[key] = std::move(results[b][t].accuracies);
            report.confusion.emplace(key, std::move(results[b][t].confusion));
        }
    }

    const bool all_strategies = config.strategies.size() == sampling::kAllStrategies.size();
    for (int n : config.sample_sizes) {
        io::write_text_file(dir / feature_stats_name(n), feature_stats_csv(report.feature_stats, n));
        if (all_strategies) {
            report.divergence[n] = divergence_census(report.feature_stats, n, config.functions);
            io::write_text_file(dir / divergence_name(n), divergence_csv(report.divergence[n]));
        }
        for (ClassifierKind k : config.classifiers) {
            const Eigen::MatrixXd med = heatmap(report, k, n, config.strategies);
            io::write_text_file(dir / heatmap_name(k, n, "csv"), heatmap_csv(med, config.strategies));
            io::write_text_file(dir / heatmap_name(k, n, "csv", true),
                                heatmap_csv(heatmap(report, k, n, config.strategies, true), config.strategies));
            io::write_text_file(dir / heatmap_name(k, n, "svg"),
                                plots::heatmap_svg(med, config.strategies,
                                                   std::string(classify::to_string(k)) + ", n = " + std::to_string(n)));
            io::write_text_file(dir / accuracies_name(k, n), accuracies_csv(report, k, n));
            for (Strategy tr : config.strategies) {
                for (Strategy te : config.strategies) {
                    std::ostringstream cm;
                    classify::write_confusion_csv(cm, report.confusion.at(CellKey{k, n, tr, te}));
                    io::write_text_file(dir / confusion_name(k, n, tr, te), cm.str());
                }
            }
        }
    }
    io::write_text_file(dir / "config.json", config_to_json(config));
    return report;
}

}  // namespace elaprobe::experiment
