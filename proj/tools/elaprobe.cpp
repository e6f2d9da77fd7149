// elaprobe command-line interface. Exit codes: 0 success, 1 runtime failure, 2 usage error.
#include "elaprobe/classify.hpp"
#include "elaprobe/errors.hpp"
#include "elaprobe/experiment.hpp"
#include "elaprobe/features.hpp"
#include "elaprobe/io.hpp"
#include "elaprobe/plots.hpp"
#include "elaprobe/problems.hpp"
#include "elaprobe/sampling.hpp"
#include "elaprobe/stats.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace elaprobe;
using classify::ClassifierKind;
using sampling::Strategy;

namespace {

const std::vector<std::string> kStrategyNames = {"random-mt", "random-randu", "lhs-centered", "lhs-improved", "sobol"};

Strategy strategy_of(const std::string& name) { return *sampling::parse_strategy(name); }

/// Value of ELA_PROBE_SEED when set; a malformed value is a usage error.
std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("ELA_PROBE_SEED");
    if (!raw || !*raw) return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw, &used, 0);
        if (raw[used] != '\0') throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw CLI::ValidationError("ELA_PROBE_SEED", std::string("not an unsigned integer: ") + raw);
    }
}

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, std::uint64_t fallback) {
    if (flag->count() > 0) return flag_value;
    if (const auto env = env_seed()) return *env;
    return fallback;
}

Eigen::MatrixXd read_design_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return sampling::read_design_csv(in);
}

/// Evaluated sample CSV: x1..xd,y.
features::EvaluatedSample read_sample_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    const io::CsvTable t = io::read_csv(in);
    if (t.header.size() < 2 || t.header.back() != "y") throw SchemaMismatch("sample CSV needs columns x1..xd,y");
    const auto d = static_cast<Eigen::Index>(t.header.size() - 1);
    features::EvaluatedSample s;
    s.X.resize(static_cast<Eigen::Index>(t.rows.size()), d);
    s.y.resize(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) s.X(static_cast<Eigen::Index>(i), j) = io::parse_double(t.rows[i][static_cast<std::size_t>(j)]);
        s.y[static_cast<Eigen::Index>(i)] = io::parse_double(t.rows[i].back());
    }
    return s;
}

std::string sample_csv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    std::string out;
    for (Eigen::Index j = 0; j < X.cols(); ++j) out += "x" + std::to_string(j + 1) + ",";
    out += "y\n";
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) out += io::format_double(X(i, j)) + ",";
        out += io::format_double(y[i]) + "\n";
    }
    return out;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-")
        std::cout << content;
    else
        io::write_text_file(out_path, content);
}

experiment::ExperimentConfig load_config(const std::string& config_path, const std::string& preset_name) {
    experiment::ExperimentConfig base = experiment::full_preset();
    if (!preset_name.empty()) base = *experiment::preset(preset_name);
    if (config_path.empty()) return base;
    return experiment::config_from_json(io::read_text_file(config_path), base);
}

// Histogram panels: rows = sample sizes, columns = strategies.
void write_histograms(const experiment::ExperimentConfig& config, const std::string& request) {
    const auto colon = request.rfind(':');
    if (colon == std::string::npos) throw InvalidArgument("--hist expects <feature>:<function>, got '" + request + "'");
    const std::string feature = request.substr(0, colon);
    const auto fidx = features::feature_index(feature);
    const auto fid = problems::parse_function_id(request.substr(colon + 1));
    if (!fidx) throw InvalidArgument("unknown feature '" + feature + "'");
    if (!fid) throw InvalidArgument("unknown function '" + request.substr(colon + 1) + "'");
    std::vector<plots::Series> panels;
    for (int n : config.sample_sizes) {
        for (Strategy s : config.strategies) {
            const auto ds = experiment::load_dataset(config.output_dir, s, n);
            plots::Series series{std::string(sampling::to_string(s)) + ", n = " + std::to_string(n), {}};
            for (const auto& row : ds.rows)
                if (row.label == fid->value()) series.values.push_back(row.vector.values[*fidx]);
            panels.push_back(std::move(series));
        }
    }
    const std::string name = "hist_" + feature + "_" + fid->label() + ".svg";
    io::write_text_file(config.output_dir / name,
                        plots::histogram_panel_svg(panels, feature + " on " + fid->label(),
                                                   static_cast<int>(config.strategies.size())));
}

struct ReportArgs {
    std::string in;
    std::string what;
    std::string classifier = "knn";
    int n = 0;
    std::string train = "lhs-improved";
    std::string test = "lhs-improved";
};

std::vector<int> sizes_with(const fs::path& dir, const std::string& prefix) {
    std::vector<int> sizes;
    static const std::regex pattern(R"(.*_n(\d+)\.csv)");
    if (!fs::exists(dir)) return sizes;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        std::smatch m;
        if (name.rfind(prefix, 0) == 0 && std::regex_match(name, m, pattern)) sizes.push_back(std::stoi(m[1]));
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    return sizes;
}

int run_report(const ReportArgs& a) {
    const fs::path dir = a.in;
    if (!fs::is_directory(dir)) throw MissingDataset("no report directory at " + dir.string());
    if (a.what == "divergence") {
        const std::vector<int> sizes = a.n > 0 ? std::vector<int>{a.n} : sizes_with(dir, "feature_stats_n");
        if (sizes.empty()) throw MissingDataset("no feature_stats_n<k>.csv files in " + dir.string());
        for (int n : sizes) {
            const auto stats = experiment::read_feature_stats(dir / experiment::feature_stats_name(n), n);
            std::vector<int> functions;
            for (const auto& [key, _] : stats) functions.push_back(key.function);
            std::sort(functions.begin(), functions.end());
            functions.erase(std::unique(functions.begin(), functions.end()), functions.end());
            const auto div = experiment::divergence_census(stats, n, functions);
            io::write_text_file(dir / experiment::divergence_name(n), experiment::divergence_csv(div));
            std::vector<std::string> labels(kStrategyNames.begin(), kStrategyNames.end());
            io::write_text_file(dir / ("divergence_n" + std::to_string(n) + ".svg"),
                                plots::bar_svg(labels, div.fraction, "median divergence, n = " + std::to_string(n)));
            std::cout << "n=" << n;
            for (std::size_t s = 0; s < 5; ++s) std::cout << ' ' << kStrategyNames[s] << '=' << io::format_double(div.fraction[s]);
            std::cout << '\n';
        }
        return 0;
    }
    if (a.what == "confusion") {
        const auto kind = *classify::parse_classifier(a.classifier);
        if (a.n <= 0) throw InvalidArgument("--what confusion needs --n");
        const fs::path src = dir / experiment::confusion_name(kind, a.n, strategy_of(a.train), strategy_of(a.test));
        if (!fs::exists(src)) throw MissingDataset("no confusion matrix at " + src.string());
        std::ifstream in(src);
        const classify::ConfusionMatrix cm = classify::read_confusion_csv(in);
        std::string csv = "function";
        for (int l : cm.labels) csv += "," + problems::FunctionId(l).label();
        csv += "\n";
        for (Eigen::Index i = 0; i < cm.counts.rows(); ++i) {
            const double row = cm.counts.row(i).cast<double>().sum();
            csv += problems::FunctionId(cm.labels[static_cast<std::size_t>(i)]).label();
            for (Eigen::Index j = 0; j < cm.counts.cols(); ++j)
                csv += "," + io::format_double(row > 0 ? 100.0 * cm.counts(i, j) / row : 0.0);
            csv += "\n";
        }
        fs::path out = src;
        const std::string stem = "confusion_pct" + src.stem().string().substr(std::string("confusion").size());
        io::write_text_file(dir / (stem + ".csv"), csv);
        io::write_text_file(dir / (stem + ".svg"),
                            plots::confusion_svg(cm, a.classifier + ", n = " + std::to_string(a.n) + ", " + a.train +
                                                         " -> " + a.test));
        std::cout << "accuracy " << io::format_double(static_cast<double>(cm.correct()) / static_cast<double>(cm.total()))
                  << '\n';
        return 0;
    }
    // boxplot: matched-strategy accuracies, one row per (classifier, n, strategy, split).
    std::string csv = "classifier,n,strategy,split,accuracy\n";
    std::vector<plots::Series> groups;
    bool any = false;
    for (const std::string clf : {"knn", "tree"}) {
        for (int n : sizes_with(dir, "accuracies_" + clf + "_n")) {
            if (a.n > 0 && n != a.n) continue;
            const auto rows = experiment::read_accuracies(dir / experiment::accuracies_name(*classify::parse_classifier(clf), n));
            for (Strategy s : sampling::kAllStrategies) {
                plots::Series g{clf + " n=" + std::to_string(n) + " " + std::string(sampling::to_string(s)), {}};
                for (const auto& r : rows) {
                    if (r.train != s || r.test != s) continue;
                    csv += clf + "," + std::to_string(n) + "," + std::string(sampling::to_string(s)) + "," +
                           std::to_string(r.split) + "," + io::format_double(r.accuracy) + "\n";
                    g.values.push_back(r.accuracy);
                }
                if (!g.values.empty()) groups.push_back(std::move(g));
            }
            any = true;
        }
    }
    if (!any) throw MissingDataset("no accuracies_<classifier>_n<k>.csv files in " + dir.string());
    io::write_text_file(dir / "boxplot.csv", csv);
    io::write_text_file(dir / "boxplot.svg", plots::boxplot_svg(groups, "matched-strategy accuracy"));
    std::cout << "wrote " << (dir / "boxplot.csv").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-strategy sensitivity of landscape features"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // design
    auto* design = app.add_subcommand("design", "Generate a unit-cube design and print its discrepancy");
    std::string d_strategy;
    int d_n = 0, d_dim = 0;
    std::uint64_t d_seed = 0;
    std::string d_out;
    design->add_option("--strategy", d_strategy, "Sampling strategy")->required()->check(CLI::IsMember(kStrategyNames));
    design->add_option("--n", d_n, "Number of points")->required();
    design->add_option("--dim", d_dim, "Dimension")->required();
    auto* d_seed_opt = design->add_option("--seed", d_seed, "Seed (default: ELA_PROBE_SEED or 1)");
    design->add_option("--out", d_out, "Output CSV (default: standard output)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a benchmark function on a design");
    std::string e_function, e_in, e_out;
    std::uint64_t e_seed = 0;
    bool e_list = false;
    evaluate->add_flag("--list-functions", e_list, "List the 24 functions and exit");
    evaluate->add_option("--function", e_function, "Function id, e.g. 5 or f05");
    evaluate->add_option("--in", e_in, "Design CSV in the unit cube");
    auto* e_seed_opt = evaluate->add_option("--seed", e_seed, "Base seed of the pseudo-instance (default: ELA_PROBE_SEED or 1)");
    evaluate->add_option("--out", e_out, "Output sample CSV x1..xd,y (default: standard output)");

    // features
    auto* feats = app.add_subcommand("features", "Compute the 46 features of an evaluated sample");
    std::string f_in, f_out;
    feats->add_option("--in", f_in, "Sample CSV x1..xd,y")->required()->check(CLI::ExistingFile);
    feats->add_option("--out", f_out, "Output JSON (default: standard output)");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Build the feature dataset of one (strategy, n) cell");
    std::string ds_strategy, ds_config, ds_preset, ds_out;
    int ds_n = 0, ds_jobs = 0;
    std::uint64_t ds_seed = 0;
    dataset->add_option("--strategy", ds_strategy, "Sampling strategy")->required()->check(CLI::IsMember(kStrategyNames));
    dataset->add_option("--n", ds_n, "Design size")->required();
    dataset->add_option("--config", ds_config, "Experiment config JSON")->check(CLI::ExistingFile);
    dataset->add_option("--preset", ds_preset, "Preset")->check(CLI::IsMember({"full", "quick"}));
    auto* ds_seed_opt = dataset->add_option("--seed", ds_seed, "Base seed");
    dataset->add_option("--jobs", ds_jobs, "Worker threads (default: available parallelism)");
    dataset->add_option("--out", ds_out, "Output dataset CSV")->required();

    // classify
    auto* cls = app.add_subcommand("classify", "Random sub-sampling validation of one (train, test) pairing");
    std::string c_train, c_test, c_classifier = "knn", c_out;
    int c_splits = 50;
    std::uint64_t c_seed = 0;
    bool c_shuffle = false;
    cls->add_option("--train", c_train, "Training dataset CSV")->required()->check(CLI::ExistingFile);
    cls->add_option("--test", c_test, "Test dataset CSV (default: the training dataset)")->check(CLI::ExistingFile);
    cls->add_option("--classifier", c_classifier, "knn or tree")->check(CLI::IsMember({"knn", "tree"}));
    cls->add_option("--splits", c_splits, "Number of random splits")->check(CLI::PositiveNumber);
    auto* c_seed_opt = cls->add_option("--seed", c_seed, "Base seed");
    cls->add_flag("--shuffle-labels", c_shuffle, "Permute training labels before fitting");
    cls->add_option("--out", c_out, "Directory for accuracies.csv and confusion.csv");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run the cross-strategy study");
    std::string x_config, x_preset, x_out;
    int x_jobs = 0;
    std::uint64_t x_seed = 0;
    bool x_reuse = false;
    std::vector<std::string> x_hist;
    exp->add_option("--config", x_config, "Experiment config JSON")->check(CLI::ExistingFile);
    exp->add_option("--preset", x_preset, "Preset")->check(CLI::IsMember({"full", "quick"}));
    auto* x_seed_opt = exp->add_option("--seed", x_seed, "Base seed (overrides config and ELA_PROBE_SEED)");
    exp->add_option("--out", x_out, "Output directory (overrides config)");
    exp->add_option("--jobs", x_jobs, "Worker threads (default: available parallelism)");
    exp->add_flag("--reuse-datasets", x_reuse, "Reuse cached datasets whose manifest matches");
    exp->add_option("--hist", x_hist, "Histogram panel <feature>:<function>, repeatable");

    // discrepancy
    auto* disc = app.add_subcommand("discrepancy", "Squared centered L2 discrepancy of a design CSV");
    std::string q_in;
    disc->add_option("--in", q_in, "Design CSV")->required()->check(CLI::ExistingFile);

    // report
    auto* rep = app.add_subcommand("report", "Render report artifacts from an experiment directory");
    ReportArgs r;
    rep->add_option("--in", r.in, "Experiment output directory")->required();
    rep->add_option("--what", r.what, "divergence, confusion or boxplot")
        ->required()
        ->check(CLI::IsMember({"divergence", "confusion", "boxplot"}));
    rep->add_option("--classifier", r.classifier, "knn or tree (confusion)")->check(CLI::IsMember({"knn", "tree"}));
    rep->add_option("--n", r.n, "Sample size");
    rep->add_option("--train", r.train, "Training strategy (confusion)")->check(CLI::IsMember(kStrategyNames));
    rep->add_option("--test", r.test, "Test strategy (confusion)")->check(CLI::IsMember(kStrategyNames));

    try {
        app.parse(argc, argv);
        if (evaluate->parsed() && !e_list && (e_function.empty() || e_in.empty()))
            throw CLI::RequiredError("evaluate needs --function and --in (or --list-functions)");
        if (!e_function.empty() && !problems::parse_function_id(e_function))
            throw CLI::ValidationError("--function", "unknown function '" + e_function + "'");
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (design->parsed()) {
            const std::uint64_t seed = resolve_seed(d_seed_opt, d_seed, 1);
            const auto dsg = sampling::generate(strategy_of(d_strategy), d_n, d_dim, seed);
            std::ostringstream csv;
            sampling::write_design_csv(csv, dsg.points);
            if (d_out.empty()) {
                std::cout << csv.str();
                std::cerr << "centered_l2_discrepancy " << io::format_double(sampling::centered_l2_discrepancy(dsg)) << '\n';
            } else {
                io::write_text_file(d_out, csv.str());
                std::cout << "centered_l2_discrepancy " << io::format_double(sampling::centered_l2_discrepancy(dsg)) << '\n';
            }
        } else if (evaluate->parsed()) {
            if (e_list) {
                for (const auto fid : problems::all_functions()) {
                    const auto& info = problems::function_info(fid);
                    std::cout << fid.label() << ' ' << info.name << " (" << info.separability << ", " << info.modality
                              << ")\n";
                }
                return 0;
            }
            const auto fid = *problems::parse_function_id(e_function);
            const Eigen::MatrixXd unit = read_design_file(e_in);
            const std::uint64_t base = resolve_seed(e_seed_opt, e_seed, 1);
            const auto inst = problems::instantiate(fid, static_cast<int>(unit.cols()),
                                                    experiment::instance_seed(base, fid.value()));
            const Eigen::MatrixXd X = sampling::scale_to_domain(unit, problems::kDomainLower, problems::kDomainUpper);
            emit(e_out, sample_csv(X, problems::batch_evaluate(inst, X)));
        } else if (feats->parsed()) {
            emit(f_out, features::to_json(features::compute_all(read_sample_file(f_in))) + "\n");
        } else if (dataset->parsed()) {
            auto config = load_config(ds_config, ds_preset);
            config.base_seed = resolve_seed(ds_seed_opt, ds_seed, config.base_seed);
            const auto ds = experiment::build_dataset(strategy_of(ds_strategy), ds_n, config, ds_jobs);
            std::ostringstream csv;
            classify::write_dataset_csv(csv, ds);
            io::write_text_file(ds_out, csv.str());
            std::cout << "rows " << ds.rows.size() << '\n';
        } else if (cls->parsed()) {
            auto read = [](const std::string& path) {
                std::ifstream in(path);
                return classify::read_dataset_csv(in, Strategy::RandomMT, 0);
            };
            const auto train = read(c_train);
            const auto test = c_test.empty() ? train : read(c_test);
            classify::ValidationOptions vo;
            vo.splits = c_splits;
            vo.seed = resolve_seed(c_seed_opt, c_seed, 1);
            vo.shuffle_train_labels = c_shuffle;
            const auto res = classify::subsample_validate(train, test, *classify::parse_classifier(c_classifier), vo);
            std::cout << "median_accuracy " << io::format_double(stats::median(res.accuracies)) << '\n'
                      << "mean_accuracy " << io::format_double(stats::mean(res.accuracies)) << '\n';
            if (!c_out.empty()) {
                std::string acc = "split,accuracy\n";
                for (std::size_t s = 0; s < res.accuracies.size(); ++s)
                    acc += std::to_string(s) + "," + io::format_double(res.accuracies[s]) + "\n";
                io::write_text_file(fs::path(c_out) / "accuracies.csv", acc);
                std::ostringstream cm;
                classify::write_confusion_csv(cm, res.confusion);
                io::write_text_file(fs::path(c_out) / "confusion.csv", cm.str());
            }
        } else if (exp->parsed()) {
            auto config = load_config(x_config, x_preset.empty() && x_config.empty() ? "quick" : x_preset);
            config.base_seed = resolve_seed(x_seed_opt, x_seed, config.base_seed);
            if (!x_out.empty()) config.output_dir = x_out;
            // Validate --hist requests before spending time on the grid.
            for (const auto& h : x_hist) {
                const auto colon = h.rfind(':');
                if (colon == std::string::npos || !features::feature_index(h.substr(0, colon)) ||
                    !problems::parse_function_id(h.substr(colon + 1)))
                    throw InvalidArgument("--hist expects <feature>:<function>, got '" + h + "'");
            }
            experiment::RunOptions ro;
            ro.jobs = x_jobs;
            ro.reuse_datasets = x_reuse;
            ro.progress = [](const std::string& line) { std::cerr << line << '\n'; };
            const auto report = experiment::run_grid(config, ro);
            for (int n : config.sample_sizes)
                for (ClassifierKind k : config.classifiers)
                    std::cout << experiment::heatmap_text(experiment::heatmap(report, k, n, config.strategies),
                                                          config.strategies,
                                                          "median accuracy, " + std::string(classify::to_string(k)) +
                                                              ", n = " + std::to_string(n))
                              << '\n';
            for (const auto& h : x_hist) write_histograms(config, h);
        } else if (disc->parsed()) {
            std::cout << io::format_double(sampling::centered_l2_discrepancy(read_design_file(q_in))) << '\n';
        } else if (rep->parsed()) {
            return run_report(r);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
