#include "elaprobe/classify.hpp"
#include "elaprobe/errors.hpp"
#include "elaprobe/experiment.hpp"
#include "elaprobe/features.hpp"
#include "elaprobe/problems.hpp"
#include "elaprobe/sampling.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

namespace py = pybind11;
using namespace elaprobe;

namespace {

sampling::Strategy strategy_arg(const std::string& name) {
    const auto s = sampling::parse_strategy(name);
    if (!s) throw InvalidArgument("unknown strategy '" + name + "'");
    return *s;
}

classify::ClassifierKind classifier_arg(const std::string& name) {
    const auto k = classify::parse_classifier(name);
    if (!k) throw InvalidArgument("unknown classifier '" + name + "'");
    return *k;
}

py::dict feature_dict(const features::FeatureVector& fv) {
    py::dict out;
    const auto& names = features::feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) out[py::str(std::string(names[i]))] = fv.values[i];
    return out;
}

classify::FeatureDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return classify::read_dataset_csv(in, sampling::Strategy::RandomMT, 0);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sampling designs, benchmark functions, landscape features and classifiers";
    py::register_exception<Error>(m, "ElaProbeError", PyExc_ValueError);

    m.def("strategies", [] {
        std::vector<std::string> out;
        for (auto s : sampling::kAllStrategies) out.emplace_back(sampling::to_string(s));
        return out;
    });
    m.def("feature_names", [] {
        std::vector<std::string> out;
        for (auto n : features::feature_names()) out.emplace_back(n);
        return out;
    });

    m.def(
        "generate_design",
        [](const std::string& strategy, int n, int dim, std::uint64_t seed) {
            return sampling::generate(strategy_arg(strategy), n, dim, seed).points;
        },
        py::arg("strategy"), py::arg("n"), py::arg("dim"), py::arg("seed"),
        "n x dim design in the unit cube.");
    m.def(
        "centered_l2_discrepancy", [](const Eigen::MatrixXd& points) { return sampling::centered_l2_discrepancy(points); },
        py::arg("points"), "Squared centered L2 discrepancy of unit-cube points.");
    m.def(
        "scale_to_domain",
        [](const Eigen::MatrixXd& unit) {
            return sampling::scale_to_domain(unit, problems::kDomainLower, problems::kDomainUpper);
        },
        py::arg("points"));

    m.def(
        "evaluate",
        [](int function, const Eigen::MatrixXd& points, std::uint64_t base_seed) {
            const auto inst = problems::instantiate(problems::FunctionId(function), static_cast<int>(points.cols()),
                                                    experiment::instance_seed(base_seed, function));
            return problems::batch_evaluate(inst, points);
        },
        py::arg("function"), py::arg("points"), py::arg("base_seed") = 1,
        "Objective values at domain points, using the experiment's pseudo-instance of `function`.");

    m.def(
        "compute_features",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
            features::EvaluatedSample s;
            s.X = X;
            s.y = y;
            return feature_dict(features::compute_all(s));
        },
        py::arg("X"), py::arg("y"), "All 46 features of an evaluated sample, keyed by name.");

    m.def(
        "featurize_rep",
        [](const std::string& strategy, int n, int function, int rep, std::uint64_t base_seed, int dim) {
            experiment::ExperimentConfig c;
            c.base_seed = base_seed;
            c.dim = dim;
            return feature_dict(experiment::featurize_rep(strategy_arg(strategy), n, function, rep, c));
        },
        py::arg("strategy"), py::arg("n"), py::arg("function"), py::arg("rep"), py::arg("base_seed") = 1,
        py::arg("dim") = 5);

    m.def(
        "validate",
        [](const std::filesystem::path& train, const std::filesystem::path& test, const std::string& classifier,
           int splits, std::uint64_t seed, bool shuffle_labels) {
            const auto tr = read_dataset(train);
            const auto te = read_dataset(test);
            classify::ValidationOptions o;
            o.splits = splits;
            o.seed = seed;
            o.shuffle_train_labels = shuffle_labels;
            py::gil_scoped_release release;
            return classify::subsample_validate(tr, te, classifier_arg(classifier), o).accuracies;
        },
        py::arg("train"), py::arg("test"), py::arg("classifier") = "knn", py::arg("splits") = 50,
        py::arg("seed") = 0, py::arg("shuffle_labels") = false,
        "Per-split accuracies of random sub-sampling validation between two dataset CSVs.");

    m.def(
        "run_experiment",
        [](const std::string& config_json, int jobs, bool reuse_datasets) {
            const auto config = experiment::config_from_json(config_json);
            experiment::RunOptions o;
            o.jobs = jobs;
            o.reuse_datasets = reuse_datasets;
            py::gil_scoped_release release;
            const auto report = experiment::run_grid(config, o);
            std::map<std::string, std::vector<std::vector<double>>> heatmaps;
            for (auto k : config.classifiers)
                for (int n : config.sample_sizes) {
                    const Eigen::MatrixXd h = experiment::heatmap(report, k, n, config.strategies);
                    std::vector<std::vector<double>> rows(static_cast<std::size_t>(h.rows()));
                    for (Eigen::Index i = 0; i < h.rows(); ++i)
                        for (Eigen::Index j = 0; j < h.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(h(i, j));
                    heatmaps[std::string(classify::to_string(k)) + "_n" + std::to_string(n)] = rows;
                }
            return heatmaps;
        },
        py::arg("config_json"), py::arg("jobs") = 0, py::arg("reuse_datasets") = false,
        "Runs the grid described by a JSON config; returns median heatmaps keyed '<classifier>_n<k>'.");
}
