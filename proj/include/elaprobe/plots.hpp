#pragma once

#include "elaprobe/classify.hpp"
#include "elaprobe/sampling.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

// Hand-written SVG. Output depends only on the arguments, so files diff cleanly across runs.
namespace elaprobe::plots {

/// Colour-mapped accuracy grid in [0, 1] with cell labels; rows = train strategy.
std::string heatmap_svg(const Eigen::MatrixXd& values, std::span<const sampling::Strategy> strategies,
                        const std::string& title);

struct Series {
    std::string label;
    std::vector<double> values;  // non-finite values are skipped
};

/// One histogram per series on a shared x range, laid out in a grid of `columns`.
std::string histogram_panel_svg(std::span<const Series> panels, const std::string& title, int columns = 5,
                                int bins = 20);

/// Row-normalised percentages; only cells above 1% are labelled.
std::string confusion_svg(const classify::ConfusionMatrix& cm, const std::string& title);

/// Box (quartiles), whiskers (1.5 IQR) and median per series on a [0, 1] axis.
std::string boxplot_svg(std::span<const Series> groups, const std::string& title);

/// Horizontal bars for values in [0, 1].
std::string bar_svg(std::span<const std::string> labels, std::span<const double> values, const std::string& title);

}  // namespace elaprobe::plots
