// ela_meta: OLS fits of linear / quadratic models with and without interactions.
#include "elaprobe/errors.hpp"
#include "elaprobe/features.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace elaprobe::features {

namespace {
constexpr double kRankTolerance = 1e-10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool has_interactions(MetaModel m) {
    return m == MetaModel::LinearInteractions || m == MetaModel::QuadraticInteractions;
}
bool has_squares(MetaModel m) { return m == MetaModel::Quadratic || m == MetaModel::QuadraticInteractions; }
}  // namespace

Eigen::Index meta_min_sample_size(Eigen::Index d) { return 1 + 2 * d + d * (d - 1) / 2; }

Eigen::MatrixXd meta_model_basis(const Eigen::MatrixXd& X, MetaModel model) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const Eigen::Index cols =
        1 + d + (has_interactions(model) ? d * (d - 1) / 2 : 0) + (has_squares(model) ? d : 0);
    Eigen::MatrixXd basis(n, cols);
    basis.col(0).setOnes();
    basis.middleCols(1, d) = X;
    Eigen::Index c = 1 + d;
    if (has_interactions(model))
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = i + 1; j < d; ++j) basis.col(c++) = X.col(i).cwiseProduct(X.col(j));
    if (has_squares(model))
        for (Eigen::Index i = 0; i < d; ++i) basis.col(c++) = X.col(i).cwiseAbs2();
    return basis;
}

ModelFit fit_meta_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, MetaModel model) {
    const Eigen::MatrixXd basis = meta_model_basis(X, model);
    if (basis.rows() < basis.cols())
        throw TooFewSamples("meta model with " + std::to_string(basis.cols()) + " parameters needs at least as many points, got " +
                            std::to_string(basis.rows()));

    // Rank-revealing solve; a rank-deficient basis yields the minimum-norm (pseudoinverse) solution.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
    cod.setThreshold(kRankTolerance);
    ModelFit fit;
    fit.coefficients = cod.solve(y);
    fit.rank_deficient = cod.rank() < basis.cols();

    const double n = static_cast<double>(y.size());
    const double p = static_cast<double>(basis.cols() - 1);
    const double sse = (y - basis * fit.coefficients).squaredNorm();
    const double sst = (y.array() - y.mean()).square().sum();
    if (!(sst > 0.0)) {
        fit.r2 = kNaN;
        fit.adj_r2 = kNaN;
        return fit;
    }
    fit.r2 = 1.0 - sse / sst;
    fit.adj_r2 = n - p - 1.0 > 0.0 ? 1.0 - (1.0 - fit.r2) * (n - 1.0) / (n - p - 1.0) : kNaN;
    return fit;
}

SetResult ela_meta(const EvaluatedSample& sample) {
    validate(sample);
    const Eigen::Index d = sample.d();
    if (sample.n() < meta_min_sample_size(d))
        throw TooFewSamples("ela_meta needs n >= " + std::to_string(meta_min_sample_size(d)) + " for d=" +
                            std::to_string(d));

    const ModelFit lin = fit_meta_model(sample.X, sample.y, MetaModel::Linear);
    const ModelFit lin_int = fit_meta_model(sample.X, sample.y, MetaModel::LinearInteractions);
    const ModelFit quad = fit_meta_model(sample.X, sample.y, MetaModel::Quadratic);
    const ModelFit quad_int = fit_meta_model(sample.X, sample.y, MetaModel::QuadraticInteractions);

    const Eigen::VectorXd slopes = lin.coefficients.segment(1, d).cwiseAbs();
    const Eigen::VectorXd squares = quad.coefficients.tail(d).cwiseAbs();

    SetResult out;
    out.values = {
        lin.adj_r2,
        lin.coefficients[0],
        slopes.minCoeff(),
        slopes.maxCoeff(),
        slopes.maxCoeff() / slopes.minCoeff(),
        lin_int.adj_r2,
        quad.adj_r2,
        squares.maxCoeff() / squares.minCoeff(),
        quad_int.adj_r2,
    };
    if (lin.rank_deficient || lin_int.rank_deficient || quad.rank_deficient || quad_int.rank_deficient)
        out.flags.emplace_back("ela_meta:singular");
    if (std::isnan(lin.r2)) out.flags.emplace_back("ela_meta:constant_y");
    return out;
}

}  // namespace elaprobe::features
