// pca: explained-variance shares of covariance / correlation matrices of X and [X | y].
#include "elaprobe/features.hpp"
#include "elaprobe/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace elaprobe::features {

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& data) {
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data) {
    Eigen::MatrixXd c = covariance_matrix(data);
    const Eigen::Index m = c.rows();
    Eigen::VectorXd sd(m);
    for (Eigen::Index i = 0; i < m; ++i) sd[i] = std::sqrt(std::max(0.0, c(i, i)));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (sd[i] > 0.0 && sd[j] > 0.0)
                c(i, j) /= sd[i] * sd[j];
            else
                c(i, j) = i == j ? 1.0 : 0.0;
        }
    }
    return c;
}

ExplainedVariance explained_variance(const Eigen::MatrixXd& symmetric) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
    std::vector<double> lambda(solver.eigenvalues().data(), solver.eigenvalues().data() + symmetric.rows());
    for (double& l : lambda) l = std::max(0.0, l);
    std::sort(lambda.begin(), lambda.end(), std::greater<>());
    double total = 0.0;
    for (double l : lambda) total += l;

    const double dim = static_cast<double>(lambda.size());
    ExplainedVariance ev;
    if (!(total > 0.0)) {
        ev.share_needed = 1.0;
        ev.first_share = 1.0 / dim;
        return ev;
    }
    // Relative slack so exact ties such as four of five equal eigenvalues are not lost to rounding.
    const double needed = kPcaVarianceShare * total * (1.0 - 1e-12);
    double cumulative = 0.0;
    std::size_t k = 0;
    while (k < lambda.size()) {
        cumulative += lambda[k++];
        if (cumulative >= needed) break;
    }
    ev.share_needed = static_cast<double>(k) / dim;
    ev.first_share = lambda[0] / total;
    return ev;
}

SetResult pca(const EvaluatedSample& sample) {
    validate(sample);
    if (sample.n() <= sample.d() + 1)
        throw TooFewSamples("pca needs n > d + 1");
    Eigen::MatrixXd init(sample.n(), sample.d() + 1);
    init << sample.X, sample.y;

    const ExplainedVariance cov_x = explained_variance(covariance_matrix(sample.X));
    const ExplainedVariance cor_x = explained_variance(correlation_matrix(sample.X));
    const ExplainedVariance cov_init = explained_variance(covariance_matrix(init));
    const ExplainedVariance cor_init = explained_variance(correlation_matrix(init));

    SetResult out;
    out.values = {cov_x.share_needed,  cor_x.share_needed,  cov_init.share_needed,  cor_init.share_needed,
                  cov_x.first_share,   cor_x.first_share,   cov_init.first_share,   cor_init.first_share};
    return out;
}

}  // namespace elaprobe::features
