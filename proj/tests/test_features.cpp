#include "elaprobe/errors.hpp"
#include "elaprobe/features.hpp"
#include "elaprobe/problems.hpp"
#include "elaprobe/rng.hpp"
#include "elaprobe/sampling.hpp"
#include "elaprobe/stats.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

using namespace elaprobe;
using namespace elaprobe::features;

namespace {

EvaluatedSample make_sample(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) { return EvaluatedSample{X, y, {}}; }

EvaluatedSample function_sample(int fid, sampling::Strategy s, int n, int d, std::uint64_t seed) {
    const auto design = sampling::generate(s, n, d, seed);
    EvaluatedSample out;
    out.X = sampling::scale_to_domain(design.points, -5.0, 5.0);
    out.y = problems::batch_evaluate(problems::instantiate(problems::FunctionId(fid), d, 1), out.X);
    return out;
}

Eigen::MatrixXd uniform_points(int n, int d, std::uint32_t seed) {
    return sampling::scale_to_domain(sampling::random_mt(n, d, seed).points, -5.0, 5.0);
}

double value(const FeatureVector& fv, std::string_view name) { return fv[name]; }

}  // namespace

TEST_CASE("feature schema") {
    const auto& names = feature_names();
    CHECK(names.size() == 46);
    CHECK(std::set<std::string_view>(names.begin(), names.end()).size() == 46);
    CHECK(feature_index("ela_meta.lin_simple.adj_r2") == 3u);
    CHECK(feature_index("nbc.dist_ratio.coeff_var") == 31u);
    CHECK(feature_index("ic.h_max") == 33u);
    CHECK(names.back() == "pca.expl_var_PC1.cor_init");
    CHECK_FALSE(feature_index("nope").has_value());
}

TEST_CASE("sample validation") {
    Eigen::MatrixXd X = uniform_points(12, 3, 1);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(12, 0, 1);
    CHECK_NOTHROW(validate(make_sample(X, y)));
    CHECK_THROWS_AS(validate(make_sample(X.topRows(9), y.head(9))), InvalidSize);
    CHECK_THROWS_AS(validate(make_sample(X, y.head(11))), DimensionMismatch);
    y[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(make_sample(X, y)), NonFiniteInput);
}

TEST_CASE("ela_distr moments") {
    const Eigen::MatrixXd X = uniform_points(10, 2, 3);
    Eigen::VectorXd y(10);
    y << -2, -1, 0, 1, 2, -2, -1, 0, 1, 2;
    const SetResult r = ela_distr(make_sample(X, y));
    CHECK(std::abs(r.values[0]) < 1e-12);
    // 1/n moments: m2 = 2, m4 = 6.8 -> 6.8 / 4 - 3.
    CHECK(r.values[1] == doctest::Approx(6.8 / 4.0 - 3.0));

    Eigen::VectorXd skewed(10);
    skewed << 0, 0, 0, 0, 0, 0, 0, 0, 1, 5;
    const SetResult s = ela_distr(make_sample(X, skewed));
    const double m = skewed.mean();
    const double m2 = (skewed.array() - m).square().mean();
    const double m3 = (skewed.array() - m).cube().mean();
    CHECK(s.values[0] == doctest::Approx(m3 / std::pow(m2, 1.5)));
}

TEST_CASE("kurtosis of a large normal sample is near zero") {
    rng::MersenneTwister mt(2024);
    const int n = 10000;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng::standard_normal(mt);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = i;
    const SetResult r = ela_distr(make_sample(X, y));
    CHECK(std::abs(r.values[1]) < 0.3);
    CHECK(std::abs(r.values[0]) < 0.1);
    CHECK(r.values[2] == 1.0);
}

TEST_CASE("KDE peak count matches a direct density evaluation") {
    rng::MersenneTwister mt(8);
    std::vector<double> y;
    for (int i = 0; i < 300; ++i) y.push_back(rng::standard_normal(mt));
    for (int i = 0; i < 300; ++i) y.push_back(10.0 + rng::standard_normal(mt));
    CHECK(count_kde_peaks(y) == 2);

    // Direct evaluation without the kernel cut-off, on the same grid.
    for (std::uint32_t seed : {1u, 2u, 3u}) {
        rng::MersenneTwister g(seed);
        std::vector<double> v;
        for (int i = 0; i < 40; ++i) v.push_back(g.next_unit() * (i % 3 == 0 ? 8.0 : 1.0));
        const double n = static_cast<double>(v.size());
        const double h = 0.9 * std::min(stats::sample_sd(v), stats::iqr(v) / 1.34) * std::pow(n, -0.2);
        const double lo = *std::min_element(v.begin(), v.end()) - 3 * h;
        const double hi = *std::max_element(v.begin(), v.end()) + 3 * h;
        std::vector<double> dens(512);
        for (int k = 0; k < 512; ++k) {
            const double t = lo + (hi - lo) * k / 511.0;
            for (double x : v) dens[k] += std::exp(-0.5 * std::pow((t - x) / h, 2));
        }
        const double top = *std::max_element(dens.begin(), dens.end());
        int peaks = 0;
        for (int k = 0; k < 512; ++k)
            if ((k == 0 || dens[k] > dens[k - 1]) && (k == 511 || dens[k] >= dens[k + 1]) && dens[k] > 0.1 * top) ++peaks;
        CHECK(count_kde_peaks(v) == std::max(1, peaks));
    }
}

TEST_CASE("constant objective values are flagged, not fatal") {
    const Eigen::MatrixXd X = uniform_points(30, 3, 4);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 2.5);
    const FeatureVector fv = compute_all(make_sample(X, y));
    CHECK(fv.values[0] == 0.0);
    CHECK(fv.values[1] == 0.0);
    CHECK(fv.values[2] == 1.0);
    const std::set<std::string> flags(fv.flags.begin(), fv.flags.end());
    CHECK(flags.count("ela_distr:degenerate") == 1);
    CHECK(flags.count("nbc:degenerate") == 1);
    CHECK(flags.count("ic:degenerate") == 1);
    CHECK(std::isnan(value(fv, "nbc.nn_nb.cor")));
    CHECK(value(fv, "ic.h_max") == 0.0);
}

TEST_CASE("ela_meta recovers exact linear and quadratic structure") {
    const Eigen::MatrixXd X = uniform_points(60, 4, 5);
    Eigen::VectorXd lin = 3.0 + (X * Eigen::Vector4d(1, -2, 0.5, 4)).array();
    const SetResult l = ela_meta(make_sample(X, lin));
    CHECK(l.values[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(l.values[1] == doctest::Approx(3.0));
    CHECK(l.values[2] == doctest::Approx(0.5));
    CHECK(l.values[3] == doctest::Approx(4.0));
    CHECK(l.values[4] == doctest::Approx(8.0));

    const Eigen::VectorXd quad = X.rowwise().squaredNorm();
    const SetResult q = ela_meta(make_sample(X, quad));
    CHECK(q.values[6] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(q.values[7] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(q.values[0] < 0.5);
}

TEST_CASE("ela_meta on f5 is exactly linear for every strategy") {
    for (sampling::Strategy s : sampling::kAllStrategies)
        for (int n : {30, 300}) {
            const auto sample = function_sample(5, s, n, 5, 11);
            const SetResult r = ela_meta(sample);
            CHECK(std::abs(r.values[0] - 1.0) <= 1e-9);
        }
}

TEST_CASE("ela_meta nested models and noise oracle") {
    for (std::uint32_t seed = 1; seed <= 5; ++seed) {
        const auto sample = function_sample(static_cast<int>(seed * 4), sampling::Strategy::RandomMT, 50, 5, seed);
        const ModelFit lin = fit_meta_model(sample.X, sample.y, MetaModel::Linear);
        const ModelFit li = fit_meta_model(sample.X, sample.y, MetaModel::LinearInteractions);
        const ModelFit qs = fit_meta_model(sample.X, sample.y, MetaModel::Quadratic);
        const ModelFit qi = fit_meta_model(sample.X, sample.y, MetaModel::QuadraticInteractions);
        CHECK(li.r2 >= lin.r2 - 1e-12);
        CHECK(qs.r2 >= lin.r2 - 1e-12);
        CHECK(qi.r2 >= li.r2 - 1e-12);
        CHECK(qi.r2 >= qs.r2 - 1e-12);
    }
    // Pure noise: the adjusted R^2 averages to zero.
    double total = 0.0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        rng::MersenneTwister mt(static_cast<std::uint32_t>(100 + t));
        const Eigen::MatrixXd X = uniform_points(1000, 5, static_cast<std::uint32_t>(t));
        Eigen::VectorXd y(1000);
        for (auto& v : y) v = rng::standard_normal(mt);
        total += fit_meta_model(X, y, MetaModel::Linear).adj_r2;
    }
    CHECK(std::abs(total / trials) < 0.05);
}

TEST_CASE("ela_meta preconditions and rank deficiency") {
    CHECK(meta_min_sample_size(5) == 21);
    const Eigen::MatrixXd X = uniform_points(20, 5, 2);
    CHECK_THROWS_AS(ela_meta(make_sample(X, X.col(0))), TooFewSamples);
    Eigen::MatrixXd dup = uniform_points(30, 3, 2);
    dup.col(2) = dup.col(1);
    const SetResult r = ela_meta(make_sample(dup, dup.col(0) + dup.col(1)));
    CHECK(std::find(r.flags.begin(), r.flags.end(), "ela_meta:singular") != r.flags.end());
    CHECK(r.values[0] == doctest::Approx(1.0));
}

TEST_CASE("disp subset sizes and brute-force values") {
    CHECK(disp_subset_size(2, 30) == 2);
    CHECK(disp_subset_size(25, 30) == 8);
    CHECK(disp_subset_size(2, 3125) == 63);
    CHECK(disp_subset_size(10, 300) == 30);
    CHECK(disp_subset_size(25, 4) == 2);

    const auto sample = function_sample(1, sampling::Strategy::RandomMT, 40, 3, 6);
    const SetResult r = disp(sample);
    std::vector<int> order(40);
    for (int i = 0; i < 40; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sample.y[a] < sample.y[b]; });
    auto pair_dists = [&](int k) {
        std::vector<double> d;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b) d.push_back((sample.X.row(order[a]) - sample.X.row(order[b])).norm());
        return d;
    };
    const auto all = pair_dists(40);
    const int ks[] = {2, 2, 4, 10};
    for (int q = 0; q < 4; ++q) {
        const auto sub = pair_dists(ks[q]);
        CHECK(r.values[q] == doctest::Approx(stats::mean(sub) / stats::mean(all)));
        CHECK(r.values[4 + q] == doctest::Approx(stats::median(sub) / stats::median(all)));
        CHECK(r.values[8 + q] == doctest::Approx(stats::mean(sub) - stats::mean(all)));
        CHECK(r.values[12 + q] == doctest::Approx(stats::median(sub) - stats::median(all)));
    }
}

TEST_CASE("disp conventions") {
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(12, 2, 0.3);
    const SetResult r = disp(make_sample(same, Eigen::VectorXd::LinSpaced(12, 0, 1)));
    for (int q = 0; q < 8; ++q) CHECK(r.values[q] == 1.0);
    for (int q = 8; q < 16; ++q) CHECK(r.values[q] == 0.0);
    const auto dense = function_sample(1, sampling::Strategy::RandomMT, 3125, 5, 3);
    CHECK(disp(dense).values[0] < 1.0);
}

TEST_CASE("nearest-better distances against brute force") {
    for (std::uint32_t seed : {1u, 2u, 3u}) {
        auto sample = function_sample(static_cast<int>(3 + seed), sampling::Strategy::LhsCentered, 60, 4, seed);
        sample.y[7] = sample.y[8];  // a fitness tie
        const NearestBetter nb = nearest_better(sample);
        for (int i = 0; i < 60; ++i) {
            double dnn = INFINITY, dnb = INFINITY;
            for (int j = 0; j < 60; ++j) {
                if (j == i) continue;
                const double dist = (sample.X.row(i) - sample.X.row(j)).norm();
                dnn = std::min(dnn, dist);
                const bool better = sample.y[j] < sample.y[i] || (sample.y[j] == sample.y[i] && j < i);
                if (better) dnb = std::min(dnb, dist);
            }
            CHECK(nb.nn_distance[i] == doctest::Approx(dnn));
            if (i == nb.best) {
                CHECK(nb.nb_index[i] == -1);
            } else {
                CHECK(nb.nb_distance[i] == doctest::Approx(dnb));
                CHECK(nb.nb_distance[i] >= nb.nn_distance[i]);
            }
        }
    }
}

TEST_CASE("nbc features follow their definitions") {
    const auto sample = function_sample(10, sampling::Strategy::Sobol, 80, 3, 4);
    const NearestBetter nb = nearest_better(sample);
    const SetResult r = nbc(sample);
    std::vector<double> ratio(80), indeg(80, 0.0), y(sample.y.data(), sample.y.data() + 80);
    for (int i = 0; i < 80; ++i) {
        ratio[i] = nb.nn_distance[i] / nb.nb_distance[i];
        if (nb.nb_index[i] >= 0) indeg[nb.nb_index[i]] += 1.0;
    }
    CHECK(r.values[0] == doctest::Approx(stats::sample_sd(nb.nn_distance) / stats::sample_sd(nb.nb_distance)));
    CHECK(r.values[1] == doctest::Approx(stats::mean(nb.nn_distance) / stats::mean(nb.nb_distance)));
    CHECK(r.values[2] == doctest::Approx(stats::pearson(nb.nn_distance, nb.nb_distance)));
    CHECK(r.values[3] == doctest::Approx(stats::sample_sd(ratio) / stats::mean(ratio)));
    CHECK(r.values[4] == doctest::Approx(stats::pearson(indeg, y)));
    CHECK(stats::pearson(y, y) == doctest::Approx(1.0));
}

TEST_CASE("nbc mean ratio below one for a tight better cluster") {
    rng::MersenneTwister mt(3);
    Eigen::MatrixXd X(40, 2);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        const bool good = i < 20;
        const double spread = good ? 0.05 : 1.0;
        X(i, 0) = (good ? -3.0 : 3.0) + spread * mt.next_unit();
        X(i, 1) = spread * mt.next_unit();
        y[i] = good ? mt.next_unit() : 10.0 + mt.next_unit();
    }
    CHECK(nbc(make_sample(X, y)).values[1] < 1.0);
}

TEST_CASE("information content definitions") {
    const std::vector<double> alternating = {1, -1, 1, -1, 1, -1, 1, -1, 1};
    CHECK(information_entropy(alternating, 0.0) == doctest::Approx(std::log(2.0) / std::log(6.0)));
    CHECK(information_entropy(alternating, 5.0) == 0.0);
    CHECK(partial_information(alternating, 5.0) == 0.0);
    CHECK(partial_information(alternating, 0.0) == doctest::Approx(1.0));

    // Points on a line visited in order with y increasing along the tour.
    Eigen::MatrixXd X(12, 2);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) {
        X(i, 0) = i;
        X(i, 1) = 0;
        y[i] = i * i;
    }
    const auto curve = information_curve(make_sample(X, y));
    for (int i = 0; i < 12; ++i) CHECK(curve.tour[i] == i);
    CHECK(curve.entropy[0] == 0.0);
    const SetResult r = ic(make_sample(X, y));
    CHECK(r.values[4] == doctest::Approx(1.0 / 11.0));
}

TEST_CASE("information content invariants on benchmark samples") {
    for (int fid : {1, 7, 15, 21}) {
        const auto sample = function_sample(fid, sampling::Strategy::LhsImproved, 120, 5, 2);
        const auto curve = information_curve(sample);
        REQUIRE(curve.epsilon.size() == 201);
        CHECK(curve.epsilon[0] == 0.0);
        double max_slope = 0.0;
        for (double s : curve.slopes) max_slope = std::max(max_slope, std::abs(s));
        CHECK(curve.epsilon.back() == max_slope);
        CHECK(curve.epsilon[1] == doctest::Approx(1e-5 * max_slope));
        for (std::size_t k = 0; k < curve.epsilon.size(); ++k) {
            CHECK(curve.entropy[k] >= 0.0);
            CHECK(curve.entropy[k] <= 1.0);
            if (k > 0) {
                CHECK(curve.epsilon[k] > curve.epsilon[k - 1]);
                CHECK(curve.partial[k] <= curve.partial[k - 1]);
            }
        }
        const std::vector<Eigen::Index> tour = curve.tour;
        std::vector<Eigen::Index> sorted = tour;
        std::sort(sorted.begin(), sorted.end());
        for (Eigen::Index i = 0; i < 120; ++i) CHECK(sorted[i] == i);
        const SetResult r = ic(sample);
        CHECK(r.values[0] == doctest::Approx(*std::max_element(curve.entropy.begin(), curve.entropy.end())));
        CHECK(r.values[4] == curve.partial[0]);
    }
}

TEST_CASE("pca values") {
    const Eigen::MatrixXd X = uniform_points(4000, 5, 9);
    const Eigen::VectorXd y = X.col(0);
    const SetResult r = pca(make_sample(X, y));
    CHECK(r.values[1] == doctest::Approx(1.0));  // ceil(0.9 * 5) / 5
    Eigen::MatrixXd wide = uniform_points(200, 3, 4);
    wide.col(1) *= 1000.0;
    const SetResult w = pca(make_sample(wide, wide.col(0)));
    CHECK(w.values[4] > 0.999);

    const auto sample = function_sample(12, sampling::Strategy::RandomMT, 50, 4, 2);
    const SetResult base = pca(sample);
    Eigen::MatrixXd X2(100, 4);
    Eigen::VectorXd y2(100);
    X2 << sample.X, sample.X;
    y2 << sample.y, sample.y;
    const SetResult doubled = pca(make_sample(X2, y2));
    for (int k = 0; k < 8; ++k) CHECK(doubled.values[k] == doctest::Approx(base.values[k]).epsilon(1e-9));
    for (int k = 0; k < 4; ++k) {
        const double dim = k < 2 ? 4.0 : 5.0;
        const double scaled = base.values[k] * dim;
        CHECK(scaled == doctest::Approx(std::round(scaled)));
        CHECK(base.values[k] >= 1.0 / dim - 1e-12);
        CHECK(base.values[k] <= 1.0);
        CHECK(base.values[4 + k] > 0.0);
        CHECK(base.values[4 + k] <= 1.0);
    }
    CHECK_THROWS_AS(pca(make_sample(uniform_points(12, 11, 1), Eigen::VectorXd::LinSpaced(12, 0, 1))), TooFewSamples);
}

TEST_CASE("correlation matrix treats zero-variance columns as identity") {
    Eigen::MatrixXd X = uniform_points(30, 3, 1);
    X.col(1).setConstant(2.0);
    const Eigen::MatrixXd c = correlation_matrix(X);
    CHECK(c(1, 1) == 1.0);
    CHECK(c(0, 1) == 0.0);
    CHECK(c(1, 2) == 0.0);
    CHECK(c(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("compute_all is pure and round-trips through JSON") {
    auto sample = function_sample(17, sampling::Strategy::LhsImproved, 100, 5, 5);
    sample.provenance = {sampling::Strategy::LhsImproved, 5, 17, 1};
    const FeatureVector a = compute_all(sample);
    const FeatureVector b = compute_all(sample);
    CHECK(a.values == b.values);
    for (double v : a.values) CHECK(std::isfinite(v));
    const FeatureVector c = from_json(to_json(a));
    CHECK(c.values == a.values);
    CHECK(c.provenance.strategy == sampling::Strategy::LhsImproved);
    CHECK(c.provenance.function == 17);
    CHECK(c.n == 100);
    CHECK(c.d == 5);
    CHECK(value(a, "ela_meta.lin_simple.adj_r2") == a.values[3]);
    CHECK_THROWS_AS(value(a, "bogus"), SchemaMismatch);
}
