#include "elaprobe/errors.hpp"
#include "elaprobe/features.hpp"

#include "json.hpp"

#include <cmath>
#include <limits>

namespace elaprobe::features {

namespace {

constexpr std::array<std::string_view, kNumFeatures> kNames = {
    "ela_distr.skewness",
    "ela_distr.kurtosis",
    "ela_distr.number_of_peaks",
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.intercept",
    "ela_meta.lin_simple.coef.min",
    "ela_meta.lin_simple.coef.max",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.lin_w_interact.adj_r2",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_meta.quad_w_interact.adj_r2",
    "disp.ratio_mean_02",
    "disp.ratio_mean_05",
    "disp.ratio_mean_10",
    "disp.ratio_mean_25",
    "disp.ratio_median_02",
    "disp.ratio_median_05",
    "disp.ratio_median_10",
    "disp.ratio_median_25",
    "disp.diff_mean_02",
    "disp.diff_mean_05",
    "disp.diff_mean_10",
    "disp.diff_mean_25",
    "disp.diff_median_02",
    "disp.diff_median_05",
    "disp.diff_median_10",
    "disp.diff_median_25",
    "nbc.nn_nb.sd_ratio",
    "nbc.nn_nb.mean_ratio",
    "nbc.nn_nb.cor",
    "nbc.dist_ratio.coeff_var",
    "nbc.nb_fitness.cor",
    "ic.h_max",
    "ic.eps_s",
    "ic.eps_max",
    "ic.eps_ratio",
    "ic.m0",
    "pca.expl_var.cov_x",
    "pca.expl_var.cor_x",
    "pca.expl_var.cov_init",
    "pca.expl_var.cor_init",
    "pca.expl_var_PC1.cov_x",
    "pca.expl_var_PC1.cor_x",
    "pca.expl_var_PC1.cov_init",
    "pca.expl_var_PC1.cor_init",
};

using json = nlohmann::ordered_json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

const std::array<std::string_view, kNumFeatures>& feature_names() { return kNames; }

std::optional<std::size_t> feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name) return i;
    return std::nullopt;
}

double FeatureVector::operator[](std::string_view name) const {
    const auto idx = feature_index(name);
    if (!idx) throw SchemaMismatch("unknown feature '" + std::string(name) + "'");
    return values[*idx];
}

void validate(const EvaluatedSample& sample) {
    if (sample.X.rows() != sample.y.size())
        throw DimensionMismatch("sample has " + std::to_string(sample.X.rows()) + " points but " +
                                std::to_string(sample.y.size()) + " values");
    if (sample.n() < kMinSampleSize)
        throw InvalidSize("feature computation needs n >= 10, got " + std::to_string(sample.n()));
    if (sample.d() < 1) throw InvalidSize("sample has no coordinates");
    if (!sample.y.allFinite()) throw NonFiniteInput("objective values must be finite");
    if (!sample.X.allFinite()) throw NonFiniteInput("sample points must be finite");
}

FeatureVector compute_all(const EvaluatedSample& sample) {
    validate(sample);
    FeatureVector fv;
    fv.provenance = sample.provenance;
    fv.n = sample.n();
    fv.d = sample.d();

    std::size_t offset = 0;
    auto append = [&](SetResult r) {
        for (double v : r.values) fv.values[offset++] = v;
        for (auto& f : r.flags) fv.flags.push_back(std::move(f));
    };
    append(ela_distr(sample));
    append(ela_meta(sample));
    append(disp(sample));
    append(nbc(sample));
    append(ic(sample));
    append(pca(sample));
    if (offset != kNumFeatures) throw SchemaMismatch("feature sets produced " + std::to_string(offset) + " values");
    return fv;
}

std::string to_json(const FeatureVector& fv, int indent) {
    json prov = json::object();
    const auto& p = fv.provenance;
    prov["strategy"] = p.strategy ? json(std::string(sampling::to_string(*p.strategy))) : json(nullptr);
    prov["seed"] = p.seed ? json(*p.seed) : json(nullptr);
    prov["function"] = p.function ? json(*p.function) : json(nullptr);
    prov["instance_seed"] = p.instance_seed ? json(*p.instance_seed) : json(nullptr);
    prov["n"] = fv.n;
    prov["d"] = fv.d;

    json feats = json::object();
    for (std::size_t i = 0; i < kNumFeatures; ++i) feats[std::string(kNames[i])] = number_or_null(fv.values[i]);

    json doc = json::object();
    doc["provenance"] = std::move(prov);
    doc["features"] = std::move(feats);
    doc["flags"] = fv.flags;
    return doc.dump(indent);
}

FeatureVector from_json(std::string_view text) {
    const json doc = json::parse(text);
    FeatureVector fv;
    const json& prov = doc.at("provenance");
    if (!prov.at("strategy").is_null()) {
        const auto s = sampling::parse_strategy(prov.at("strategy").get<std::string>());
        if (!s) throw SchemaMismatch("unknown strategy in provenance");
        fv.provenance.strategy = *s;
    }
    if (!prov.at("seed").is_null()) fv.provenance.seed = prov.at("seed").get<std::uint64_t>();
    if (!prov.at("function").is_null()) fv.provenance.function = prov.at("function").get<int>();
    if (!prov.at("instance_seed").is_null()) fv.provenance.instance_seed = prov.at("instance_seed").get<std::uint64_t>();
    fv.n = prov.at("n").get<Eigen::Index>();
    fv.d = prov.at("d").get<Eigen::Index>();

    const json& feats = doc.at("features");
    if (feats.size() != kNumFeatures) throw SchemaMismatch("feature JSON must hold 46 entries");
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
        const json& v = feats.at(std::string(kNames[i]));
        fv.values[i] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
    if (doc.contains("flags")) fv.flags = doc.at("flags").get<std::vector<std::string>>();
    return fv;
}

}  // namespace elaprobe::features
