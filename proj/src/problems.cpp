#include "elaprobe/problems.hpp"

#include "elaprobe/errors.hpp"
#include "elaprobe/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace elaprobe::problems {

namespace {

constexpr std::array<FunctionInfo, kNumFunctions> kInfo = {{
    {1, "sphere", "separable", "unimodal"},
    {2, "ellipsoid-separable", "separable", "unimodal"},
    {3, "rastrigin-separable", "separable", "multimodal"},
    {4, "bueche-rastrigin", "separable", "multimodal"},
    {5, "linear-slope", "separable", "unimodal"},
    {6, "attractive-sector", "non-separable", "unimodal"},
    {7, "step-ellipsoid", "non-separable", "unimodal"},
    {8, "rosenbrock", "non-separable", "unimodal"},
    {9, "rosenbrock-rotated", "non-separable", "unimodal"},
    {10, "ellipsoid", "non-separable", "unimodal"},
    {11, "discus", "non-separable", "unimodal"},
    {12, "bent-cigar", "non-separable", "unimodal"},
    {13, "sharp-ridge", "non-separable", "unimodal"},
    {14, "different-powers", "non-separable", "unimodal"},
    {15, "rastrigin", "non-separable", "multimodal"},
    {16, "weierstrass", "non-separable", "multimodal"},
    {17, "schaffers-f7", "non-separable", "multimodal"},
    {18, "schaffers-f7-ill-conditioned", "non-separable", "multimodal"},
    {19, "griewank-rosenbrock", "non-separable", "multimodal"},
    {20, "schwefel", "non-separable", "multimodal"},
    {21, "gallagher-101-peaks", "non-separable", "multimodal"},
    {22, "gallagher-21-peaks", "non-separable", "multimodal"},
    {23, "katsuura", "non-separable", "multimodal"},
    {24, "lunacek-bi-rastrigin", "non-separable", "multimodal"},
}};

constexpr double kSchwefelOptimum = 4.2096874633;
constexpr double kSchwefelOffset = 4.189828872724339;
constexpr double kLunacekMu0 = 2.5;

// Sub-stream tags inside one instance.
enum class Stream : std::uint64_t { Core = 0, RotationR = 1, RotationQ = 2, Peaks = 3 };

std::uint64_t stream_seed(std::uint64_t instance_seed, FunctionId fid, int d, Stream s) {
    return rng::derive_seed(instance_seed, {static_cast<std::uint64_t>(rng::Purpose::InstanceInternal),
                                            static_cast<std::uint64_t>(fid.value()), static_cast<std::uint64_t>(d),
                                            static_cast<std::uint64_t>(s)});
}

double uniform(rng::MersenneTwister& mt, double lo, double hi) { return lo + (hi - lo) * mt.next_unit(); }

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

double rastrigin_core(const Eigen::VectorXd& z) {
    const double d = static_cast<double>(z.size());
    double cos_sum = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) cos_sum += std::cos(2.0 * std::numbers::pi * z[i]);
    return 10.0 * (d - cos_sum) + z.squaredNorm();
}

double rosenbrock_core(const Eigen::VectorXd& z) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
        const double a = z[i] * z[i] - z[i + 1];
        const double b = z[i] - 1.0;
        sum += 100.0 * a * a + b * b;
    }
    return sum;
}

// 10^(exponent * i / (d - 1)) weights of the ellipsoid family.
double conditioning_weight(double exponent, Eigen::Index i, Eigen::Index d) {
    return std::pow(10.0, exponent * static_cast<double>(i) / static_cast<double>(d - 1));
}

double rosenbrock_scale(int d) { return std::max(1.0, std::sqrt(static_cast<double>(d)) / 8.0); }

void add_gallagher_peaks(ProblemInstance& inst, int peak_count, double best_alpha, rng::MersenneTwister& mt) {
    const int d = inst.d;
    const int others = peak_count - 1;
    std::vector<double> alphas(static_cast<std::size_t>(others));
    for (int j = 0; j < others; ++j)
        alphas[j] = std::pow(1000.0, 2.0 * j / static_cast<double>(others - 1));
    rng::shuffle(mt, std::span<double>(alphas));

    auto scales_for = [&](double alpha) {
        Eigen::VectorXd lambda = lambda_diagonal(d, alpha) / std::pow(alpha, 0.25);
        std::vector<double> entries(lambda.data(), lambda.data() + d);
        rng::shuffle(mt, std::span<double>(entries));
        return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(entries.data(), d));
    };

    inst.peaks.clear();
    inst.peaks.push_back({inst.x_opt, inst.rotation_r * inst.x_opt, 10.0, scales_for(best_alpha)});
    for (int i = 0; i < others; ++i) {
        GallagherPeak peak;
        peak.location.resize(d);
        for (int k = 0; k < d; ++k) peak.location[k] = uniform(mt, kDomainLower, kDomainUpper);
        peak.rotated_location = inst.rotation_r * peak.location;
        peak.weight = 1.1 + 8.0 * i / static_cast<double>(others - 1);
        peak.scales = scales_for(alphas[i]);
        inst.peaks.push_back(std::move(peak));
    }
}

double gallagher(const ProblemInstance& inst, const Eigen::VectorXd& x) {
    const Eigen::Index d = x.size();
    const Eigen::VectorXd rx = inst.rotation_r * x;
    double best = 0.0;
    for (const auto& peak : inst.peaks) {
        const Eigen::VectorXd diff = rx - peak.rotated_location;
        const double quad = (peak.scales.array() * diff.array().square()).sum();
        best = std::max(best, peak.weight * std::exp(-quad / (2.0 * d)));
    }
    const double t = t_osz(10.0 - best);
    return t * t + boundary_penalty(x);
}

double weierstrass_offset() {
    double f0 = 0.0;
    for (int k = 0; k < 12; ++k) f0 += std::pow(0.5, k) * std::cos(std::numbers::pi * std::pow(3.0, k));
    return f0;
}

}  // namespace

FunctionId::FunctionId(int id) : id_(id) {
    if (id < 1 || id > kNumFunctions) throw InvalidArgument("function id must be in [1, 24], got " + std::to_string(id));
}

std::string FunctionId::label() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "f%02d", id_);
    return buf;
}

std::optional<FunctionId> parse_function_id(std::string_view text) {
    if (!text.empty() && (text.front() == 'f' || text.front() == 'F')) text.remove_prefix(1);
    if (text.empty() || text.size() > 2) return std::nullopt;
    int v = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    if (v < 1 || v > kNumFunctions) return std::nullopt;
    return FunctionId(v);
}

std::vector<FunctionId> all_functions() {
    std::vector<FunctionId> out;
    for (int i = 1; i <= kNumFunctions; ++i) out.emplace_back(i);
    return out;
}

const FunctionInfo& function_info(FunctionId fid) { return kInfo[static_cast<std::size_t>(fid.value() - 1)]; }

double t_osz(double x) {
    if (x == 0.0) return 0.0;
    const double xhat = std::log(std::abs(x));
    const double c1 = x > 0.0 ? 10.0 : 5.5;
    const double c2 = x > 0.0 ? 7.9 : 3.1;
    return sign_of(x) * std::exp(xhat + 0.049 * (std::sin(c1 * xhat) + std::sin(c2 * xhat)));
}

Eigen::VectorXd t_osz(const Eigen::VectorXd& x) {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = t_osz(x[i]);
    return out;
}

Eigen::VectorXd t_asy(const Eigen::VectorXd& x, double beta) {
    const Eigen::Index d = x.size();
    Eigen::VectorXd out = x;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (x[i] > 0.0) {
            const double frac = d > 1 ? static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
            out[i] = std::pow(x[i], 1.0 + beta * frac * std::sqrt(x[i]));
        }
    }
    return out;
}

Eigen::VectorXd lambda_diagonal(int d, double alpha) {
    Eigen::VectorXd out(d);
    for (int i = 0; i < d; ++i) out[i] = std::pow(alpha, 0.5 * i / static_cast<double>(d - 1));
    return out;
}

double boundary_penalty(const Eigen::VectorXd& x) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double excess = std::abs(x[i]) - kDomainUpper;
        if (excess > 0.0) sum += excess * excess;
    }
    return sum;
}

Eigen::MatrixXd random_rotation(int d, std::uint64_t seed) {
    rng::MersenneTwister mt(rng::fold_seed32(seed));
    Eigen::MatrixXd gauss(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) gauss(i, j) = rng::standard_normal(mt);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

ProblemInstance instantiate(FunctionId fid, int d, std::uint64_t instance_seed) {
    if (d < 2) throw InvalidDimension("benchmark functions need d >= 2, got " + std::to_string(d));
    ProblemInstance inst;
    inst.fid = fid;
    inst.d = d;
    inst.instance_seed = instance_seed;

    rng::MersenneTwister mt(rng::fold_seed32(stream_seed(instance_seed, fid, d, Stream::Core)));
    inst.x_opt.resize(d);
    for (int i = 0; i < d; ++i) inst.x_opt[i] = uniform(mt, -4.0, 4.0);
    inst.f_opt = uniform(mt, -100.0, 100.0);
    inst.signs = inst.x_opt.unaryExpr([](double v) { return sign_of(v); });

    const int id = fid.value();
    const bool needs_r = id >= 6 && id != 8 && id != 20;
    const bool needs_q = id == 6 || id == 7 || id == 13 || id == 15 || id == 16 || id == 17 || id == 18 ||
                         id == 23 || id == 24;
    if (needs_r) inst.rotation_r = random_rotation(d, stream_seed(instance_seed, fid, d, Stream::RotationR));
    if (needs_q) inst.rotation_q = random_rotation(d, stream_seed(instance_seed, fid, d, Stream::RotationQ));

    switch (id) {
        case 4:
            for (int i = 0; i < d; i += 2) inst.x_opt[i] = std::abs(inst.x_opt[i]);
            break;
        case 5: inst.x_opt = 5.0 * inst.signs; break;
        case 8: inst.x_opt *= 0.75; break;
        case 9:
        case 19:
            // z = c R x + 1/2 reaches the all-ones optimum at x = R^T (1 / (2c)).
            inst.x_opt = inst.rotation_r.transpose() * Eigen::VectorXd::Constant(d, 0.5 / rosenbrock_scale(d));
            break;
        case 20: inst.x_opt = 0.5 * kSchwefelOptimum * inst.signs; break;
        case 21:
        case 22: {
            rng::MersenneTwister peak_mt(rng::fold_seed32(stream_seed(instance_seed, fid, d, Stream::Peaks)));
            add_gallagher_peaks(inst, id == 21 ? 101 : 21, id == 21 ? 1000.0 : 1.0e6, peak_mt);
            break;
        }
        case 24: inst.x_opt = 0.5 * kLunacekMu0 * inst.signs; break;
        default: break;
    }
    return inst;
}

bool in_domain(const Eigen::Ref<const Eigen::VectorXd>& x) {
    return (x.array() >= kDomainLower).all() && (x.array() <= kDomainUpper).all();
}

double evaluate(const ProblemInstance& inst, const Eigen::Ref<const Eigen::VectorXd>& x_in) {
    const int d = inst.d;
    if (x_in.size() != d)
        throw DimensionMismatch("point has " + std::to_string(x_in.size()) + " coordinates, instance has d=" +
                                std::to_string(d));
    if (!x_in.allFinite()) throw NonFiniteInput("evaluation point contains NaN or infinity");
    const Eigen::VectorXd x = x_in;
    const Eigen::VectorXd z0 = x - inst.x_opt;
    const auto& R = inst.rotation_r;
    const auto& Q = inst.rotation_q;
    double f = 0.0;

    switch (inst.fid.value()) {
        case 1: f = z0.squaredNorm(); break;
        case 2: {
            const Eigen::VectorXd z = t_osz(z0);
            for (int i = 0; i < d; ++i) f += conditioning_weight(6.0, i, d) * z[i] * z[i];
            break;
        }
        case 3: {
            const Eigen::VectorXd z = lambda_diagonal(d, 10.0).cwiseProduct(t_asy(t_osz(z0), 0.2));
            f = rastrigin_core(z);
            break;
        }
        case 4: {
            Eigen::VectorXd z = t_osz(z0);
            for (int i = 0; i < d; ++i) {
                double s = std::pow(10.0, 0.5 * i / static_cast<double>(d - 1));
                if (z[i] > 0.0 && i % 2 == 0) s *= 10.0;
                z[i] *= s;
            }
            f = rastrigin_core(z) + 100.0 * boundary_penalty(x);
            break;
        }
        case 5: {
            for (int i = 0; i < d; ++i) {
                const double s = inst.signs[i] * conditioning_weight(1.0, i, d);
                const double zi = inst.x_opt[i] * x[i] < 25.0 ? x[i] : inst.x_opt[i];
                f += 5.0 * std::abs(s) - s * zi;
            }
            break;
        }
        case 6: {
            const Eigen::VectorXd z = Q * lambda_diagonal(d, 10.0).asDiagonal() * (R * z0);
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                const double s = z[i] * inst.x_opt[i] > 0.0 ? 100.0 : 1.0;
                sum += (s * z[i]) * (s * z[i]);
            }
            f = std::pow(t_osz(sum), 0.9);
            break;
        }
        case 7: {
            const Eigen::VectorXd zhat = lambda_diagonal(d, 10.0).asDiagonal() * (R * z0);
            Eigen::VectorXd ztilde(d);
            for (int i = 0; i < d; ++i)
                ztilde[i] = std::abs(zhat[i]) > 0.5 ? std::floor(0.5 + zhat[i]) : std::floor(0.5 + 10.0 * zhat[i]) / 10.0;
            const Eigen::VectorXd z = Q * ztilde;
            double sum = 0.0;
            for (int i = 0; i < d; ++i) sum += conditioning_weight(2.0, i, d) * z[i] * z[i];
            f = 0.1 * std::max(std::abs(zhat[0]) / 1.0e4, sum) + boundary_penalty(x);
            break;
        }
        case 8: f = rosenbrock_core(rosenbrock_scale(d) * z0 + Eigen::VectorXd::Ones(d)); break;
        case 9: f = rosenbrock_core(rosenbrock_scale(d) * (R * x) + Eigen::VectorXd::Constant(d, 0.5)); break;
        case 10: {
            const Eigen::VectorXd z = t_osz(Eigen::VectorXd(R * z0));
            for (int i = 0; i < d; ++i) f += conditioning_weight(6.0, i, d) * z[i] * z[i];
            break;
        }
        case 11: {
            const Eigen::VectorXd z = t_osz(Eigen::VectorXd(R * z0));
            f = 1.0e6 * z[0] * z[0] + z.tail(d - 1).squaredNorm();
            break;
        }
        case 12: {
            const Eigen::VectorXd z = R * t_asy(Eigen::VectorXd(R * z0), 0.5);
            f = z[0] * z[0] + 1.0e6 * z.tail(d - 1).squaredNorm();
            break;
        }
        case 13: {
            const Eigen::VectorXd z = Q * lambda_diagonal(d, 10.0).asDiagonal() * (R * z0);
            f = z[0] * z[0] + 100.0 * z.tail(d - 1).norm();
            break;
        }
        case 14: {
            const Eigen::VectorXd z = R * z0;
            double sum = 0.0;
            for (int i = 0; i < d; ++i) sum += std::pow(std::abs(z[i]), 2.0 + 4.0 * i / static_cast<double>(d - 1));
            f = std::sqrt(sum);
            break;
        }
        case 15: {
            const Eigen::VectorXd inner = t_asy(t_osz(Eigen::VectorXd(R * z0)), 0.2);
            const Eigen::VectorXd z = R * (lambda_diagonal(d, 10.0).asDiagonal() * (Q * inner));
            f = rastrigin_core(z);
            break;
        }
        case 16: {
            static const double f0 = weierstrass_offset();
            const Eigen::VectorXd inner = t_osz(Eigen::VectorXd(R * z0));
            const Eigen::VectorXd z = R * (lambda_diagonal(d, 0.01).asDiagonal() * (Q * inner));
            double sum = 0.0;
            for (int i = 0; i < d; ++i) {
                double amp = 1.0;
                double freq = 1.0;
                for (int k = 0; k < 12; ++k) {
                    sum += amp * std::cos(2.0 * std::numbers::pi * freq * (z[i] + 0.5));
                    amp *= 0.5;
                    freq *= 3.0;
                }
            }
            const double core = sum / d - f0;
            f = 10.0 * core * core * core + 10.0 / d * boundary_penalty(x);
            break;
        }
        case 17:
        case 18: {
            const double alpha = inst.fid.value() == 17 ? 10.0 : 1000.0;
            const Eigen::VectorXd inner = t_asy(Eigen::VectorXd(R * z0), 0.5);
            const Eigen::VectorXd z = lambda_diagonal(d, alpha).asDiagonal() * (Q * inner);
            double sum = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const double s = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
                const double sin_term = std::sin(50.0 * std::pow(s, 0.2));
                sum += std::sqrt(s) + std::sqrt(s) * sin_term * sin_term;
            }
            const double mean = sum / (d - 1);
            f = mean * mean + 10.0 * boundary_penalty(x);
            break;
        }
        case 19: {
            const Eigen::VectorXd z = rosenbrock_scale(d) * (R * x) + Eigen::VectorXd::Constant(d, 0.5);
            double sum = 0.0;
            for (int i = 0; i + 1 < d; ++i) {
                const double a = z[i] * z[i] - z[i + 1];
                const double b = z[i] - 1.0;
                const double s = 100.0 * a * a + b * b;
                sum += s / 4000.0 - std::cos(s);
            }
            f = 10.0 / (d - 1) * sum + 10.0;
            break;
        }
        case 20: {
            const Eigen::VectorXd xhat = 2.0 * inst.signs.cwiseProduct(x);
            const Eigen::VectorXd two_opt = 2.0 * inst.x_opt.cwiseAbs();
            Eigen::VectorXd zhat = xhat;
            for (int i = 1; i < d; ++i) zhat[i] += 0.25 * (xhat[i - 1] - two_opt[i - 1]);
            const Eigen::VectorXd z =
                100.0 * (lambda_diagonal(d, 10.0).asDiagonal() * (zhat - two_opt) + two_opt);
            double sum = 0.0;
            for (int i = 0; i < d; ++i) sum += z[i] * std::sin(std::sqrt(std::abs(z[i])));
            f = -sum / (100.0 * d) + kSchwefelOffset + 100.0 * boundary_penalty(z / 100.0);
            break;
        }
        case 21:
        case 22: f = gallagher(inst, x); break;
        case 23: {
            const Eigen::VectorXd z = Q * (lambda_diagonal(d, 100.0).asDiagonal() * (R * z0));
            const double exponent = 10.0 / std::pow(static_cast<double>(d), 1.2);
            const double scale = 10.0 / (static_cast<double>(d) * d);
            double prod = 1.0;
            for (int i = 0; i < d; ++i) {
                double sum = 0.0;
                double p = 2.0;
                for (int j = 1; j <= 32; ++j, p *= 2.0) {
                    const double v = p * z[i];
                    sum += std::abs(v - std::nearbyint(v)) / p;
                }
                prod *= std::pow(1.0 + (i + 1) * sum, exponent);
            }
            f = scale * prod - scale + boundary_penalty(x);
            break;
        }
        case 24: {
            const double dd = 1.0;
            const double s = 1.0 - 1.0 / (2.0 * std::sqrt(d + 20.0) - 8.2);
            const double mu1 = -std::sqrt((kLunacekMu0 * kLunacekMu0 - dd) / s);
            const Eigen::VectorXd xhat = 2.0 * inst.signs.cwiseProduct(x);
            const Eigen::VectorXd shifted = xhat - Eigen::VectorXd::Constant(d, kLunacekMu0);
            const Eigen::VectorXd z = Q * (lambda_diagonal(d, 100.0).asDiagonal() * (R * shifted));
            const double sphere0 = shifted.squaredNorm();
            const double sphere1 = dd * d + s * (xhat - Eigen::VectorXd::Constant(d, mu1)).squaredNorm();
            double cos_sum = 0.0;
            for (int i = 0; i < d; ++i) cos_sum += std::cos(2.0 * std::numbers::pi * z[i]);
            f = std::min(sphere0, sphere1) + 10.0 * (d - cos_sum) + 1.0e4 * boundary_penalty(x);
            break;
        }
    }
    return f + inst.f_opt;
}

Eigen::VectorXd batch_evaluate(const ProblemInstance& instance, const Eigen::MatrixXd& points) {
    Eigen::VectorXd out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = evaluate(instance, points.row(i).transpose());
    return out;
}

}  // namespace elaprobe::problems
