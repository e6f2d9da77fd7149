#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace elaprobe::problems {

inline constexpr int kNumFunctions = 24;
inline constexpr double kDomainLower = -5.0;
inline constexpr double kDomainUpper = 5.0;

/// BBOB-style function identifier, 1..24.
class FunctionId {
public:
    explicit FunctionId(int id);
    int value() const { return id_; }
    /// "f01".."f24".
    std::string label() const;
    friend bool operator==(FunctionId, FunctionId) = default;
    friend auto operator<=>(FunctionId, FunctionId) = default;

private:
    int id_;
};

std::optional<FunctionId> parse_function_id(std::string_view text);
std::vector<FunctionId> all_functions();

struct FunctionInfo {
    int id;
    std::string_view name;
    std::string_view separability;  // "separable" / "non-separable"
    std::string_view modality;      // "unimodal" / "multimodal"
};
const FunctionInfo& function_info(FunctionId fid);

/// One Gallagher peak: location, height and the rotated-frame conditioning.
struct GallagherPeak {
    Eigen::VectorXd location;
    Eigen::VectorXd rotated_location;  // R * location
    double weight = 0.0;
    Eigen::VectorXd scales;  // diagonal of C_i in the rotated frame
};

/// A seeded pseudo-instance: immutable after construction, safe to share.
struct ProblemInstance {
    FunctionId fid{1};
    int d = 0;
    std::uint64_t instance_seed = 0;
    Eigen::VectorXd x_opt;
    double f_opt = 0.0;
    Eigen::MatrixXd rotation_r;  // empty when unused
    Eigen::MatrixXd rotation_q;  // empty when unused
    Eigen::VectorXd signs;       // +-1 vector (Schwefel, Lunacek)
    std::vector<GallagherPeak> peaks;
};

ProblemInstance instantiate(FunctionId fid, int d, std::uint64_t instance_seed);

/// Haar-distributed orthogonal matrix: Gaussian QR with positive diagonal of R.
Eigen::MatrixXd random_rotation(int d, std::uint64_t seed);

double evaluate(const ProblemInstance& instance, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Row-wise evaluation; rows(points) may be zero.
Eigen::VectorXd batch_evaluate(const ProblemInstance& instance, const Eigen::MatrixXd& points);

bool in_domain(const Eigen::Ref<const Eigen::VectorXd>& x);

// Building blocks shared with tests.
double t_osz(double x);
Eigen::VectorXd t_osz(const Eigen::VectorXd& x);
Eigen::VectorXd t_asy(const Eigen::VectorXd& x, double beta);
Eigen::VectorXd lambda_diagonal(int d, double alpha);
double boundary_penalty(const Eigen::VectorXd& x);

}  // namespace elaprobe::problems
