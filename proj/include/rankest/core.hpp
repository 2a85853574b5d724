#pragma once

// Domain types shared by every rankest module: the observation container,
// the normalized coefficient vector, estimator selection and validation.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rankest {

enum class ErrorCode {
    DimensionMismatch,
    MissingColumn,
    NonFiniteValue,
    LengthMismatch,
    IndexOutOfRange,
    InvalidArgument,
    InvalidStep,
    SingularHessian,
    NonPositiveVariance,
    DegenerateSample,
    ConfigError,
    IoError,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Observations (Y, X, optional censoring pair (R, V), optional scalar W).
/// Column 0 of x carries the covariate whose coefficient is fixed at 1.
struct Sample {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    std::optional<Eigen::VectorXd> r;
    std::optional<Eigen::VectorXd> v;
    std::optional<Eigen::VectorXd> w;

    std::size_t n() const noexcept { return static_cast<std::size_t>(y.size()); }
    /// Number of free coefficients (columns of x minus the normalized one).
    std::size_t p() const noexcept { return x.cols() > 0 ? static_cast<std::size_t>(x.cols() - 1) : 0; }

    /// Copy with observations reordered so that row i of the result is row perm[i].
    Sample permuted(std::span<const std::size_t> perm) const;
};

/// beta = (1, theta). The leading entry is never free.
class Beta {
public:
    Beta() = default;
    explicit Beta(Eigen::VectorXd theta);

    const Eigen::VectorXd& theta() const noexcept { return theta_; }
    const Eigen::VectorXd& full() const noexcept { return full_; }
    std::size_t p() const noexcept { return static_cast<std::size_t>(theta_.size()); }

    Beta with_coordinate(std::size_t k, double value) const;

private:
    Eigen::VectorXd theta_;
    Eigen::VectorXd full_ = Eigen::VectorXd::Ones(1);
};

enum class EstimatorKind { MRC, CS, KT, AS };

std::string_view to_string(EstimatorKind kind) noexcept;
EstimatorKind parse_estimator_kind(std::string_view name);

/// Density kernel for the AS estimator. Must be finite everywhere.
using SmoothingKernel = std::function<double(double)>;

double gaussian_kernel(double u) noexcept;

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::MRC;
    // CS trimming bounds (a, b) of M(y).
    double trim_lo = -1.0;
    double trim_hi = 1.0;
    // AS smoothing: K and b = c * n^{-delta}.
    std::string kernel_name = "gaussian";
    SmoothingKernel kernel = gaussian_kernel;
    double bandwidth_c = 1.0;
    double bandwidth_delta = 0.2;

    static EstimatorSpec mrc() { return {}; }
    static EstimatorSpec cs(double lo, double hi);
    static EstimatorSpec kt();
    static EstimatorSpec as(double c, double delta);

    double bandwidth(std::size_t n) const;
};

/// Compact search box for theta.
struct SearchDomain {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    /// [center - half_width, center + half_width] component-wise.
    static SearchDomain around(const Eigen::VectorXd& center, double half_width = 10.0);
    void validate() const;
    bool contains(const Eigen::VectorXd& theta) const;
};

/// Throws Error on the first violated Sample / EstimatorSpec invariant.
void validate_sample(const Sample& sample, const EstimatorSpec& spec);

/// M(y) = a 1(y<a) + y 1(a<=y<=b) + b 1(y>b).
inline double trim(double y, double a, double b) noexcept {
    if (y < a) return a;
    if (y > b) return b;
    return y;
}

}  // namespace rankest
