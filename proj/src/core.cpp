#include "rankest/core.hpp"

#include <cmath>
#include <numbers>

namespace rankest {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidStep: return "InvalidStep";
        case ErrorCode::SingularHessian: return "SingularHessian";
        case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
        case ErrorCode::DegenerateSample: return "DegenerateSample";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Sample Sample::permuted(std::span<const std::size_t> perm) const {
    const auto n = static_cast<Eigen::Index>(perm.size());
    auto reorder = [&](const Eigen::VectorXd& src) {
        Eigen::VectorXd out(n);
        for (Eigen::Index i = 0; i < n; ++i) out[i] = src[static_cast<Eigen::Index>(perm[i])];
        return out;
    };
    Sample out;
    out.y = reorder(y);
    out.x.resize(n, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) out.x.row(i) = x.row(static_cast<Eigen::Index>(perm[i]));
    if (r) out.r = reorder(*r);
    if (v) out.v = reorder(*v);
    if (w) out.w = reorder(*w);
    return out;
}

Beta::Beta(Eigen::VectorXd theta) : theta_(std::move(theta)), full_(theta_.size() + 1) {
    full_[0] = 1.0;
    full_.tail(theta_.size()) = theta_;
}

Beta Beta::with_coordinate(std::size_t k, double value) const {
    Eigen::VectorXd t = theta_;
    t[static_cast<Eigen::Index>(k)] = value;
    return Beta(std::move(t));
}

std::string_view to_string(EstimatorKind kind) noexcept {
    switch (kind) {
        case EstimatorKind::MRC: return "mrc";
        case EstimatorKind::CS: return "cs";
        case EstimatorKind::KT: return "kt";
        case EstimatorKind::AS: return "as";
    }
    return "mrc";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
    if (name == "mrc") return EstimatorKind::MRC;
    if (name == "cs") return EstimatorKind::CS;
    if (name == "kt") return EstimatorKind::KT;
    if (name == "as") return EstimatorKind::AS;
    throw Error(ErrorCode::InvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

double gaussian_kernel(double u) noexcept {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

EstimatorSpec EstimatorSpec::cs(double lo, double hi) {
    EstimatorSpec s;
    s.kind = EstimatorKind::CS;
    s.trim_lo = lo;
    s.trim_hi = hi;
    return s;
}

EstimatorSpec EstimatorSpec::kt() {
    EstimatorSpec s;
    s.kind = EstimatorKind::KT;
    return s;
}

EstimatorSpec EstimatorSpec::as(double c, double delta) {
    EstimatorSpec s;
    s.kind = EstimatorKind::AS;
    s.bandwidth_c = c;
    s.bandwidth_delta = delta;
    return s;
}

double EstimatorSpec::bandwidth(std::size_t n) const {
    return bandwidth_c * std::pow(static_cast<double>(n), -bandwidth_delta);
}

SearchDomain SearchDomain::around(const Eigen::VectorXd& center, double half_width) {
    SearchDomain d;
    d.lo = center.array() - half_width;
    d.hi = center.array() + half_width;
    return d;
}

void SearchDomain::validate() const {
    if (lo.size() != hi.size())
        throw Error(ErrorCode::DimensionMismatch, "domain bounds differ in length");
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
        if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]))
            throw Error(ErrorCode::NonFiniteValue, "domain bound not finite");
        if (!(lo[k] < hi[k]))
            throw Error(ErrorCode::InvalidArgument, "domain requires lo < hi in every coordinate");
    }
}

bool SearchDomain::contains(const Eigen::VectorXd& theta) const {
    if (theta.size() != lo.size()) return false;
    return (theta.array() >= lo.array()).all() && (theta.array() <= hi.array()).all();
}

namespace {

void require_finite(const Eigen::VectorXd& v, const char* name) {
    if (!v.allFinite()) throw Error(ErrorCode::NonFiniteValue, std::string("non-finite value in ") + name);
}

void require_length(const Eigen::VectorXd& v, std::size_t n, const char* name) {
    if (static_cast<std::size_t>(v.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " length differs from y");
}

}  // namespace

void validate_sample(const Sample& sample, const EstimatorSpec& spec) {
    const std::size_t n = sample.n();
    if (n < 2) throw Error(ErrorCode::DimensionMismatch, "need at least 2 observations");
    if (static_cast<std::size_t>(sample.x.rows()) != n)
        throw Error(ErrorCode::DimensionMismatch, "x rows differ from y length");
    if (sample.x.cols() < 2)
        throw Error(ErrorCode::DimensionMismatch, "x needs the normalized column plus at least one more");
    if (!sample.x.allFinite()) throw Error(ErrorCode::NonFiniteValue, "non-finite value in x");
    require_finite(sample.y, "y");

    if (sample.r.has_value() != sample.v.has_value())
        throw Error(ErrorCode::MissingColumn, sample.r ? "v" : "r");
    if (sample.r) {
        require_length(*sample.r, n, "r");
        require_length(*sample.v, n, "v");
        require_finite(*sample.r, "r");
        require_finite(*sample.v, "v");
        for (double ri : *sample.r)
            if (ri != 0.0 && ri != 1.0) throw Error(ErrorCode::InvalidArgument, "r entries must be 0 or 1");
    }
    if (sample.w) {
        require_length(*sample.w, n, "w");
        require_finite(*sample.w, "w");
    }

    switch (spec.kind) {
        case EstimatorKind::MRC: break;
        case EstimatorKind::CS:
            if (!(spec.trim_lo < spec.trim_hi))
                throw Error(ErrorCode::InvalidArgument, "CS requires trim_lo < trim_hi");
            break;
        case EstimatorKind::KT:
            if (!sample.r) throw Error(ErrorCode::MissingColumn, "r");
            break;
        case EstimatorKind::AS:
            if (!(spec.bandwidth_c > 0.0))
                throw Error(ErrorCode::InvalidArgument, "AS requires bandwidth_c > 0");
            if (!(spec.bandwidth_delta > 0.0 && spec.bandwidth_delta < 1.0))
                throw Error(ErrorCode::InvalidArgument, "AS requires 0 < bandwidth_delta < 1");
            if (!spec.kernel) throw Error(ErrorCode::InvalidArgument, "AS requires a smoothing kernel");
            if (!sample.w) throw Error(ErrorCode::MissingColumn, "w");
            break;
    }
}

}  // namespace rankest
