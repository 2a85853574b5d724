#include "rankest/covariance.hpp"

#include "rankest/parallel.hpp"
#include "rankest/rng.hpp"
#include "rankest/ustat.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace rankest {

double default_step(std::size_t n, std::size_t p, double c) {
    if (n < 1 || p < 1 || !(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size needs n, p, c > 0");
    return c * std::pow(static_cast<double>(p) / static_cast<double>(n), 1.0 / 6.0);
}

double n_only_step(std::size_t n, double c) {
    if (n < 1 || !(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size needs n, c > 0");
    return c * std::pow(static_cast<double>(n), -1.0 / 6.0);
}

CovarianceEstimate numerical_derivatives(const TauFunction& tau, const Eigen::VectorXd& theta_hat, double epsilon,
                                         std::size_t threads) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw Error(ErrorCode::InvalidStep, "epsilon must be positive and finite");
    const auto p = theta_hat.size();
    if (p < 1) throw Error(ErrorCode::DimensionMismatch, "theta_hat is empty");

    // Perturbed points: base, base + e u_i, base + e (u_i + u_j) for i <= j.
    std::vector<Eigen::VectorXd> points;
    points.push_back(theta_hat);
    for (Eigen::Index i = 0; i < p; ++i) {
        Eigen::VectorXd t = theta_hat;
        t[i] += epsilon;
        points.push_back(std::move(t));
    }
    auto pair_slot = [p](Eigen::Index i, Eigen::Index j) {
        // i <= j, row-major over the upper triangle
        return static_cast<std::size_t>(1 + p + i * p - i * (i - 1) / 2 + (j - i));
    };
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i; j < p; ++j) {
            Eigen::VectorXd t = theta_hat;
            t[i] += epsilon;
            t[j] += epsilon;
            points.push_back(std::move(t));
        }
    for (const auto& t : points)
        if (!t.allFinite()) throw Error(ErrorCode::InvalidStep, "perturbed parameter is not finite");

    std::vector<std::vector<double>> taus(points.size());
    parallel_for(points.size(), threads, [&](std::size_t s) { taus[s] = tau(points[s]); });

    const std::size_t n = taus[0].size();
    for (const auto& t : taus)
        if (t.size() != n) throw Error(ErrorCode::DimensionMismatch, "tau evaluations differ in length");
    const double dn = static_cast<double>(n);

    Eigen::MatrixXd grad(static_cast<Eigen::Index>(n), p);  // p_i(Z_z) in row z
    for (Eigen::Index i = 0; i < p; ++i)
        for (std::size_t z = 0; z < n; ++z)
            grad(static_cast<Eigen::Index>(z), i) = (taus[1 + static_cast<std::size_t>(i)][z] - taus[0][z]) / epsilon;

    CovarianceEstimate out;
    out.epsilon = epsilon;
    out.delta_hat = (grad.transpose() * grad) / dn;

    Eigen::MatrixXd v(p, p);
    const double e2 = epsilon * epsilon;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto& tij = taus[pair_slot(std::min(i, j), std::max(i, j))];
            const auto& ti = taus[1 + static_cast<std::size_t>(i)];
            const auto& tj = taus[1 + static_cast<std::size_t>(j)];
            double sum = 0.0;
            for (std::size_t z = 0; z < n; ++z) sum += (tij[z] - ti[z] - tj[z] + taus[0][z]) / e2;
            v(i, j) = 0.5 * sum / dn;
        }
    out.v_asymmetry = (v - v.transpose()).cwiseAbs().maxCoeff();
    out.v_hat = 0.5 * (v + v.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.v_hat, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd sv = eig.eigenvalues().cwiseAbs();
    out.v_condition = sv.minCoeff() > 0.0 ? sv.maxCoeff() / sv.minCoeff() : std::numeric_limits<double>::infinity();
    return out;
}

void attach_sandwich(CovarianceEstimate& estimate) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(estimate.v_hat);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double largest = lambda.cwiseAbs().maxCoeff();
    const double smallest = lambda.cwiseAbs().minCoeff();
    if (!(largest > 0.0) || smallest < 1e-10 * largest)
        throw Error(ErrorCode::SingularHessian, "V_hat is numerically singular (condition " +
                                                    std::to_string(estimate.v_condition) + ")");
    const Eigen::MatrixXd& q = eig.eigenvectors();
    const Eigen::MatrixXd v_inv = q * lambda.cwiseInverse().asDiagonal() * q.transpose();
    estimate.sandwich = v_inv * estimate.delta_hat * v_inv;
}

CovarianceEstimate estimate_covariance(const Sample& sample, const EstimatorSpec& spec,
                                       const Eigen::VectorXd& theta_hat, double epsilon, std::size_t threads) {
    if (static_cast<std::size_t>(theta_hat.size()) != sample.p())
        throw Error(ErrorCode::DimensionMismatch, "theta_hat length differs from sample p");
    const PairKernel kernel(sample, spec);
    const TauFunction tau = [&](const Eigen::VectorXd& theta) {
        const Eigen::VectorXd u = linear_index(sample, Beta(theta));
        return tau_all(kernel, {u.data(), static_cast<std::size_t>(u.size())});
    };
    CovarianceEstimate out = numerical_derivatives(tau, theta_hat, epsilon, threads);
    attach_sandwich(out);
    return out;
}

Interval projection_ci(const Eigen::VectorXd& theta_hat, const CovarianceEstimate& cov, const Eigen::VectorXd& gamma,
                       std::size_t n, double level) {
    if (gamma.size() != theta_hat.size() || cov.sandwich.rows() != gamma.size())
        throw Error(ErrorCode::DimensionMismatch, "projection length differs from theta");
    if ((gamma.array() == 0.0).all()) throw Error(ErrorCode::InvalidArgument, "projection vector is zero");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
    const double variance = gamma.dot(cov.sandwich * gamma);
    if (!(variance > 0.0)) throw Error(ErrorCode::NonPositiveVariance, "gamma' sandwich gamma is not positive");
    const double half = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(variance / static_cast<double>(n));
    const double center = gamma.dot(theta_hat);
    return {center - half, center + half};
}

}  // namespace rankest
