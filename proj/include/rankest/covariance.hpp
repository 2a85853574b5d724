#pragma once

// Numerical-derivative estimate of the asymptotic covariance V^{-1} Delta V^{-1}.
//
// With tau_n(z; theta) = P_n f(z, .; theta) + P_n f(., z; theta) and unit
// vectors u_i, forward differences give
//   p_i(z)  = [tau(z; t + e u_i) - tau(z; t)] / e
//   p_ij(z) = [tau(z; t + e(u_i + u_j)) - tau(z; t + e u_i) - tau(z; t + e u_j) + tau(z; t)] / e^2
//   Delta_hat_ij = P_n p_i p_j,   V_hat_ij = P_n p_ij / 2.
// Centering constants of the kernel cancel in every difference, so the
// uncentered tau is used throughout.

#include "rankest/core.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace rankest {

struct CovarianceEstimate {
    Eigen::MatrixXd delta_hat;
    Eigen::MatrixXd v_hat;     // symmetrized
    Eigen::MatrixXd sandwich;  // V_hat^{-1} Delta_hat V_hat^{-1}
    double epsilon = 0.0;
    double v_condition = 0.0;  // largest / smallest singular value of V_hat
    double v_asymmetry = 0.0;  // max |V - V^T| before symmetrization
};

/// tau_n(Z_z; theta) for every observation z.
using TauFunction = std::function<std::vector<double>(const Eigen::VectorXd& theta)>;

/// c * (p / n)^{1/6}.
double default_step(std::size_t n, std::size_t p, double c = 1.0);
/// c * n^{-1/6}, the multiplier grid form.
double n_only_step(std::size_t n, double c);

/// Delta_hat and V_hat without inversion; sandwich is left empty.
CovarianceEstimate numerical_derivatives(const TauFunction& tau, const Eigen::VectorXd& theta_hat, double epsilon,
                                         std::size_t threads = 1);

/// Adds the sandwich to an estimate from numerical_derivatives(). Throws
/// SingularHessian when V_hat's smallest singular value is below 1e-10 times
/// its largest.
void attach_sandwich(CovarianceEstimate& estimate);

CovarianceEstimate estimate_covariance(const Sample& sample, const EstimatorSpec& spec,
                                       const Eigen::VectorXd& theta_hat, double epsilon, std::size_t threads = 1);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// gamma' theta_hat -/+ z_{(1+level)/2} sqrt(gamma' sandwich gamma / n).
Interval projection_ci(const Eigen::VectorXd& theta_hat, const CovarianceEstimate& cov, const Eigen::VectorXd& gamma,
                       std::size_t n, double level);

}  // namespace rankest
