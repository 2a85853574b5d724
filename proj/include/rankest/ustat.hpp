#pragma once

// Second-order U-statistic objectives for the four rank estimators.
//
// Every kernel is written as w(i, j) * 1(u_i > u_j), u = X beta, where the
// pair weight w does not depend on beta:
//   MRC  w(i, j) = 1(Y_i > Y_j)
//   CS   w(i, j) = M(Y_i)
//   KT   w(i, j) = R_j 1(V_j < V_i)         (the KT kernel with roles swapped)
//   AS   w(i, j) = 1(Y_i > Y_j) K_b(W_i - W_j)
// All comparisons are strict, so tied pairs and self-pairs contribute zero.

#include "rankest/core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rankest {

struct ObjectiveValue {
    double value = 0.0;
    std::int64_t num_pairs = 0;
    std::optional<std::int64_t> raw_count;  // MRC and KT only
};

/// Beta-free pair weights of one sample under one estimator.
class PairKernel {
public:
    PairKernel(const Sample& sample, const EstimatorSpec& spec);

    EstimatorKind kind() const noexcept { return kind_; }
    std::size_t n() const noexcept { return n_; }
    bool integer_valued() const noexcept { return kind_ == EstimatorKind::MRC || kind_ == EstimatorKind::KT; }

    double weight(std::size_t i, std::size_t j) const;

    // Per-observation pieces used by the fast paths.
    std::span<const double> response() const noexcept { return response_; }
    std::span<const double> trimmed() const noexcept { return trimmed_; }
    std::span<const std::int64_t> uncensored() const noexcept { return uncensored_; }

private:
    EstimatorKind kind_;
    std::size_t n_;
    std::vector<double> response_;        // Y, or V for KT
    std::vector<double> trimmed_;         // M(Y_i), CS only
    std::vector<std::int64_t> uncensored_;  // R, KT only
    std::vector<double> w_;               // AS conditioning variable
    double bandwidth_ = 1.0;
    SmoothingKernel kernel_;
};

/// u = X * (1, theta).
Eigen::VectorXd linear_index(const Sample& sample, const Beta& beta);

/// Sum with a fixed binary-tree reduction order.
double pairwise_sum(std::span<const double> values) noexcept;

/// sum_{i != j} 1(y_i > y_j) 1(u_i > u_j) in O(n log n).
std::int64_t fast_concordance(std::span<const double> u, std::span<const double> y);

/// Per-observation dominance counts:
///   below[i] = sum over j with u_j < u_i and y_j < y_i of weight[j]
///   above[i] = #{j : u_j > u_i and y_j > y_i}
/// An empty weight span means unit weights.
struct DominanceCounts {
    std::vector<std::int64_t> below;
    std::vector<std::int64_t> above;
};
DominanceCounts dominance_counts(std::span<const double> u, std::span<const double> y,
                                 std::span<const std::int64_t> weight = {});

ObjectiveValue objective(const Sample& sample, const EstimatorSpec& spec, const Beta& beta);
/// Same as objective() on a precomputed kernel and index vector.
ObjectiveValue objective(const PairKernel& kernel, std::span<const double> u);

/// Uncentered tau_n(Z_z; beta) for every z:
/// (1/n) sum_j k(Z_z, Z_j) + (1/n) sum_j k(Z_j, Z_z).
std::vector<double> tau_all(const PairKernel& kernel, std::span<const double> u);

/// Centered tau_n at one observation, f = k(beta) - k(reference).
double tau_n(const Sample& sample, const EstimatorSpec& spec, std::size_t z_index, const Beta& beta,
             const Beta& reference);

/// Largest absolute residual of the empirical Hoeffding decomposition
/// Gamma_n = Gamma_hat + P_n g_hat + U_n h_hat of the kernel centered at
/// reference, together with the degeneracy residuals of h_hat.
double hoeffding_check(const Sample& sample, const EstimatorSpec& spec, const Beta& beta,
                       const Beta& reference);

}  // namespace rankest
