#pragma once

// Exact cyclic coordinate ascent for the piecewise-constant rank objectives.
//
// Along coordinate k the index is u_i(t) = c_i + t x_ik, so each pairwise
// indicator flips at most once, at t_ij = -(c_i - c_j) / (x_ik - x_jk).
// Sorting those breakpoints and sweeping them gives the objective on every
// interval in O(n^2 log n), which makes each coordinate step an exact
// line maximization.

#include "rankest/core.hpp"
#include "rankest/ustat.hpp"

#include <optional>
#include <vector>

namespace rankest {

struct FitOptions {
    Eigen::VectorXd init;                 // empty means the zero vector
    int max_sweeps = 50;
    std::optional<SearchDomain> domain;   // empty means init +/- 10
};

struct FitResult {
    Eigen::VectorXd theta_hat;
    ObjectiveValue objective;
    int sweeps_used = 0;
    bool converged = false;
    std::vector<double> trace;  // objective value after each sweep
};

struct CoordinateMax {
    double theta_k = 0.0;
    double value = 0.0;
};

/// Sorted, deduplicated flip points of coordinate k (0-based into theta)
/// that fall inside [domain.lo[k], domain.hi[k]].
std::vector<double> coordinate_breakpoints(const Sample& sample, const Beta& beta, std::size_t k,
                                           const SearchDomain& domain);

/// Exact maximizer of the objective along coordinate k within the domain.
///
/// The section is a step function; its maximal constant pieces (domain ends
/// included) are the candidate intervals and each is represented by its
/// midpoint. The current theta_k is kept unless some piece is strictly
/// better; otherwise the midpoint of the leftmost best piece is returned.
///
/// For CS with negative trimming bounds the value at a breakpoint can exceed
/// both neighbouring pieces, so a current theta_k sitting exactly on one may
/// be kept with a value no midpoint attains.
CoordinateMax maximize_coordinate(const Sample& sample, const EstimatorSpec& spec, const Beta& beta,
                                  std::size_t k, const SearchDomain& domain);

FitResult fit(const Sample& sample, const EstimatorSpec& spec, const FitOptions& opts = {});

}  // namespace rankest
