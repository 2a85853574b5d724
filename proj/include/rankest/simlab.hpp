#pragma once

// Monte Carlo laboratory for the binary choice design
//   Y = 1(X' beta* + eps >= 0),  X ~ N(0, Sigma), Sigma_jk = rho^|j-k|,
//   beta* = (2, 4, ..., 2(p+1)),  eps ~ N(0, 1),
// estimated with MRC and the identification beta_1 = 1.
//
// Every replication draws from its own stream CounterRng(seed).split(...),
// and results land in replication-indexed slots, so reports are identical
// for any worker count.

#include "rankest/core.hpp"
#include "rankest/estimators.hpp"
#include "rankest/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rankest {

struct DgpConfig {
    std::size_t n = 100;
    std::size_t p = 1;
    double rho = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Draw {
    Sample sample;
    Eigen::VectorXd theta0;
};

/// beta* = (2, 4, ..., 2(p+1)).
Eigen::VectorXd true_beta(std::size_t p);
/// beta* / beta*_1 without its leading 1, i.e. (2, 3, ..., p+1).
Eigen::VectorXd true_theta(std::size_t p);
/// Lower Cholesky factor of the AR(1) correlation matrix of dimension p+1.
Eigen::MatrixXd ar1_cholesky(std::size_t dim, double rho);

/// Draws from the stream of `rng`: per observation p+1 normals for X, then eps.
Draw generate_binary_choice(std::size_t n, std::size_t p, double rho, CounterRng& rng);
/// Single draw from CounterRng(cfg.seed).
Draw generate_binary_choice(const DgpConfig& cfg);

/// Optional replacement data generator (used to exercise degenerate designs).
using DrawFunction = std::function<Draw(std::size_t n, std::size_t p, CounterRng& rng)>;

// ---------------------------------------------------------------------------
// Coverage

std::vector<Eigen::VectorXd> default_projections(std::size_t p);
std::vector<double> default_levels();

struct MonteCarloConfig {
    DgpConfig dgp;
    std::size_t reps = 1000;
    EstimatorSpec estimator;
    std::vector<Eigen::VectorXd> projections;  // empty means default_projections(p)
    std::vector<double> nominal_levels;        // empty means default_levels()
    bool init_at_truth = true;
    std::size_t threads = 1;

    void validate() const;
};

struct CoverageRow {
    std::size_t n = 0;
    std::size_t p = 0;
    double nominal_level = 0.0;
    std::size_t projection_id = 0;  // 1-based
    double empirical_coverage = 0.0;
    double mc_standard_error = 0.0;
};

struct CoverageReport {
    std::vector<CoverageRow> rows;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::string sd_source = "simulation";
    std::vector<Eigen::VectorXd> projections;
    std::vector<double> levels;
    std::vector<double> projection_sd;                  // simulation SD per projection
    std::vector<std::vector<double>> projected;         // [projection][replication] gamma' theta_hat
    std::vector<double> projected_truth;                // gamma' theta0 per projection
    std::vector<Eigen::VectorXd> estimates;             // theta_hat per replication
    std::size_t unconverged = 0;

    /// (gamma' theta_hat - gamma' theta0) / sd for one projection.
    std::vector<double> normalized(std::size_t projection_index) const;
};

CoverageReport run_coverage(const MonteCarloConfig& cfg);

// ---------------------------------------------------------------------------
// Covariance MAE

std::vector<double> default_multipliers();

struct MaeConfig {
    std::vector<std::pair<std::size_t, std::size_t>> grid;  // (n, p)
    std::vector<double> multipliers;                        // empty means default_multipliers()
    std::size_t reps = 100;
    std::size_t truth_reps = 2000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    void validate() const;
};

struct MaeRow {
    std::size_t n = 0;
    std::size_t p = 0;
    double multiplier = 0.0;
    double epsilon = 0.0;
    double mae = 0.0;            // NaN when the cell failed
    double mae_per_n = 0.0;      // mae / n, the same error on the Var(gamma' theta_hat) scale
    double sigma2_true = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;    // SingularHessian replications
    bool failed = false;         // more than 20% excluded
};

struct MaeReport {
    std::vector<MaeRow> rows;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::size_t truth_reps = 0;
    std::string truth_oracle;
};

/// Truth per cell is n Var(gamma' theta_hat) over truth_reps independent
/// fits, gamma = (p^{-1/2}, ...). Each of `reps` further replications is
/// fitted once and its covariance estimated at every eps = m n^{-1/6}; the
/// cell MAE is the median of |gamma' sandwich gamma - truth|.
MaeReport run_mae(const MaeConfig& cfg);

// ---------------------------------------------------------------------------
// Density and normality diagnostics

/// 0.9 min(sd, IQR / 1.34) m^{-1/5}; falls back to sd when the IQR is zero.
double silverman_bandwidth(std::span<const double> samples);
/// Gaussian kernel density estimate at each grid point.
std::vector<double> kde(std::span<const double> samples, std::span<const double> grid);
/// Evenly spaced grid with `points` nodes from lo to hi.
std::vector<double> linspace(double lo, double hi, std::size_t points);

struct TestResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// Kolmogorov-Smirnov against N(0, 1) with the asymptotic p-value.
TestResult ks_normal(std::span<const double> samples);
/// Jarque-Bera with the chi-square(2) p-value.
TestResult jarque_bera(std::span<const double> samples);
/// {"kolmogorov_smirnov", "jarque_bera"}.
std::map<std::string, TestResult> normality_tests(std::span<const double> samples);

// ---------------------------------------------------------------------------
// Rate of convergence

struct RateConfig {
    EstimatorSpec estimator;
    std::vector<std::size_t> n_grid;
    std::size_t p = 1;
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    bool init_at_truth = true;
    std::size_t threads = 1;
    DrawFunction draw;  // empty means generate_binary_choice with rho = 0.5

    void validate() const;
};

struct RatePoint {
    std::size_t n = 0;
    double rmse = 0.0;
    double log_rmse_se = 0.0;   // delta-method Monte Carlo error of log RMSE
    std::size_t stuck = 0;      // fits that returned their init unchanged
};

struct RateFit {
    std::vector<RatePoint> points;
    double slope = 0.0;
    double slope_se = 0.0;      // propagated Monte Carlo error
    double intercept = 0.0;
    std::vector<std::string> warnings;
};

/// Least-squares slope of log RMSE(n) against log n, with
/// RMSE(n) = sqrt(mean ||theta_hat - theta0||^2).
RateFit run_rate_check(const RateConfig& cfg);

}  // namespace rankest
