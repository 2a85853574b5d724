#include "rankest/simlab.hpp"

#include "rankest/covariance.hpp"
#include "rankest/parallel.hpp"
#include "rankest/ustat.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace rankest {

namespace {

// Stream tags for the MAE pipeline.
constexpr std::uint64_t kTruthStream = 0x7472757468ULL;
constexpr std::uint64_t kEstimateStream = 0x657374ULL;

double sample_mean(std::span<const double> v) {
    return pairwise_sum(v) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    const double m = sample_mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

// Linear-interpolation quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

std::uint64_t cell_tag(std::size_t n, std::size_t p) {
    return (static_cast<std::uint64_t>(n) << 16) ^ static_cast<std::uint64_t>(p);
}

Eigen::VectorXd fit_init(const Draw& draw, bool init_at_truth) {
    return init_at_truth ? draw.theta0 : Eigen::VectorXd::Zero(draw.theta0.size());
}

}  // namespace

void DgpConfig::validate() const {
    if (n < 2) throw Error(ErrorCode::ConfigError, "n must be at least 2");
    if (p < 1) throw Error(ErrorCode::ConfigError, "p must be at least 1");
    if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::ConfigError, "|rho| must be below 1");
}

Eigen::VectorXd true_beta(std::size_t p) {
    Eigen::VectorXd beta(static_cast<Eigen::Index>(p) + 1);
    for (Eigen::Index j = 0; j < beta.size(); ++j) beta[j] = 2.0 * static_cast<double>(j + 1);
    return beta;
}

Eigen::VectorXd true_theta(std::size_t p) {
    const Eigen::VectorXd beta = true_beta(p);
    return beta.tail(static_cast<Eigen::Index>(p)) / beta[0];
}

Eigen::MatrixXd ar1_cholesky(std::size_t dim, double rho) {
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd sigma(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k) sigma(j, k) = std::pow(rho, static_cast<double>(std::abs(j - k)));
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::ConfigError, "AR(1) covariance is not positive definite");
    return llt.matrixL();
}

Draw generate_binary_choice(std::size_t n, std::size_t p, double rho, CounterRng& rng) {
    DgpConfig{n, p, rho, 0}.validate();
    const Eigen::MatrixXd chol = ar1_cholesky(p + 1, rho);
    const Eigen::VectorXd beta = true_beta(p);
    const auto dim = static_cast<Eigen::Index>(p) + 1;

    Draw out;
    out.sample.x.resize(static_cast<Eigen::Index>(n), dim);
    out.sample.y.resize(static_cast<Eigen::Index>(n));
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) z[j] = rng.normal();
        const Eigen::VectorXd xi = chol * z;
        out.sample.x.row(i) = xi.transpose();
        const double eps = rng.normal();
        out.sample.y[i] = xi.dot(beta) + eps >= 0.0 ? 1.0 : 0.0;
    }
    out.theta0 = true_theta(p);
    return out;
}

Draw generate_binary_choice(const DgpConfig& cfg) {
    cfg.validate();
    CounterRng rng(cfg.seed);
    return generate_binary_choice(cfg.n, cfg.p, cfg.rho, rng);
}

// ---------------------------------------------------------------------------

std::vector<Eigen::VectorXd> default_projections(std::size_t p) {
    const auto d = static_cast<Eigen::Index>(p);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
    Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
    first[0] = 1.0;
    Eigen::VectorXd ramp(d);
    for (Eigen::Index j = 0; j < d; ++j) ramp[j] = static_cast<double>(j + 1);
    return {ones, first, ramp};
}

std::vector<double> default_levels() {
    std::vector<double> levels;
    for (int k = 0; k < 10; ++k) levels.push_back(static_cast<double>(50 + 5 * k) / 100.0);
    return levels;
}

void MonteCarloConfig::validate() const {
    dgp.validate();
    if (reps < 2) throw Error(ErrorCode::ConfigError, "reps must be at least 2");
    for (const auto& g : projections) {
        if (static_cast<std::size_t>(g.size()) != dgp.p)
            throw Error(ErrorCode::ConfigError, "projection length differs from p");
        if ((g.array() == 0.0).all()) throw Error(ErrorCode::ConfigError, "projection vector is zero");
    }
    for (double l : nominal_levels)
        if (!(l > 0.0 && l < 1.0)) throw Error(ErrorCode::ConfigError, "nominal levels must lie in (0, 1)");
}

std::vector<double> CoverageReport::normalized(std::size_t projection_index) const {
    const auto& values = projected.at(projection_index);
    std::vector<double> out(values.size());
    for (std::size_t r = 0; r < values.size(); ++r)
        out[r] = (values[r] - projected_truth[projection_index]) / projection_sd[projection_index];
    return out;
}

CoverageReport run_coverage(const MonteCarloConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.dgp.n;
    const std::size_t p = cfg.dgp.p;
    CoverageReport report;
    report.seed = cfg.dgp.seed;
    report.reps = cfg.reps;
    report.projections = cfg.projections.empty() ? default_projections(p) : cfg.projections;
    report.levels = cfg.nominal_levels.empty() ? default_levels() : cfg.nominal_levels;

    const CounterRng master(cfg.dgp.seed);
    std::vector<Eigen::VectorXd> estimates(cfg.reps);
    std::vector<char> converged(cfg.reps, 0);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
        CounterRng rng = master.split(r);
        const Draw draw = generate_binary_choice(n, p, cfg.dgp.rho, rng);
        FitOptions opts;
        opts.init = fit_init(draw, cfg.init_at_truth);
        const FitResult res = fit(draw.sample, cfg.estimator, opts);
        estimates[r] = res.theta_hat;
        converged[r] = res.converged ? 1 : 0;
    });
    report.unconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));

    const Eigen::VectorXd theta0 = true_theta(p);
    for (std::size_t g = 0; g < report.projections.size(); ++g) {
        const Eigen::VectorXd& gamma = report.projections[g];
        std::vector<double> values(cfg.reps);
        for (std::size_t r = 0; r < cfg.reps; ++r) values[r] = gamma.dot(estimates[r]);
        const double truth = gamma.dot(theta0);
        const double sd = std::sqrt(sample_variance(values));
        report.projected.push_back(values);
        report.projected_truth.push_back(truth);
        report.projection_sd.push_back(sd);

        for (double level : report.levels) {
            const double half = normal_quantile(0.5 * (1.0 + level)) * sd;
            std::size_t hits = 0;
            for (double v : values)
                if (std::abs(v - truth) <= half) ++hits;
            CoverageRow row;
            row.n = n;
            row.p = p;
            row.nominal_level = level;
            row.projection_id = g + 1;
            row.empirical_coverage = static_cast<double>(hits) / static_cast<double>(cfg.reps);
            row.mc_standard_error = std::sqrt(row.empirical_coverage * (1.0 - row.empirical_coverage) /
                                              static_cast<double>(cfg.reps));
            report.rows.push_back(row);
        }
    }
    report.estimates = std::move(estimates);
    return report;
}

// ---------------------------------------------------------------------------

std::vector<double> default_multipliers() { return {1.1, 0.9, 0.7, 0.5, 0.3, 0.1}; }

void MaeConfig::validate() const {
    if (grid.empty()) throw Error(ErrorCode::ConfigError, "MAE grid is empty");
    for (const auto& [n, p] : grid) DgpConfig{n, p, 0.5, seed}.validate();
    for (double m : multipliers)
        if (!(m > 0.0)) throw Error(ErrorCode::ConfigError, "multipliers must be positive");
    if (reps < 1) throw Error(ErrorCode::ConfigError, "reps must be positive");
    if (truth_reps < 2) throw Error(ErrorCode::ConfigError, "truth_reps must be at least 2");
    if (truth_reps < reps) throw Error(ErrorCode::ConfigError, "truth_reps must not be smaller than reps");
}

MaeReport run_mae(const MaeConfig& cfg) {
    cfg.validate();
    const std::vector<double> multipliers = cfg.multipliers.empty() ? default_multipliers() : cfg.multipliers;
    MaeReport report;
    report.seed = cfg.seed;
    report.reps = cfg.reps;
    report.truth_reps = cfg.truth_reps;
    {
        std::ostringstream s;
        s << "sigma2_true = n * sample variance of gamma'theta_hat over " << cfg.truth_reps
          << " independent MRC fits (init at truth), gamma = (p^-1/2, ..., p^-1/2); "
             "estimate = gamma' sandwich gamma; mae = median |estimate - sigma2_true|";
        report.truth_oracle = s.str();
    }

    const CounterRng master(cfg.seed);
    const EstimatorSpec spec = EstimatorSpec::mrc();
    for (const auto& [n, p] : cfg.grid) {
        const CounterRng cell = master.split(cell_tag(n, p));
        const CounterRng truth_stream = cell.split(kTruthStream);
        const CounterRng estimate_stream = cell.split(kEstimateStream);
        const Eigen::VectorXd gamma =
            Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), 1.0 / std::sqrt(static_cast<double>(p)));

        std::vector<double> truth_proj(cfg.truth_reps);
        parallel_for(cfg.truth_reps, cfg.threads, [&](std::size_t r) {
            CounterRng rng = truth_stream.split(r);
            const Draw draw = generate_binary_choice(n, p, 0.5, rng);
            FitOptions opts;
            opts.init = draw.theta0;
            truth_proj[r] = gamma.dot(fit(draw.sample, spec, opts).theta_hat);
        });
        const double sigma2_true = static_cast<double>(n) * sample_variance(truth_proj);

        // estimate[r][m] is NaN when V_hat was singular.
        std::vector<std::vector<double>> estimate(cfg.reps, std::vector<double>(multipliers.size()));
        parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
            CounterRng rng = estimate_stream.split(r);
            const Draw draw = generate_binary_choice(n, p, 0.5, rng);
            FitOptions opts;
            opts.init = draw.theta0;
            const Eigen::VectorXd theta_hat = fit(draw.sample, spec, opts).theta_hat;
            for (std::size_t m = 0; m < multipliers.size(); ++m) {
                try {
                    const CovarianceEstimate cov =
                        estimate_covariance(draw.sample, spec, theta_hat, n_only_step(n, multipliers[m]));
                    estimate[r][m] = gamma.dot(cov.sandwich * gamma);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::SingularHessian) throw;
                    estimate[r][m] = std::numeric_limits<double>::quiet_NaN();
                }
            }
        });

        for (std::size_t m = 0; m < multipliers.size(); ++m) {
            MaeRow row;
            row.n = n;
            row.p = p;
            row.multiplier = multipliers[m];
            row.epsilon = n_only_step(n, multipliers[m]);
            row.sigma2_true = sigma2_true;
            std::vector<double> errors;
            for (std::size_t r = 0; r < cfg.reps; ++r) {
                if (std::isnan(estimate[r][m])) {
                    ++row.excluded;
                    continue;
                }
                errors.push_back(std::abs(estimate[r][m] - sigma2_true));
            }
            row.used = errors.size();
            row.failed = errors.empty() ||
                         static_cast<double>(row.excluded) > 0.2 * static_cast<double>(cfg.reps);
            row.mae = row.failed ? std::numeric_limits<double>::quiet_NaN() : median(errors);
            row.mae_per_n = row.mae / static_cast<double>(n);
            report.rows.push_back(row);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

double silverman_bandwidth(std::span<const double> samples) {
    if (samples.size() < 2) throw Error(ErrorCode::DegenerateSample, "need at least 2 samples");
    const double sd = std::sqrt(sample_variance(samples));
    if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateSample, "sample standard deviation is zero");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<double> kde(std::span<const double> samples, std::span<const double> grid) {
    const double h = silverman_bandwidth(samples);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> density(grid.size());
    std::vector<double> terms(samples.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double u = (grid[g] - samples[i]) / h;
            terms[i] = std::exp(-0.5 * u * u);
        }
        density[g] = pairwise_sum(terms) * norm;
    }
    return density;
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < points; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

TestResult ks_normal(std::span<const double> samples) {
    if (samples.size() < 2) throw Error(ErrorCode::DegenerateSample, "need at least 2 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw Error(ErrorCode::DegenerateSample, "all samples are equal");
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = normal_cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - cdf, cdf - static_cast<double>(i) / m});
    }
    // Kolmogorov tail with Stephens' small-sample scaling.
    const double root = std::sqrt(m);
    const double lambda = (root + 0.12 + 0.11 / root) * d;
    double p = 0.0;
    if (lambda < 0.2) {
        p = 1.0;
    } else {
        double sign = 1.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
            p += term;
            if (std::abs(term) < 1e-16) break;
            sign = -sign;
        }
        p = std::clamp(2.0 * p, 0.0, 1.0);
    }
    return {d, p};
}

TestResult jarque_bera(std::span<const double> samples) {
    if (samples.size() < 2) throw Error(ErrorCode::DegenerateSample, "need at least 2 samples");
    const double mean = sample_mean(samples);
    std::vector<double> c2(samples.size()), c3(samples.size()), c4(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - mean;
        c2[i] = d * d;
        c3[i] = d * d * d;
        c4[i] = d * d * d * d;
    }
    const double m = static_cast<double>(samples.size());
    const double m2 = pairwise_sum(c2) / m;
    if (!(m2 > 0.0)) throw Error(ErrorCode::DegenerateSample, "sample variance is zero");
    const double skew = (pairwise_sum(c3) / m) / std::pow(m2, 1.5);
    const double kurt = (pairwise_sum(c4) / m) / (m2 * m2);
    const double jb = m / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    return {jb, std::exp(-0.5 * jb)};
}

std::map<std::string, TestResult> normality_tests(std::span<const double> samples) {
    return {{"kolmogorov_smirnov", ks_normal(samples)}, {"jarque_bera", jarque_bera(samples)}};
}

// ---------------------------------------------------------------------------

void RateConfig::validate() const {
    if (n_grid.size() < 3) throw Error(ErrorCode::ConfigError, "rate check needs at least 3 sample sizes");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        DgpConfig{n_grid[i], p, 0.5, seed}.validate();
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw Error(ErrorCode::ConfigError, "n grid must be strictly increasing");
    }
    if (reps < 2) throw Error(ErrorCode::ConfigError, "reps must be at least 2");
    if (!draw && (estimator.kind == EstimatorKind::KT || estimator.kind == EstimatorKind::AS))
        throw Error(ErrorCode::ConfigError, "the binary choice design has no censoring or W columns");
}

RateFit run_rate_check(const RateConfig& cfg) {
    cfg.validate();
    const CounterRng master(cfg.seed);
    const DrawFunction draw_fn = cfg.draw ? cfg.draw : DrawFunction([](std::size_t n, std::size_t p, CounterRng& rng) {
        return generate_binary_choice(n, p, 0.5, rng);
    });

    RateFit out;
    std::vector<double> log_n, log_rmse, log_se;
    bool degenerate = false;
    for (std::size_t n : cfg.n_grid) {
        const CounterRng stream = master.split(n);
        std::vector<double> sq_err(cfg.reps);
        std::vector<char> stuck(cfg.reps, 0);
        parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
            CounterRng rng = stream.split(r);
            const Draw draw = draw_fn(n, cfg.p, rng);
            FitOptions opts;
            opts.init = fit_init(draw, cfg.init_at_truth);
            const FitResult res = fit(draw.sample, cfg.estimator, opts);
            sq_err[r] = (res.theta_hat - draw.theta0).squaredNorm();
            stuck[r] = res.theta_hat == opts.init ? 1 : 0;
        });
        RatePoint point;
        point.n = n;
        point.stuck = static_cast<std::size_t>(std::count(stuck.begin(), stuck.end(), 1));
        const double mse = sample_mean(sq_err);
        point.rmse = std::sqrt(mse);
        if (mse > 0.0) {
            // Var(log sqrt(MSE)) ~ Var(sq_err) / (4 reps MSE^2).
            point.log_rmse_se = std::sqrt(sample_variance(sq_err) / static_cast<double>(cfg.reps)) / (2.0 * mse);
            log_n.push_back(std::log(static_cast<double>(n)));
            log_rmse.push_back(std::log(point.rmse));
            log_se.push_back(point.log_rmse_se);
        } else {
            degenerate = true;
        }
        if (point.stuck == cfg.reps)
            out.warnings.push_back("every fit at n=" + std::to_string(n) +
                                   " returned its initial value; the design looks misconfigured");
        out.points.push_back(point);
    }

    if (degenerate || log_n.size() < 2) {
        out.warnings.push_back("RMSE is zero at some n; slope set to 0");
        return out;
    }
    const double xbar = sample_mean(log_n);
    const double ybar = sample_mean(log_rmse);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sxx += (log_n[i] - xbar) * (log_n[i] - xbar);
        sxy += (log_n[i] - xbar) * (log_rmse[i] - ybar);
    }
    out.slope = sxy / sxx;
    out.intercept = ybar - out.slope * xbar;
    double var = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        const double w = (log_n[i] - xbar) / sxx;
        var += w * w * log_se[i] * log_se[i];
    }
    out.slope_se = std::sqrt(var);
    if (std::abs(out.slope) < 2.0 * out.slope_se || std::abs(out.slope) < 0.05)
        out.warnings.push_back("slope is indistinguishable from zero; the design looks misconfigured");
    return out;
}

}  // namespace rankest
