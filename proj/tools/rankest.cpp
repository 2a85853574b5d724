// rankest command-line front end.

#include "io.hpp"

#include "rankest/covariance.hpp"
#include "rankest/estimators.hpp"
#include "rankest/parallel.hpp"
#include "rankest/simlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace {

using rankest::Error;
using rankest::ErrorCode;
using json = nlohmann::ordered_json;
namespace io = rankest::io;

constexpr const char* kVersion = "0.1.0";

// A flag value plus the option that set it, so a config file can fill the
// gaps: flag > file > default.
template <class T>
struct Flag {
    T value{};
    CLI::Option* opt = nullptr;
};

template <class T>
void add(CLI::App* app, Flag<T>& f, const std::string& name, const std::string& help) {
    f.opt = app->add_option("--" + name, f.value, help);
}

struct Resolver {
    json file = json::object();
    json echo = json::object();

    bool given(const CLI::Option* opt) const { return opt && opt->count() > 0; }

    template <class T>
    T get(const Flag<T>& f, const std::string& key, const T& fallback) {
        T v = fallback;
        if (given(f.opt)) {
            v = f.value;
        } else if (file.contains(key)) {
            try {
                v = file.at(key).get<T>();
            } catch (const json::exception&) {
                throw Error(ErrorCode::ConfigError, "config key '" + key + "' has the wrong type");
            }
        }
        echo[key] = v;
        return v;
    }

    // Required value with no default.
    template <class T>
    T need(const Flag<T>& f, const std::string& key) {
        if (!given(f.opt) && !file.contains(key)) throw Error(ErrorCode::ConfigError, "--" + key + " is required");
        return get(f, key, T{});
    }

    bool flag(const CLI::Option* opt, const std::string& key) {
        bool v = false;
        if (given(opt))
            v = true;
        else if (file.contains(key) && file.at(key).is_boolean())
            v = file.at(key).get<bool>();
        echo[key] = v;
        return v;
    }

    // Numeric list given as "a,b,c" on the command line or as an array in the file.
    std::vector<double> list(const Flag<std::string>& f, const std::string& key, std::vector<double> fallback) {
        std::vector<double> v = std::move(fallback);
        if (given(f.opt)) {
            v = io::parse_list(f.value);
        } else if (file.contains(key)) {
            const json& j = file.at(key);
            if (j.is_string())
                v = io::parse_list(j.get<std::string>());
            else if (j.is_array() && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); }))
                v = j.get<std::vector<double>>();
            else
                throw Error(ErrorCode::ConfigError, "config key '" + key + "' must be a list of numbers");
        }
        echo[key] = v;
        return v;
    }
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    // A metadata sidecar is accepted as-is and replays its resolved config.
    if (j.is_object() && j.contains("config")) j = j.at("config");
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config file must hold a JSON object");
    return j;
}

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json metadata(const std::string& command, const json& config) {
    json meta;
    meta["command"] = command;
    meta["version"] = kVersion;
    meta["config"] = config;
    return meta;
}

void write_json(const std::string& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

std::string sidecar(const std::string& out) { return out + ".meta.json"; }

rankest::EstimatorSpec estimator_spec(Resolver& r, const Flag<std::string>& name, const Flag<double>& lo,
                                      const Flag<double>& hi, const Flag<double>& c, const Flag<double>& delta) {
    rankest::EstimatorSpec spec;
    try {
        spec.kind = rankest::parse_estimator_kind(r.get(name, "estimator", std::string("mrc")));
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    if (spec.kind == rankest::EstimatorKind::CS) {
        spec.trim_lo = r.get(lo, "trim-lo", spec.trim_lo);
        spec.trim_hi = r.get(hi, "trim-hi", spec.trim_hi);
    }
    if (spec.kind == rankest::EstimatorKind::AS) {
        spec.bandwidth_c = r.get(c, "bandwidth-c", spec.bandwidth_c);
        spec.bandwidth_delta = r.get(delta, "bandwidth-delta", spec.bandwidth_delta);
        r.echo["kernel"] = spec.kernel_name;
    }
    return spec;
}

bool init_at_truth(Resolver& r, const Flag<std::string>& f) {
    const std::string v = r.get(f, "init", std::string("truth"));
    if (v != "truth" && v != "zero") throw Error(ErrorCode::ConfigError, "--init must be truth or zero");
    return v == "truth";
}

std::size_t threads_of(const Flag<std::size_t>& f) {
    return rankest::resolve_threads(f.opt && f.opt->count() ? std::optional<std::size_t>(f.value) : std::nullopt);
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    Flag<std::string> config, data, estimator, init, out;
    Flag<double> trim_lo, trim_hi, bw_c, bw_delta, epsilon, half_width;
    Flag<int> max_sweeps;
    Flag<std::vector<std::string>> project;
    Flag<std::string> levels;
    CLI::Option* cov = nullptr;
    Flag<std::size_t> threads;
};

int run_estimate(const EstimateArgs& a) {
    Resolver r;
    r.file = load_config(a.config.value);
    const std::string data = r.need(a.data, "data");
    const std::string out = r.need(a.out, "out");
    const rankest::EstimatorSpec spec = estimator_spec(r, a.estimator, a.trim_lo, a.trim_hi, a.bw_c, a.bw_delta);
    const rankest::Sample sample = io::read_sample(data);
    rankest::validate_sample(sample, spec);
    const std::size_t n = sample.n();
    const std::size_t p = sample.p();

    rankest::FitOptions opts;
    {
        std::vector<double> init = r.list(a.init, "init", std::vector<double>(p, 0.0));
        if (init.size() != p) throw Error(ErrorCode::DimensionMismatch, "--init needs " + std::to_string(p) + " values");
        opts.init = to_vector(init);
    }
    opts.max_sweeps = r.get(a.max_sweeps, "max-sweeps", opts.max_sweeps);
    opts.domain = rankest::SearchDomain::around(opts.init, r.get(a.half_width, "half-width", 10.0));
    std::cerr << "estimate: " << rankest::to_string(spec.kind) << " on n=" << n << " p=" << p << "\n";
    const rankest::FitResult fit = rankest::fit(sample, spec, opts);

    // Projections: repeated --project flags, or an array of arrays in the file.
    std::vector<std::vector<double>> projections;
    if (r.given(a.project.opt)) {
        for (const auto& s : a.project.value) projections.push_back(io::parse_list(s));
    } else if (r.file.contains("project")) {
        try {
            projections = r.file.at("project").get<std::vector<std::vector<double>>>();
        } catch (const json::exception&) {
            throw Error(ErrorCode::ConfigError, "config key 'project' must be a list of number lists");
        }
    }
    r.echo["project"] = projections;
    const std::vector<double> levels = r.list(a.levels, "levels", {0.95});
    const bool want_cov = r.flag(a.cov, "cov") || !projections.empty();

    json result = metadata("estimate", json::object());
    result["n"] = n;
    result["p"] = p;
    result["theta_hat"] = to_json(fit.theta_hat);
    result["objective"] = {{"value", fit.objective.value}, {"num_pairs", fit.objective.num_pairs}};
    if (fit.objective.raw_count) result["objective"]["raw_count"] = *fit.objective.raw_count;
    result["converged"] = fit.converged;
    result["sweeps"] = fit.sweeps_used;

    if (want_cov) {
        const double eps = r.get(a.epsilon, "epsilon", rankest::default_step(n, p));
        const rankest::CovarianceEstimate cov =
            rankest::estimate_covariance(sample, spec, fit.theta_hat, eps, threads_of(a.threads));
        result["covariance"] = {{"delta", to_json(cov.delta_hat)},
                                {"v", to_json(cov.v_hat)},
                                {"sandwich", to_json(cov.sandwich)},
                                {"epsilon", cov.epsilon},
                                {"v_condition", cov.v_condition},
                                {"v_asymmetry", cov.v_asymmetry}};
        json cis = json::array();
        for (const auto& g : projections) {
            if (g.size() != p)
                throw Error(ErrorCode::DimensionMismatch, "--project needs " + std::to_string(p) + " values");
            for (double level : levels) {
                const rankest::Interval ci = rankest::projection_ci(fit.theta_hat, cov, to_vector(g), n, level);
                cis.push_back({{"gamma", g}, {"level", level}, {"lo", ci.lo}, {"hi", ci.hi}});
            }
        }
        if (!projections.empty()) result["ci"] = std::move(cis);
    }
    result["config"] = r.echo;
    write_json(out, result);
    std::cout << out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct CoverageArgs {
    Flag<std::string> config, levels, estimator, init, estimates, out;
    Flag<std::size_t> n, p, reps, threads;
    Flag<std::uint64_t> seed;
    Flag<double> rho, trim_lo, trim_hi;
};

int run_coverage(const CoverageArgs& a) {
    Resolver r;
    r.file = load_config(a.config.value);
    rankest::MonteCarloConfig cfg;
    cfg.dgp.n = r.need(a.n, "n");
    cfg.dgp.p = r.need(a.p, "p");
    cfg.reps = r.need(a.reps, "reps");
    cfg.dgp.seed = r.need(a.seed, "seed");
    cfg.dgp.rho = r.get(a.rho, "rho", cfg.dgp.rho);
    cfg.nominal_levels = r.list(a.levels, "levels", rankest::default_levels());
    cfg.estimator = estimator_spec(r, a.estimator, a.trim_lo, a.trim_hi, {}, {});
    if (cfg.estimator.kind != rankest::EstimatorKind::MRC && cfg.estimator.kind != rankest::EstimatorKind::CS)
        throw Error(ErrorCode::ConfigError, "the binary choice design supports mrc and cs only");
    cfg.init_at_truth = init_at_truth(r, a.init);
    const std::string estimates = r.get(a.estimates, "estimates", std::string());
    const std::string out = r.need(a.out, "out");
    cfg.threads = threads_of(a.threads);

    std::cerr << "coverage: n=" << cfg.dgp.n << " p=" << cfg.dgp.p << " reps=" << cfg.reps << "\n";
    const rankest::CoverageReport rep = rankest::run_coverage(cfg);

    std::string csv = "n,p,projection,nominal_level,coverage,mc_standard_error\n";
    for (const auto& row : rep.rows)
        csv += std::to_string(row.n) + "," + std::to_string(row.p) + "," + std::to_string(row.projection_id) + "," +
               io::fmt(row.nominal_level) + "," + io::fmt(row.empirical_coverage) + "," +
               io::fmt(row.mc_standard_error) + "\n";

    json meta = metadata("simulate coverage", r.echo);
    meta["sd_source"] = rep.sd_source;
    json proj = json::array();
    for (std::size_t g = 0; g < rep.projections.size(); ++g)
        proj.push_back({{"id", g + 1},
                        {"gamma", to_json(rep.projections[g])},
                        {"truth", rep.projected_truth[g]},
                        {"simulation_sd", rep.projection_sd[g]}});
    meta["projections"] = std::move(proj);
    meta["unconverged"] = rep.unconverged;

    if (!estimates.empty()) {
        std::vector<std::vector<double>> cols;
        std::string text;
        for (std::size_t g = 0; g < rep.projections.size(); ++g) {
            cols.push_back(rep.normalized(g));
            text += (g ? ",proj" : "proj") + std::to_string(g + 1);
        }
        text += "\n";
        for (std::size_t i = 0; i < rep.reps; ++i) {
            for (std::size_t g = 0; g < cols.size(); ++g) text += (g ? "," : "") + io::fmt(cols[g][i]);
            text += "\n";
        }
        io::write_atomic(estimates, text);
    }
    io::write_atomic(out, csv);
    write_json(sidecar(out), meta);
    std::cout << out << "\n" << sidecar(out) << "\n";
    if (!estimates.empty()) std::cout << estimates << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::size_t, std::size_t>> parse_grid(const std::string& text) {
    std::vector<std::pair<std::size_t, std::size_t>> grid;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto colon = cell.find(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument(cell);
            std::size_t used = 0;
            const std::string ns = cell.substr(0, colon), ps = cell.substr(colon + 1);
            const unsigned long n = std::stoul(ns, &used);
            if (used != ns.size()) throw std::invalid_argument(cell);
            const unsigned long p = std::stoul(ps, &used);
            if (used != ps.size()) throw std::invalid_argument(cell);
            grid.emplace_back(n, p);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, "grid entries look like n:p, got '" + cell + "'");
        }
    }
    return grid;
}

struct MaeArgs {
    Flag<std::string> config, grid, multipliers, out;
    Flag<std::size_t> reps, truth_reps, threads;
    Flag<std::uint64_t> seed;
};

int run_mae(const MaeArgs& a) {
    Resolver r;
    r.file = load_config(a.config.value);
    rankest::MaeConfig cfg;
    cfg.grid = parse_grid(r.need(a.grid, "grid"));
    cfg.multipliers = r.list(a.multipliers, "multipliers", rankest::default_multipliers());
    cfg.reps = r.need(a.reps, "reps");
    cfg.truth_reps = r.need(a.truth_reps, "truth-reps");
    cfg.seed = r.need(a.seed, "seed");
    const std::string out = r.need(a.out, "out");
    cfg.threads = threads_of(a.threads);
    cfg.validate();

    std::cerr << "mae: " << cfg.grid.size() << " cells, reps=" << cfg.reps << " truth_reps=" << cfg.truth_reps << "\n";
    const rankest::MaeReport rep = rankest::run_mae(cfg);
    std::string csv = "n,p,multiplier,epsilon,mae,mae_per_n,sigma2_true,used,excluded,failed\n";
    for (const auto& row : rep.rows)
        csv += std::to_string(row.n) + "," + std::to_string(row.p) + "," + io::fmt(row.multiplier) + "," +
               io::fmt(row.epsilon) + "," + io::fmt(row.mae) + "," + io::fmt(row.mae_per_n) + "," +
               io::fmt(row.sigma2_true) + "," + std::to_string(row.used) + "," + std::to_string(row.excluded) + "," +
               (row.failed ? "1" : "0") + "\n";
    json meta = metadata("simulate mae", r.echo);
    meta["truth_oracle"] = rep.truth_oracle;
    io::write_atomic(out, csv);
    write_json(sidecar(out), meta);
    std::cout << out << "\n" << sidecar(out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct RatesArgs {
    Flag<std::string> config, n_grid, estimator, init, out;
    Flag<std::size_t> p, reps, threads;
    Flag<std::uint64_t> seed;
    Flag<double> trim_lo, trim_hi;
};

int run_rates(const RatesArgs& a) {
    Resolver r;
    r.file = load_config(a.config.value);
    rankest::RateConfig cfg;
    for (double v : r.list(a.n_grid, "n-grid", {})) {
        if (!(v >= 2.0) || v != std::floor(v)) throw Error(ErrorCode::ConfigError, "n-grid needs integers >= 2");
        cfg.n_grid.push_back(static_cast<std::size_t>(v));
    }
    cfg.p = r.need(a.p, "p");
    cfg.reps = r.need(a.reps, "reps");
    cfg.seed = r.need(a.seed, "seed");
    cfg.estimator = estimator_spec(r, a.estimator, a.trim_lo, a.trim_hi, {}, {});
    cfg.init_at_truth = init_at_truth(r, a.init);
    const std::string out = r.need(a.out, "out");
    cfg.threads = threads_of(a.threads);

    std::cerr << "rates: " << cfg.n_grid.size() << " sample sizes, reps=" << cfg.reps << "\n";
    const rankest::RateFit fit = rankest::run_rate_check(cfg);
    std::string csv = "row,n,value,std_error,stuck\n";
    for (const auto& pt : fit.points)
        csv += "rmse," + std::to_string(pt.n) + "," + io::fmt(pt.rmse) + "," + io::fmt(pt.log_rmse_se) + "," +
               std::to_string(pt.stuck) + "\n";
    csv += "slope,," + io::fmt(fit.slope) + "," + io::fmt(fit.slope_se) + ",\n";
    csv += "intercept,," + io::fmt(fit.intercept) + ",,\n";
    json meta = metadata("simulate rates", r.echo);
    meta["warnings"] = fit.warnings;
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
    io::write_atomic(out, csv);
    write_json(sidecar(out), meta);
    std::cout << out << "\n" << sidecar(out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct DensityArgs {
    Flag<std::string> config, samples, column, out;
    Flag<std::size_t> points;
    Flag<double> lo, hi;
};

int run_density(const DensityArgs& a) {
    Resolver r;
    r.file = load_config(a.config.value);
    const std::string path = r.need(a.samples, "samples");
    const std::string column = r.get(a.column, "column", std::string());
    const std::size_t points = r.get(a.points, "grid-points", std::size_t{201});
    const double lo = r.get(a.lo, "grid-lo", -4.0);
    const double hi = r.get(a.hi, "grid-hi", 4.0);
    const std::string out = r.need(a.out, "out");
    if (points < 2) throw Error(ErrorCode::ConfigError, "--grid-points must be at least 2");
    if (!(lo < hi)) throw Error(ErrorCode::ConfigError, "--grid-lo must be below --grid-hi");

    const std::vector<double> x = io::read_column(path, column);
    const double h = rankest::silverman_bandwidth(x);
    const std::vector<double> grid = rankest::linspace(lo, hi, points);
    const std::vector<double> f = rankest::kde(x, grid);
    std::string csv = "x,density,normal_density\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double phi = std::exp(-0.5 * grid[i] * grid[i]) / std::sqrt(2.0 * std::numbers::pi);
        csv += io::fmt(grid[i]) + "," + io::fmt(f[i]) + "," + io::fmt(phi) + "\n";
    }
    json meta = metadata("density", r.echo);
    meta["m"] = x.size();
    meta["bandwidth"] = h;
    for (const auto& [name, t] : rankest::normality_tests(x))
        meta["tests"][name] = {{"statistic", t.statistic}, {"p_value", t.p_value}};
    io::write_atomic(out, csv);
    write_json(sidecar(out), meta);
    std::cout << out << "\n" << sidecar(out) << "\n";
    return 0;
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError:
        case ErrorCode::ParseError: return 2;
        case ErrorCode::SingularHessian: return 4;
        default: return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank estimators, covariance estimation and Monte Carlo experiments"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    EstimateArgs ea;
    auto* est = app.add_subcommand("estimate", "Fit one estimator to a CSV data set");
    add(est, ea.config, "config", "JSON config file (flags take precedence)");
    add(est, ea.data, "data", "CSV with columns y, x1..xK and optional r, v, w");
    add(est, ea.estimator, "estimator", "mrc | cs | kt | as");
    add(est, ea.trim_lo, "trim-lo", "CS trimming lower bound");
    add(est, ea.trim_hi, "trim-hi", "CS trimming upper bound");
    add(est, ea.bw_c, "bandwidth-c", "AS bandwidth constant c in b = c n^-delta");
    add(est, ea.bw_delta, "bandwidth-delta", "AS bandwidth exponent delta");
    add(est, ea.init, "init", "starting theta, comma separated");
    add(est, ea.max_sweeps, "max-sweeps", "coordinate sweep limit");
    add(est, ea.half_width, "half-width", "search box half width around the start");
    ea.cov = est->add_flag("--cov", "estimate the asymptotic covariance");
    add(est, ea.epsilon, "epsilon", "finite-difference step (default (p/n)^(1/6))");
    ea.project.opt = est->add_option("--project", ea.project.value, "projection gamma for a confidence interval");
    add(est, ea.levels, "levels", "confidence levels, comma separated");
    add(est, ea.threads, "threads", "worker threads");
    add(est, ea.out, "out", "output JSON");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiments on the binary choice design");
    sim->require_subcommand(1);

    CoverageArgs ca;
    auto* cov = sim->add_subcommand("coverage", "coverage of simulation-SD confidence intervals");
    add(cov, ca.config, "config", "JSON config file (flags take precedence)");
    add(cov, ca.n, "n", "sample size");
    add(cov, ca.p, "p", "number of free coefficients");
    add(cov, ca.reps, "reps", "replications");
    add(cov, ca.seed, "seed", "master seed");
    add(cov, ca.rho, "rho", "AR(1) correlation of the covariates");
    add(cov, ca.levels, "levels", "nominal levels, comma separated");
    add(cov, ca.estimator, "estimator", "mrc | cs");
    add(cov, ca.trim_lo, "trim-lo", "CS trimming lower bound");
    add(cov, ca.trim_hi, "trim-hi", "CS trimming upper bound");
    add(cov, ca.init, "init", "truth | zero");
    add(cov, ca.estimates, "estimates", "also write normalized projected estimates here");
    add(cov, ca.threads, "threads", "worker threads");
    add(cov, ca.out, "out", "output CSV");

    MaeArgs ma;
    auto* mae = sim->add_subcommand("mae", "median absolute error of the covariance estimator");
    add(mae, ma.config, "config", "JSON config file (flags take precedence)");
    add(mae, ma.grid, "grid", "cells as n1:p1,n2:p2,...");
    add(mae, ma.multipliers, "multipliers", "step multipliers m in eps = m n^(-1/6)");
    add(mae, ma.reps, "reps", "replications per cell");
    add(mae, ma.truth_reps, "truth-reps", "replications for the variance target");
    add(mae, ma.seed, "seed", "master seed");
    add(mae, ma.threads, "threads", "worker threads");
    add(mae, ma.out, "out", "output CSV");

    RatesArgs ra;
    auto* rates = sim->add_subcommand("rates", "log-log RMSE slope across sample sizes");
    add(rates, ra.config, "config", "JSON config file (flags take precedence)");
    add(rates, ra.n_grid, "n-grid", "sample sizes, comma separated");
    add(rates, ra.p, "p", "number of free coefficients");
    add(rates, ra.reps, "reps", "replications per sample size");
    add(rates, ra.seed, "seed", "master seed");
    add(rates, ra.estimator, "estimator", "mrc | cs");
    add(rates, ra.trim_lo, "trim-lo", "CS trimming lower bound");
    add(rates, ra.trim_hi, "trim-hi", "CS trimming upper bound");
    add(rates, ra.init, "init", "truth | zero");
    add(rates, ra.threads, "threads", "worker threads");
    add(rates, ra.out, "out", "output CSV");

    DensityArgs da;
    auto* den = app.add_subcommand("density", "kernel density and normality tests for normalized estimates");
    add(den, da.config, "config", "JSON config file (flags take precedence)");
    add(den, da.samples, "samples", "CSV of normalized estimates");
    add(den, da.column, "column", "column to use when the file has several");
    add(den, da.points, "grid-points", "density grid size");
    add(den, da.lo, "grid-lo", "left end of the density grid");
    add(den, da.hi, "grid-hi", "right end of the density grid");
    add(den, da.out, "out", "output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*est) return run_estimate(ea);
        if (*cov) return run_coverage(ca);
        if (*mae) return run_mae(ma);
        if (*rates) return run_rates(ra);
        if (*den) return run_density(da);
    } catch (const Error& e) {
        std::cerr << "rankest: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "rankest: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
