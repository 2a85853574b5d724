#include "oracles.hpp"

#include "rankest/covariance.hpp"
#include "rankest/ustat.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace rankest;

namespace {

double max_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return ((a - b).array().abs() / b.array().abs().max(1.0)).maxCoeff();
}

}  // namespace

TEST_CASE("step sizes") {
    CHECK(default_step(100, 1) == doctest::Approx(0.4641588833612779).epsilon(1e-15));
    CHECK(std::pow(default_step(100, 1), 6.0) == doctest::Approx(0.01).epsilon(1e-13));
    CHECK(default_step(7, 7) == 1.0);
    CHECK(n_only_step(729, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(n_only_step(400, 0.7) == doctest::Approx(0.7 * std::pow(400.0, -1.0 / 6.0)));
    CHECK_THROWS_AS(default_step(0, 1), Error);
    CHECK_THROWS_AS(default_step(10, 1, -1.0), Error);
}

TEST_CASE("matches the naive double loop") {
    CounterRng rng(21);
    for (auto kind : {EstimatorKind::MRC, EstimatorKind::CS, EstimatorKind::KT, EstimatorKind::AS}) {
        const std::size_t p = kind == EstimatorKind::MRC ? 1 : 2;
        const Sample s = oracle::random_sample(rng, 60, p, kind);
        const auto spec = oracle::spec_for(kind);
        const Eigen::VectorXd th = oracle::random_theta(rng, p);
        const double eps = default_step(60, p);
        const auto naive = oracle::derivatives(s, spec, th, eps);
        const auto est = numerical_derivatives(
            [&](const Eigen::VectorXd& t) {
                const Eigen::VectorXd u = linear_index(s, Beta(t));
                return tau_all(PairKernel(s, spec), {u.data(), static_cast<std::size_t>(u.size())});
            },
            th, eps);
        CHECK(max_rel(est.delta_hat, naive.delta) <= 1e-12);
        CHECK(max_rel(est.v_hat, 0.5 * (naive.v + naive.v.transpose())) <= 1e-12);
        CHECK(est.delta_hat(0, 0) >= 0.0);
        CHECK(est.v_asymmetry <= 1e-12);
        CHECK(est.v_hat == est.v_hat.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.delta_hat);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("constant kernel gives zero Delta and a singular V") {
    CounterRng rng(22);
    Sample s = oracle::random_sample(rng, 30, 2, EstimatorKind::MRC);
    s.y.setConstant(0.0);
    const Eigen::Vector2d th(0.1, 0.2);
    const auto nd = numerical_derivatives(
        [&](const Eigen::VectorXd& t) {
            const Eigen::VectorXd u = linear_index(s, Beta(t));
            return tau_all(PairKernel(s, EstimatorSpec::mrc()), {u.data(), 30});
        },
        th, 0.3);
    CHECK(nd.delta_hat.isZero(0.0));
    try {
        estimate_covariance(s, EstimatorSpec::mrc(), th, 0.3);
        FAIL("expected SingularHessian");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularHessian);
    }
}

TEST_CASE("invalid steps") {
    CounterRng rng(23);
    const Sample s = oracle::random_sample(rng, 20, 1, EstimatorKind::MRC);
    for (double e : {0.0, -0.1, std::numeric_limits<double>::infinity()}) {
        try {
            estimate_covariance(s, EstimatorSpec::mrc(), Eigen::VectorXd::Zero(1), e);
            FAIL("expected InvalidStep");
        } catch (const Error& err) {
            CHECK(err.code() == ErrorCode::InvalidStep);
        }
    }
}

TEST_CASE("centering constants cancel bit for bit") {
    CounterRng rng(24);
    const Sample s = oracle::random_sample(rng, 64, 2, EstimatorKind::MRC);
    const Eigen::Vector2d th(0.4, -0.3);
    auto with_offset = [&](double c) {
        return [&s, c](const Eigen::VectorXd& t) {
            const Eigen::VectorXd u = linear_index(s, Beta(t));
            auto tau = tau_all(PairKernel(s, EstimatorSpec::mrc()), {u.data(), 64});
            for (auto& v : tau) v += c;
            return tau;
        };
    };
    const auto a = numerical_derivatives(with_offset(1.0), th, 0.5);
    const auto b = numerical_derivatives(with_offset(3.0), th, 0.5);
    CHECK(a.delta_hat == b.delta_hat);
    CHECK(a.v_hat == b.v_hat);
}

TEST_CASE("smooth pseudo-kernel converges at first order") {
    // tau_z(t) = a_z't + t'B_z t / 2 + c_z t_0^3 at t = theta.
    const int n = 50, p = 3;
    CounterRng rng(25);
    std::vector<Eigen::VectorXd> a(n);
    std::vector<Eigen::MatrixXd> B(n);
    std::vector<double> c(n);
    for (int z = 0; z < n; ++z) {
        a[z] = Eigen::VectorXd(p);
        for (auto& v : a[z]) v = rng.normal();
        Eigen::MatrixXd m(p, p);
        for (auto& v : m.reshaped()) v = rng.normal();
        B[z] = m + m.transpose();
        c[z] = rng.normal();
    }
    const Eigen::Vector3d theta(0.3, -0.2, 0.5);
    const TauFunction tau = [&](const Eigen::VectorXd& t) {
        std::vector<double> out(n);
        for (int z = 0; z < n; ++z) out[z] = a[z].dot(t) + 0.5 * t.dot(B[z] * t) + c[z] * t[0] * t[0] * t[0];
        return out;
    };
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(p, p), v = Eigen::MatrixXd::Zero(p, p);
    for (int z = 0; z < n; ++z) {
        Eigen::VectorXd g = a[z] + B[z] * theta;
        g[0] += 3.0 * c[z] * theta[0] * theta[0];
        Eigen::MatrixXd h = B[z];
        h(0, 0) += 6.0 * c[z] * theta[0];
        delta += g * g.transpose() / n;
        v += 0.5 * h / n;
    }
    const auto coarse = numerical_derivatives(tau, theta, 1e-2);
    const auto fine = numerical_derivatives(tau, theta, 1e-3);
    const double d1 = (coarse.delta_hat - delta).norm(), d2 = (fine.delta_hat - delta).norm();
    const double v1 = (coarse.v_hat - v).norm(), v2 = (fine.v_hat - v).norm();
    CHECK(d2 < d1);
    CHECK(v2 < v1);
    CHECK(d1 / d2 == doctest::Approx(10.0).epsilon(0.2));
    CHECK(v1 / v2 == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("sandwich reconstructs Delta") {
    CounterRng rng(26);
    int checked = 0;
    for (int rep = 0; rep < 5; ++rep) {
        const Sample s = oracle::random_sample(rng, 120, 2, EstimatorKind::MRC);
        const Eigen::VectorXd th = oracle::random_theta(rng, 2) * 0.2;
        CovarianceEstimate est;
        try {
            est = estimate_covariance(s, EstimatorSpec::mrc(), th, default_step(120, 2));
        } catch (const Error&) {
            continue;
        }
        const Eigen::MatrixXd back = est.v_hat * est.sandwich * est.v_hat;
        CHECK((back - est.delta_hat).norm() <= 1e-8 * std::max(1.0, est.delta_hat.norm()));
        CHECK((est.sandwich - est.sandwich.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * est.sandwich.norm());
        ++checked;
    }
    CHECK(checked >= 3);
}

TEST_CASE("projection intervals") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    CovarianceEstimate cov;
    cov.sandwich = Eigen::Matrix2d::Identity();
    const Eigen::Vector2d th(0.0, 1.0);
    const Eigen::Vector2d e1(1.0, 0.0);
    const double level = 2.0 * normal_cdf(2.0) - 1.0;
    const Interval ci = projection_ci(th, cov, e1, 100, level);
    CHECK(ci.lo == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(ci.hi == doctest::Approx(0.2).epsilon(1e-12));

    const Eigen::Vector2d g(1.0, 2.0);
    const Interval one = projection_ci(th, cov, g, 100, 0.9);
    const Interval two = projection_ci(th, cov, 2.0 * g, 100, 0.9);
    CHECK(two.lo == doctest::Approx(2.0 * one.lo).epsilon(1e-14));
    CHECK(two.hi == doctest::Approx(2.0 * one.hi).epsilon(1e-14));

    cov.sandwich = Eigen::Matrix2d::Zero();
    try {
        projection_ci(th, cov, e1, 100, 0.9);
        FAIL("expected NonPositiveVariance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPositiveVariance);
    }
    cov.sandwich = Eigen::Matrix2d::Identity();
    CHECK_THROWS_AS(projection_ci(th, cov, Eigen::Vector2d::Zero(), 100, 0.9), Error);
    CHECK_THROWS_AS(projection_ci(th, cov, e1, 100, 1.0), Error);
}
