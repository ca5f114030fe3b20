#include "hawkesbg/basis.hpp"
#include "hawkesbg/errors.hpp"
#include "hawkesbg/estimate.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace hawkesbg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd dense_derivatives(const NaturalTimeBasis& b) {
    Eigen::MatrixXd g(b.event_count(), b.basis_count());
    for (std::size_t i = 1; i <= b.event_count(); ++i) {
        for (std::size_t j = 0; j < b.basis_count(); ++j) {
            g(i - 1, j) = b.deriv(i, j);
        }
    }
    return g;
}

Eigen::MatrixXd dense_precision(const NaturalTimeBasis& b, double V, double W) {
    const Eigen::MatrixXd g = dense_derivatives(b);
    const double m = static_cast<double>(b.basis_count());
    return V * g.transpose() * g + (W / (m * m)) * Eigen::MatrixXd::Ones(b.basis_count(), b.basis_count());
}

}  // namespace

TEST_CASE("derivative Gram matrix and pseudo-determinant", "[prior][oracle]") {
    for (auto [n, k] : {std::pair<std::size_t, std::size_t>{20, 5}, {100, 25}, {500, 50}, {333, 10}}) {
        const auto b = build_basis(n, k);
        const PriorStructure s(b);
        const Eigen::MatrixXd gram = dense_derivatives(b).transpose() * dense_derivatives(b);
        CHECK((s.derivative_gram().to_dense() - gram).cwiseAbs().maxCoeff() < 1e-12 * gram.cwiseAbs().maxCoeff());

        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        const auto& ev = eig.eigenvalues();
        // one zero eigenvalue for the constant vector, the rest positive
        CHECK(std::abs(ev(0)) < 1e-10 * ev(ev.size() - 1));
        CHECK(ev(1) > 0.0);
        const double log_pdet = ev.tail(ev.size() - 1).array().log().sum();
        CHECK_THAT(s.log_pseudo_determinant(), WithinAbs(log_pdet, 1e-8 * std::max(1.0, std::abs(log_pdet))));
    }
}

TEST_CASE("precision is positive definite for every basis", "[prior]") {
    for (std::size_t n : {3, 10, 50, 200, 1000}) {
        for (std::size_t k : {1, 2, 10, 50}) {
            const auto b = build_basis(n, k);
            if (b.basis_count() > n + 1) {
                continue;
            }
            const SmoothnessPrior prior(b, 1.0, 1e4, 2.0);
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(prior.precision());
            CHECK(eig.eigenvalues().minCoeff() > 0.0);
        }
    }
}

TEST_CASE("improper prior is rejected", "[prior]") {
    // a single event cannot pin down three independent slopes
    CHECK_THROWS_AS(PriorStructure(build_basis(1, 50)), ConfigError);
    CHECK_THROWS_AS(SmoothnessPrior(build_basis(100, 50), 0.0, 1e4, 1.0), ConfigError);
    CHECK_THROWS_AS(SmoothnessPrior(build_basis(100, 50), 1.0, 1e4, -1.0), ConfigError);
}

TEST_CASE("prior mean and normalizer match a dense construction", "[prior][oracle]") {
    const auto b = build_basis(400, 20);
    for (double V : {1e-3, 1.0, 250.0}) {
        const double W = 1e4;
        const double mu_c = 0.37;
        const SmoothnessPrior prior(b, V, W, mu_c);
        const Eigen::MatrixXd q = dense_precision(b, V, W);
        CHECK((prior.precision() - q).cwiseAbs().maxCoeff() < 1e-10 * q.cwiseAbs().maxCoeff());

        const double m = static_cast<double>(b.basis_count());
        const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(b.basis_count(), W * std::log(mu_c) / m);
        // Q is badly conditioned at small V, so check the normal equations by residual
        Eigen::VectorXd mean(b.basis_count());
        for (std::size_t j = 0; j < b.basis_count(); ++j) {
            mean(j) = prior.mean()[j];
            CHECK_THAT(prior.mean()[j], WithinAbs(prior.mean()[0], 1e-12));
        }
        const double residual = (q * mean - rhs).cwiseAbs().maxCoeff();
        CHECK(residual <= 1e-12 * q.cwiseAbs().maxCoeff() * mean.cwiseAbs().maxCoeff());
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(q);
        const double log_det = ldlt.vectorD().array().log().sum();
        const double expected = 0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
        CHECK_THAT(prior.log_normalizer(), WithinAbs(expected, 1e-8 * std::abs(expected)));
    }
}

TEST_CASE("log prior examples", "[prior]") {
    const auto b = build_basis(200, 20);
    const double W = 1e4;
    const SmoothnessPrior prior(b, 3.0, W, 1.7);
    const auto& mean = prior.mean();
    CHECK_THAT(log_prior(mean, prior), WithinAbs(-prior.log_normalizer(), 1e-12));
    const double c = 0.013;
    std::vector<double> shifted = mean;
    for (double& a : shifted) {
        a += c;
    }
    CHECK_THAT(log_prior(shifted, prior), WithinAbs(-prior.log_normalizer() - 0.5 * W * c * c, 1e-9));
}

TEST_CASE("log prior density and gradient match the dense quadratic form", "[prior][oracle]") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 0.3);
    const auto b = build_basis(150, 10);
    const SmoothnessPrior prior(b, 12.0, 1e4, 0.8);
    const Eigen::MatrixXd q = prior.precision();
    std::vector<double> a(b.basis_count());
    for (double& x : a) {
        x = prior.mean()[0] + normal(rng);
    }
    Eigen::VectorXd d(b.basis_count());
    for (std::size_t j = 0; j < a.size(); ++j) {
        d(j) = a[j] - prior.mean()[j];
    }
    CHECK_THAT(prior.log_density(a), WithinRel(-0.5 * d.dot(q * d) - prior.log_normalizer(), 1e-12));
    const Eigen::VectorXd grad = -(q * d);
    const auto g = prior.gradient(a);
    for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK_THAT(g[j], WithinAbs(grad(j), 1e-9 * grad.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("prior integrates to one", "[prior][oracle]") {
    // Importance sampling from a Gaussian twice as wide as the prior.
    const auto b = build_basis(60, 30);
    REQUIRE(b.basis_count() == 5);
    const SmoothnessPrior prior(b, 2.0, 1e4, 1.5);
    const std::size_t m = b.basis_count();
    const Eigen::MatrixXd cov = 4.0 * prior.precision().inverse();
    const Eigen::MatrixXd chol = cov.llt().matrixL();
    const double log_det_cov = 2.0 * chol.diagonal().array().log().sum();
    const double log_q_norm = -0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_cov;

    std::mt19937_64 rng(123);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int samples = 200000;
    double max_w = -1e300;
    std::vector<double> log_w(samples);
    std::vector<double> a(m);
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd z(m);
        for (std::size_t j = 0; j < m; ++j) {
            z(j) = normal(rng);
        }
        const Eigen::VectorXd x = chol * z;
        for (std::size_t j = 0; j < m; ++j) {
            a[j] = prior.mean()[j] + x(j);
        }
        log_w[s] = prior.log_density(a) - (log_q_norm - 0.5 * z.squaredNorm());
        max_w = std::max(max_w, log_w[s]);
    }
    double sum = 0.0;
    for (double lw : log_w) {
        sum += std::exp(lw - max_w);
    }
    const double log_integral = max_w + std::log(sum / samples);
    CHECK(std::abs(log_integral) < 0.05);
}
