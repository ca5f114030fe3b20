#include "hawkesbg/errors.hpp"
#include "hawkesbg/estimate.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace hawkesbg {

void HyperParams::validate() const {
    if (!(V > 0.0) || !std::isfinite(V)) {
        throw ConfigError("smoothness weight V must be positive");
    }
    if (!(W > 0.0) || !std::isfinite(W)) {
        throw ConfigError("baseline weight W must be positive");
    }
    if (!(mu_c > 0.0) || !std::isfinite(mu_c)) {
        throw ConfigError("baseline rate mu_c must be positive");
    }
}

ExponentialKernel default_kernel(std::size_t order) {
    std::vector<double> alphas(order, order > 0 ? 0.5 / static_cast<double>(order) : 0.0);
    std::vector<double> betas(order, 1.0);
    if (order > 1) {
        for (std::size_t j = 0; j < order; ++j) {
            const double frac = static_cast<double>(j) / static_cast<double>(order - 1);
            betas[j] = std::pow(10.0, -1.0 + 2.0 * frac);
        }
    }
    return {std::move(alphas), std::move(betas)};
}

HyperParams default_hyperparams(const EventSequence& seq, std::size_t order) {
    HyperParams hyper;
    hyper.kernel = default_kernel(order);
    hyper.V = 1.0;
    hyper.mu_c = std::max<double>(1.0, static_cast<double>(seq.size())) / seq.window().length();
    return hyper;
}

PriorStructure::PriorStructure(const NaturalTimeBasis& basis)
    : gram_(basis.basis_count(), 3) {
    const std::size_t m = basis.basis_count();
    for (std::size_t i = 1; i <= basis.event_count(); ++i) {
        gram_.add_outer(basis.first_column(i), basis.deriv_row(i), 1.0);
    }
    SymmetricBandMatrix minor(m - 1, 3);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        for (std::size_t i = j; i < std::min(m - 1, j + 4); ++i) {
            minor.lower(i, j) = gram_(i, j);
        }
    }
    const auto chol = BandCholesky::factor(minor);
    if (!chol) {
        throw ConfigError("smoothness prior is improper: too few events for " + std::to_string(m) +
                          " basis functions");
    }
    log_pdet_ = std::log(static_cast<double>(m)) + chol->log_determinant();
}

SmoothnessPrior::SmoothnessPrior(std::shared_ptr<const PriorStructure> structure, double V,
                                 double W, double mu_c)
    : structure_(std::move(structure)), V_(V), W_(W), mu_c_(mu_c) {
    if (!structure_) {
        throw ConfigError("smoothness prior needs a structure");
    }
    if (!(V > 0.0) || !(W > 0.0) || !(mu_c > 0.0) || !std::isfinite(V) || !std::isfinite(W) ||
        !std::isfinite(mu_c)) {
        throw ConfigError("prior needs positive finite V, W and mu_c");
    }
    const auto m = static_cast<double>(size());
    // G^T G 1 = 0, so Q (log mu_c 1) = (W log mu_c / m) 1.
    mean_.assign(size(), std::log(mu_c));
    // log det Q = (m-1) log V + log pdet(G^T G) + log(W / m)
    const double log_det_q =
        (m - 1.0) * std::log(V) + structure_->log_pseudo_determinant() + std::log(W / m);
    log_normalizer_ = 0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_q;
}

SmoothnessPrior::SmoothnessPrior(const NaturalTimeBasis& basis, double V, double W, double mu_c)
    : SmoothnessPrior(std::make_shared<const PriorStructure>(basis), V, W, mu_c) {}

SymmetricBandMatrix SmoothnessPrior::band_precision() const {
    SymmetricBandMatrix band(size(), 3);
    band.add(structure_->derivative_gram(), V_);
    return band;
}

double SmoothnessPrior::ones_weight() const noexcept {
    const auto m = static_cast<double>(size());
    return W_ / (m * m);
}

Eigen::MatrixXd SmoothnessPrior::precision() const {
    Eigen::MatrixXd q = V_ * structure_->derivative_gram().to_dense();
    q.array() += ones_weight();
    return q;
}

double SmoothnessPrior::log_density(std::span<const double> coeffs) const {
    if (coeffs.size() != size()) {
        throw ConfigError("coefficient vector does not match the prior dimension");
    }
    const auto gram_a = structure_->derivative_gram().multiply(coeffs);
    const double roughness = std::inner_product(coeffs.begin(), coeffs.end(), gram_a.begin(), 0.0);
    const double baseline = std::accumulate(coeffs.begin(), coeffs.end(), 0.0) /
                                static_cast<double>(size()) -
                            std::log(mu_c_);
    return -0.5 * V_ * roughness - 0.5 * W_ * baseline * baseline - log_normalizer_;
}

std::vector<double> SmoothnessPrior::gradient(std::span<const double> coeffs) const {
    auto grad = structure_->derivative_gram().multiply(coeffs);
    const auto m = static_cast<double>(size());
    const double baseline = std::accumulate(coeffs.begin(), coeffs.end(), 0.0) / m - std::log(mu_c_);
    for (double& g : grad) {
        g = -V_ * g - (W_ / m) * baseline;
    }
    return grad;
}

double log_prior(std::span<const double> coeffs, const SmoothnessPrior& prior) {
    return prior.log_density(coeffs);
}

}  // namespace hawkesbg
