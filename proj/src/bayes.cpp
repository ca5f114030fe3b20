#include "hawkesbg/errors.hpp"
#include "hawkesbg/estimate.hpp"
#include "hawkesbg/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hawkesbg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(std::span<const double> v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

MapResult solve_map(const SplineLikelihood& lik, const SmoothnessPrior& prior,
                    std::optional<std::span<const double>> warm_start, const MapOptions& options) {
    const std::size_t m = lik.basis().basis_count();
    if (prior.size() != m) {
        throw ConfigError("prior dimension does not match the basis");
    }
    std::vector<double> coeffs = prior.mean();
    if (warm_start) {
        if (warm_start->size() != m) {
            throw ConfigError("warm start has the wrong number of coefficients");
        }
        coeffs.assign(warm_start->begin(), warm_start->end());
    }

    auto log_posterior = [&](std::span<const double> a) -> double {
        try {
            return lik.value(a) + prior.log_density(a);
        } catch (const NumericalError&) {
            return -kInf;
        }
    };

    if (warm_start && !std::isfinite(log_posterior(coeffs))) {
        coeffs = prior.mean();
    }

    const SymmetricBandMatrix prior_band = prior.band_precision();
    const double ones_weight = prior.ones_weight();
    const double tolerance = options.gradient_tolerance * static_cast<double>(m);

    MapResult result;
    double gradient_norm = kInf;
    for (std::size_t iter = 0; iter <= options.max_iterations; ++iter) {
        const auto eval = lik.evaluate(coeffs, true);
        const double log_prior_value = prior.log_density(coeffs);
        const double phi = eval.value + log_prior_value;
        std::vector<double> grad = prior.gradient(coeffs);
        for (std::size_t j = 0; j < m; ++j) {
            grad[j] += eval.gradient[j];
        }
        gradient_norm = norm2(grad);
        result.iterations = iter;
        if (gradient_norm <= tolerance) {
            // one full Newton step from inside the tolerance ball makes the
            // result independent of the path (quadratic convergence)
            SymmetricBandMatrix hess = eval.neg_hessian;
            hess.add(prior_band);
            if (auto factor = BandPlusRankOne::factor(hess, ones_weight); factor && gradient_norm > 0.0) {
                const std::vector<double> delta = factor->solve(grad);
                std::vector<double> polished(m);
                for (std::size_t j = 0; j < m; ++j) {
                    polished[j] = coeffs[j] + delta[j];
                }
                if (log_posterior(polished) >= phi - 1e-12 * (1.0 + std::abs(phi))) {
                    const auto peval = lik.evaluate(polished, false);
                    std::vector<double> pgrad = prior.gradient(polished);
                    for (std::size_t j = 0; j < m; ++j) {
                        pgrad[j] += peval.gradient[j];
                    }
                    if (const double pnorm = norm2(pgrad); pnorm <= gradient_norm) {
                        result.coeffs = std::move(polished);
                        result.log_likelihood = peval.value;
                        result.log_prior = prior.log_density(result.coeffs);
                        result.gradient_norm = pnorm;
                        return result;
                    }
                }
            }
            result.coeffs = std::move(coeffs);
            result.log_likelihood = eval.value;
            result.log_prior = log_prior_value;
            result.gradient_norm = gradient_norm;
            return result;
        }
        if (iter == options.max_iterations) {
            break;
        }

        SymmetricBandMatrix curvature = eval.neg_hessian;
        curvature.add(prior_band);
        auto factor = BandPlusRankOne::factor(curvature, ones_weight);
        if (!factor) {
            // Indefinite posterior curvature: precondition the gradient with
            // the PSD compensator part instead.
            ++result.fallback_steps;
            SymmetricBandMatrix surrogate = eval.compensator_curvature;
            surrogate.add(prior_band);
            factor = BandPlusRankOne::factor(surrogate, ones_weight);
            if (!factor) {
                surrogate.add_diagonal(1e-8 * (1.0 + std::abs(phi)));
                factor = BandPlusRankOne::factor(surrogate, ones_weight);
            }
            if (!factor) {
                throw ConvergenceError("MAP search found no positive definite metric", coeffs,
                                       gradient_norm);
            }
        }
        const std::vector<double> direction = factor->solve(grad);
        const double slope = std::inner_product(grad.begin(), grad.end(), direction.begin(), 0.0);
        const double slack = 1e-12 * (1.0 + std::abs(phi));

        std::vector<double> trial(m);
        bool accepted = false;
        double step = 1.0;
        for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
            for (std::size_t j = 0; j < m; ++j) {
                trial[j] = coeffs[j] + step * direction[j];
            }
            const double phi_trial = log_posterior(trial);
            if (phi_trial >= phi + 1e-4 * step * slope - slack) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Near the optimum the posterior value is dominated by rounding,
            // so fall back to accepting any step that shrinks the gradient.
            step = 1.0;
            for (int halvings = 0; halvings < 30 && !accepted; ++halvings, step *= 0.5) {
                for (std::size_t j = 0; j < m; ++j) {
                    trial[j] = coeffs[j] + step * direction[j];
                }
                if (!(log_posterior(trial) >= phi - 1e3 * slack)) {
                    continue;
                }
                std::vector<double> trial_grad = prior.gradient(trial);
                const auto trial_eval = lik.evaluate(trial, false);
                for (std::size_t j = 0; j < m; ++j) {
                    trial_grad[j] += trial_eval.gradient[j];
                }
                accepted = norm2(trial_grad) < gradient_norm;
            }
        }
        if (!accepted) {
            break;
        }
        coeffs.swap(trial);
    }
    throw ConvergenceError("MAP estimate did not converge (gradient norm " +
                               std::to_string(gradient_norm) + ")",
                           coeffs, gradient_norm);
}

LaplaceResult laplace_at(const SplineLikelihood& lik, const SmoothnessPrior& prior, MapResult map) {
    const std::size_t m = prior.size();
    const auto eval = lik.evaluate(map.coeffs, true);
    SymmetricBandMatrix curvature = eval.neg_hessian;
    curvature.add(prior.band_precision());
    double log_det = 0.0;
    if (auto factor = BandPlusRankOne::factor(curvature, prior.ones_weight())) {
        log_det = factor->log_determinant();
    } else {
        Eigen::MatrixXd dense = curvature.to_dense();
        dense.array() += prior.ones_weight();
        Eigen::LLT<Eigen::MatrixXd> llt(dense);
        if (llt.info() != Eigen::Success) {
            throw ConvergenceError("posterior Hessian is not positive definite at the MAP (saddle point)",
                                   map.coeffs, map.gradient_norm);
        }
        log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    LaplaceResult out;
    out.log_det_hessian = log_det;
    out.log_marginal_likelihood = 0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi) -
                                  0.5 * log_det + map.log_likelihood + map.log_prior;
    out.map = std::move(map);
    return out;
}

struct HyperCodec {
    std::size_t order;
    std::optional<double> fixed_V;
    double W;

    std::size_t dimension() const { return 2 * order + (fixed_V ? 1 : 2); }

    std::vector<double> encode(const HyperParams& h) const {
        std::vector<double> x;
        for (double a : h.kernel.alphas()) {
            x.push_back(std::log(std::max(a, 1e-12)));
        }
        for (double b : h.kernel.betas()) {
            x.push_back(std::log(b));
        }
        if (!fixed_V) {
            x.push_back(std::log(h.V));
        }
        x.push_back(std::log(h.mu_c));
        return x;
    }

    HyperParams decode(std::span<const double> x) const {
        std::vector<double> alphas(order);
        std::vector<double> betas(order);
        for (std::size_t j = 0; j < order; ++j) {
            alphas[j] = std::exp(x[j]);
            betas[j] = std::exp(x[order + j]);
        }
        HyperParams h;
        h.kernel = ExponentialKernel(std::move(alphas), std::move(betas));
        h.V = fixed_V ? *fixed_V : std::exp(x[2 * order]);
        h.W = W;
        h.mu_c = std::exp(x.back());
        return h;
    }
};

}  // namespace

MapResult map_estimate(const EventSequence& seq, const HyperParams& hyper,
                       const NaturalTimeBasis& basis, const SmoothnessPrior& prior,
                       std::optional<std::span<const double>> warm_start, const MapOptions& options) {
    hyper.validate();
    const SplineLikelihood lik(seq, hyper.kernel, basis);
    return solve_map(lik, prior, warm_start, options);
}

MapResult map_estimate(const EventSequence& seq, const HyperParams& hyper,
                       const NaturalTimeBasis& basis, std::optional<std::span<const double>> warm_start,
                       const MapOptions& options) {
    hyper.validate();
    const SmoothnessPrior prior(basis, hyper.V, hyper.W, hyper.mu_c);
    return map_estimate(seq, hyper, basis, prior, warm_start, options);
}

LaplaceResult log_marginal_likelihood(const EventSequence& seq, const HyperParams& hyper,
                                      const NaturalTimeBasis& basis, const SmoothnessPrior& prior,
                                      std::optional<std::span<const double>> warm_start,
                                      const MapOptions& options) {
    hyper.validate();
    const SplineLikelihood lik(seq, hyper.kernel, basis);
    return laplace_at(lik, prior, solve_map(lik, prior, warm_start, options));
}

LaplaceResult log_marginal_likelihood(const EventSequence& seq, const HyperParams& hyper,
                                      const NaturalTimeBasis& basis,
                                      std::optional<std::span<const double>> warm_start,
                                      const MapOptions& options) {
    hyper.validate();
    const SmoothnessPrior prior(basis, hyper.V, hyper.W, hyper.mu_c);
    return log_marginal_likelihood(seq, hyper, basis, prior, warm_start, options);
}

HyperFit optimize_hyperparams(const EventSequence& seq, const NaturalTimeBasis& basis,
                              const HyperParams& init, const HyperOptions& options) {
    init.validate();
    if (basis.event_count() != seq.size()) {
        throw ConfigError("basis was built for a different number of events");
    }
    const auto structure = std::make_shared<const PriorStructure>(basis);
    const HyperCodec codec{init.kernel.order(), options.fixed_V, init.W};

    std::optional<std::vector<double>> best_coeffs;
    double best_value = kInf;

    auto objective = [&](std::span<const double> x) -> double {
        for (double v : x) {
            if (!(std::abs(v) <= 50.0)) {
                return kInf;
            }
        }
        try {
            const HyperParams hyper = codec.decode(x);
            const SmoothnessPrior prior(structure, hyper.V, hyper.W, hyper.mu_c);
            const SplineLikelihood lik(seq, hyper.kernel, basis);
            std::optional<std::span<const double>> warm;
            if (best_coeffs) {
                warm = std::span<const double>(*best_coeffs);
            }
            LaplaceResult lap = laplace_at(lik, prior, solve_map(lik, prior, warm, options.map));
            const double value = -lap.log_marginal_likelihood;
            if (value < best_value) {
                best_value = value;
                best_coeffs = std::move(lap.map.coeffs);
            }
            return value;
        } catch (const ConvergenceError&) {
            return kInf;
        } catch (const NumericalError&) {
            return kInf;
        } catch (const ConfigError&) {
            return kInf;
        }
    };

    HyperFit fit;
    fit.search = minimize_simplex(objective, codec.encode(init), options.simplex);
    if (!best_coeffs) {
        throw ConvergenceError("no hyper-parameter setting produced a finite marginal likelihood", {},
                               kInf);
    }
    fit.hyper = codec.decode(fit.search.x);
    const SmoothnessPrior prior(structure, fit.hyper.V, fit.hyper.W, fit.hyper.mu_c);
    const SplineLikelihood lik(seq, fit.hyper.kernel, basis);
    fit.laplace = laplace_at(lik, prior,
                             solve_map(lik, prior, std::span<const double>(*best_coeffs), options.map));
    fit.accepted_log_ml.reserve(fit.search.history.size());
    for (double v : fit.search.history) {
        fit.accepted_log_ml.push_back(-v);
    }
    fit.converged = fit.search.converged;
    return fit;
}

}  // namespace hawkesbg
