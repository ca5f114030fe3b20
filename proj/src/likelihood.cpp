#include "hawkesbg/likelihood.hpp"

#include "hawkesbg/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hawkesbg {

namespace {

void require_window(const EventSequence& seq, double t) {
    if (!seq.window().contains(t)) {
        throw DomainError("time " + std::to_string(t) + " outside the observation window");
    }
}

double excitation_at(double t, const EventSequence& seq, const ExponentialKernel& kernel) {
    double excitation = 0.0;
    for (double tk : seq.times()) {
        if (tk >= t) {
            break;
        }
        excitation += kernel_eval(kernel, t - tk);
    }
    return excitation;
}

// Kernel contribution to the integrated intensity over [t_a, t_b].
double kernel_compensator_between(const EventSequence& seq, const ExponentialKernel& kernel,
                                  double t_a, double t_b) {
    double total = 0.0;
    for (double tk : seq.times()) {
        if (tk >= t_b) {
            break;
        }
        for (std::size_t j = 0; j < kernel.order(); ++j) {
            const double alpha = kernel.alphas()[j];
            const double beta = kernel.betas()[j];
            if (tk < t_a) {
                total += alpha * std::exp(-beta * (t_a - tk)) * -std::expm1(-beta * (t_b - t_a));
            } else {
                total += alpha * -std::expm1(-beta * (t_b - tk));
            }
        }
    }
    return total;
}

double log_intensity(double mu, double excitation, std::size_t index) {
    if (!(mu > 0.0) || !std::isfinite(mu) || !std::isfinite(excitation)) {
        throw NumericalError("intensity is not finite and positive", index);
    }
    return std::log(mu) + std::log1p(excitation / mu);
}

// mu at event e, reusing precomputed segment rates when the spline was built
// for this very sequence.
template <class RateAt>
double assemble(const EventSequence& seq, const LikelihoodWorkspace& ws, RateAt&& rate_at,
                double background_total) {
    double sum = 0.0;
    for (std::size_t e = 0; e < seq.size(); ++e) {
        sum += log_intensity(rate_at(e), ws.excitation[e], e);
    }
    const double value = sum - background_total - ws.kernel_compensator;
    if (!std::isfinite(value)) {
        throw NumericalError("log-likelihood is not finite", seq.size());
    }
    return value;
}

bool same_events(const SplineBackground& spline, const EventSequence& seq) {
    const auto a = spline.events().times();
    const auto b = seq.times();
    return spline.window() == seq.window() && a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin());
}

template <class Bg>
std::vector<double> interval_compensators_impl(const EventSequence& seq,
                                               const ExponentialKernel& kernel, const Bg& bg) {
    std::vector<double> out;
    if (seq.size() < 2) {
        return out;
    }
    const LikelihoodWorkspace ws = make_workspace(seq, kernel);
    const std::size_t order = kernel.order();
    out.resize(seq.size() - 1);
    for (std::size_t e = 0; e + 1 < seq.size(); ++e) {
        const double gap = seq[e + 1] - seq[e];
        double total = background_integral(bg, seq[e], seq[e + 1]);
        for (std::size_t j = 0; j < order; ++j) {
            const double carried = ws.decay_states[e * order + j] + 1.0;
            total += kernel.alphas()[j] * carried * -std::expm1(-kernel.betas()[j] * gap);
        }
        out[e] = total;
    }
    return out;
}

template <class Bg>
double compensator_impl(const EventSequence& seq, const ExponentialKernel& kernel, const Bg& bg,
                        double t_a, double t_b) {
    if (!(t_a <= t_b)) {
        throw DomainError("compensator interval is reversed");
    }
    require_window(seq, t_a);
    require_window(seq, t_b);
    return background_integral(bg, t_a, t_b) + kernel_compensator_between(seq, kernel, t_a, t_b);
}

}  // namespace

LikelihoodWorkspace make_workspace(const EventSequence& seq, const ExponentialKernel& kernel) {
    LikelihoodWorkspace ws;
    const std::size_t n = seq.size();
    const std::size_t order = kernel.order();
    ws.order = order;
    ws.decay_states.assign(n * order, 0.0);
    ws.excitation.assign(n, 0.0);
    ws.gaps.resize(n + 1);

    const double start = seq.window().start();
    const double end = seq.window().end();
    for (std::size_t i = 0; i <= n; ++i) {
        const double left = i == 0 ? start : seq[i - 1];
        const double right = i == n ? end : seq[i];
        ws.gaps[i] = right - left;
    }

    for (std::size_t e = 0; e < n; ++e) {
        double excitation = 0.0;
        for (std::size_t j = 0; j < order; ++j) {
            double state = 0.0;
            if (e > 0) {
                const double decay = std::exp(-kernel.betas()[j] * (seq[e] - seq[e - 1]));
                state = decay * (ws.decay_states[(e - 1) * order + j] + 1.0);
            }
            ws.decay_states[e * order + j] = state;
            excitation += kernel.alphas()[j] * kernel.betas()[j] * state;
        }
        ws.excitation[e] = excitation;
    }

    double tail = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
        for (std::size_t j = 0; j < order; ++j) {
            tail += kernel.alphas()[j] * -std::expm1(-kernel.betas()[j] * (end - seq[e]));
        }
    }
    ws.kernel_compensator = tail;
    return ws;
}

double intensity_at(double t, const EventSequence& seq, const ExponentialKernel& kernel,
                    const BackgroundModel& bg) {
    require_window(seq, t);
    return background_eval(bg, t) + excitation_at(t, seq, kernel);
}

double intensity_at(double t, const EventSequence& seq, const ExponentialKernel& kernel,
                    const AnalyticRate& bg) {
    require_window(seq, t);
    return background_eval(bg, t) + excitation_at(t, seq, kernel);
}

double log_likelihood(const EventSequence& seq, const ExponentialKernel& kernel,
                      const BackgroundModel& bg) {
    const LikelihoodWorkspace ws = make_workspace(seq, kernel);
    const double background_total = background_integral(bg, seq);
    if (const auto* spline = std::get_if<SplineBackground>(&bg); spline && same_events(*spline, seq)) {
        const auto rates = spline->segment_rates();
        return assemble(seq, ws, [&](std::size_t e) { return rates[e + 1]; }, background_total);
    }
    return assemble(seq, ws, [&](std::size_t e) { return background_eval(bg, seq[e]); },
                    background_total);
}

double log_likelihood(const EventSequence& seq, const ExponentialKernel& kernel,
                      const AnalyticRate& bg) {
    const LikelihoodWorkspace ws = make_workspace(seq, kernel);
    return assemble(seq, ws, [&](std::size_t e) { return background_eval(bg, seq[e]); },
                    background_integral(bg, seq));
}

double log_likelihood_direct(const EventSequence& seq, const ExponentialKernel& kernel,
                             const BackgroundModel& bg) {
    const double end = seq.window().end();
    double sum = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        double excitation = 0.0;
        for (std::size_t k = 0; k < i; ++k) {
            excitation += kernel_eval(kernel, seq[i] - seq[k]);
        }
        sum += std::log(background_eval(bg, seq[i]) + excitation);
    }
    double triggered = 0.0;
    for (double t : seq.times()) {
        triggered += kernel_integral(kernel, end - t);
    }
    return sum - background_integral(bg, seq) - triggered;
}

double compensator(const EventSequence& seq, const ExponentialKernel& kernel,
                   const BackgroundModel& bg, double t_a, double t_b) {
    return compensator_impl(seq, kernel, bg, t_a, t_b);
}

double compensator(const EventSequence& seq, const ExponentialKernel& kernel,
                   const AnalyticRate& bg, double t_a, double t_b) {
    return compensator_impl(seq, kernel, bg, t_a, t_b);
}

std::vector<double> interval_compensators(const EventSequence& seq, const ExponentialKernel& kernel,
                                          const BackgroundModel& bg) {
    return interval_compensators_impl(seq, kernel, bg);
}

std::vector<double> interval_compensators(const EventSequence& seq, const ExponentialKernel& kernel,
                                          const AnalyticRate& bg) {
    return interval_compensators_impl(seq, kernel, bg);
}

SplineLikelihood::SplineLikelihood(const EventSequence& seq, const ExponentialKernel& kernel,
                                   const NaturalTimeBasis& basis)
    : basis_(&basis), work_(make_workspace(seq, kernel)) {
    if (basis.event_count() != seq.size()) {
        throw ConfigError("basis was built for a different number of events");
    }
}

double SplineLikelihood::value(std::span<const double> coeffs) const {
    const std::size_t n = basis_->event_count();
    double value = -work_.kernel_compensator;
    for (std::size_t i = 0; i <= n; ++i) {
        const double log_mu = basis_->row_dot(i, coeffs);
        const double mu = std::exp(log_mu);
        value -= mu * work_.gaps[i];
        if (i >= 1) {
            const double excitation = work_.excitation[i - 1];
            if (!std::isfinite(mu) || !(mu > 0.0)) {
                throw NumericalError("background rate is not finite and positive", i);
            }
            value += log_mu + std::log1p(excitation / mu);
        }
    }
    if (!std::isfinite(value)) {
        throw NumericalError("log-likelihood is not finite", n);
    }
    return value;
}

SplineLikelihood::Evaluation SplineLikelihood::evaluate(std::span<const double> coeffs,
                                                        bool with_hessian) const {
    const std::size_t n = basis_->event_count();
    const std::size_t m = basis_->basis_count();
    Evaluation out;
    out.gradient.assign(m, 0.0);
    if (with_hessian) {
        out.neg_hessian = SymmetricBandMatrix(m, 3);
        out.compensator_curvature = SymmetricBandMatrix(m, 3);
    }
    double value = -work_.kernel_compensator;
    for (std::size_t i = 0; i <= n; ++i) {
        const auto& row = basis_->value_row(i);
        const std::size_t first = basis_->first_column(i);
        const double log_mu = basis_->row_dot(i, coeffs);
        const double mu = std::exp(log_mu);
        if (!std::isfinite(mu)) {
            throw NumericalError("background rate overflowed", i);
        }
        const double integrated = mu * work_.gaps[i];
        value -= integrated;
        // d/da of the event term is (mu / lambda) f_i; its second derivative
        // is (mu/lambda)(1 - mu/lambda) f_i f_i^T.
        double event_weight = 0.0;
        double event_curvature = 0.0;
        if (i >= 1) {
            if (!(mu > 0.0)) {
                throw NumericalError("background rate underflowed", i);
            }
            const double ratio = work_.excitation[i - 1] / mu;
            value += log_mu + std::log1p(ratio);
            event_weight = 1.0 / (1.0 + ratio);
            event_curvature = event_weight * (1.0 - event_weight);
        }
        const double g = event_weight - integrated;
        for (std::size_t r = 0; r < NaturalTimeBasis::kRowWidth; ++r) {
            out.gradient[first + r] += g * row[r];
        }
        if (with_hessian) {
            out.neg_hessian.add_outer(first, row, integrated - event_curvature);
            out.compensator_curvature.add_outer(first, row, integrated);
        }
    }
    if (!std::isfinite(value)) {
        throw NumericalError("log-likelihood is not finite", n);
    }
    out.value = value;
    return out;
}

std::vector<double> loglik_grad_coeffs(const EventSequence& seq, const ExponentialKernel& kernel,
                                       const NaturalTimeBasis& basis,
                                       std::span<const double> coeffs) {
    return SplineLikelihood(seq, kernel, basis).evaluate(coeffs, false).gradient;
}

SymmetricBandMatrix loglik_hessian_coeffs(const EventSequence& seq, const ExponentialKernel& kernel,
                                          const NaturalTimeBasis& basis,
                                          std::span<const double> coeffs) {
    SymmetricBandMatrix hessian(basis.basis_count(), 3);
    hessian.add(SplineLikelihood(seq, kernel, basis).evaluate(coeffs, true).neg_hessian, -1.0);
    return hessian;
}

}  // namespace hawkesbg
