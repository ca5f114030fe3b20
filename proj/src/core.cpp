#include "hawkesbg/core.hpp"

#include "hawkesbg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hawkesbg {

namespace {

void require_inside(const ObservationWindow& window, double t) {
    if (!window.contains(t)) {
        throw DomainError("time " + std::to_string(t) + " outside observation window [" +
                          std::to_string(window.start()) + ", " + std::to_string(window.end()) +
                          "]");
    }
}

void require_ordered(double a, double b) {
    if (!(a <= b)) {
        throw DomainError("integration bounds reversed");
    }
}

}  // namespace

ObservationWindow::ObservationWindow(double start, double end) : start_(start), end_(end) {
    if (!std::isfinite(start) || !std::isfinite(end) || !(start < end)) {
        throw DomainError("observation window needs finite start < end");
    }
}

EventSequence::EventSequence(std::vector<double> times, ObservationWindow window)
    : times_(std::move(times)), window_(window) {
    for (std::size_t i = 0; i < times_.size(); ++i) {
        const double t = times_[i];
        if (!window_.contains(t)) {
            throw DomainError("event " + std::to_string(i) + " at " + std::to_string(t) +
                              " lies outside the observation window");
        }
        if (i > 0 && !(times_[i - 1] < t)) {
            throw DomainError("event times must be strictly increasing (index " +
                              std::to_string(i) + ")");
        }
    }
}

ExponentialKernel::ExponentialKernel(std::vector<double> alphas, std::vector<double> betas)
    : alphas_(std::move(alphas)), betas_(std::move(betas)) {
    if (alphas_.size() != betas_.size()) {
        throw ConfigError("kernel needs as many alphas as betas");
    }
    for (std::size_t j = 0; j < alphas_.size(); ++j) {
        if (!(alphas_[j] >= 0.0) || !std::isfinite(alphas_[j])) {
            throw ConfigError("kernel alpha must be finite and nonnegative");
        }
        if (!(betas_[j] > 0.0) || !std::isfinite(betas_[j])) {
            throw ConfigError("kernel beta must be finite and positive");
        }
    }
}

double kernel_eval(const ExponentialKernel& kernel, double lag) {
    if (!(lag >= 0.0)) {
        throw DomainError("kernel lag must be nonnegative");
    }
    double value = 0.0;
    for (std::size_t j = 0; j < kernel.order(); ++j) {
        value += kernel.alphas()[j] * kernel.betas()[j] * std::exp(-kernel.betas()[j] * lag);
    }
    return value;
}

double kernel_integral(const ExponentialKernel& kernel, double lag) {
    if (!(lag >= 0.0)) {
        throw DomainError("kernel lag must be nonnegative");
    }
    double value = 0.0;
    for (std::size_t j = 0; j < kernel.order(); ++j) {
        value += kernel.alphas()[j] * -std::expm1(-kernel.betas()[j] * lag);
    }
    return value;
}

double branching_ratio(const ExponentialKernel& kernel) {
    return std::accumulate(kernel.alphas().begin(), kernel.alphas().end(), 0.0);
}

ConstantBackground::ConstantBackground(double mu_c) : mu_c_(mu_c) {
    if (!(mu_c > 0.0) || !std::isfinite(mu_c)) {
        throw ConfigError("constant background rate must be positive");
    }
}

PiecewiseLinearBackground::PiecewiseLinearBackground(std::vector<double> knot_times,
                                                     std::vector<double> knot_values)
    : knot_times_(std::move(knot_times)), knot_values_(std::move(knot_values)) {
    if (knot_times_.size() < 2 || knot_times_.size() != knot_values_.size()) {
        throw ConfigError("piecewise-linear background needs >= 2 knots with one value each");
    }
    for (std::size_t i = 0; i < knot_times_.size(); ++i) {
        if (i > 0 && !(knot_times_[i - 1] < knot_times_[i])) {
            throw ConfigError("knot times must be strictly increasing");
        }
        if (!(knot_values_[i] > 0.0) || !std::isfinite(knot_values_[i])) {
            throw ConfigError("knot values must be positive");
        }
    }
}

double PiecewiseLinearBackground::eval(double t) const {
    require_inside(window(), t);
    auto it = std::upper_bound(knot_times_.begin(), knot_times_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - knot_times_.begin());
    if (hi >= knot_times_.size()) {
        return knot_values_.back();
    }
    const std::size_t lo = hi - 1;
    const double frac = (t - knot_times_[lo]) / (knot_times_[hi] - knot_times_[lo]);
    return knot_values_[lo] + frac * (knot_values_[hi] - knot_values_[lo]);
}

double PiecewiseLinearBackground::integral(double a, double b) const {
    require_ordered(a, b);
    require_inside(window(), a);
    require_inside(window(), b);
    double total = 0.0;
    double left = a;
    double left_value = eval(a);
    for (std::size_t k = 0; k < knot_times_.size(); ++k) {
        if (knot_times_[k] <= a) {
            continue;
        }
        if (knot_times_[k] >= b) {
            break;
        }
        total += 0.5 * (left_value + knot_values_[k]) * (knot_times_[k] - left);
        left = knot_times_[k];
        left_value = knot_values_[k];
    }
    total += 0.5 * (left_value + eval(b)) * (b - left);
    return total;
}

double PiecewiseLinearBackground::supremum(double a, double b) const {
    require_ordered(a, b);
    double sup = std::max(eval(a), eval(b));
    for (std::size_t k = 0; k < knot_times_.size(); ++k) {
        if (knot_times_[k] > a && knot_times_[k] < b) {
            sup = std::max(sup, knot_values_[k]);
        }
    }
    return sup;
}

SplineBackground::SplineBackground(std::vector<double> coeffs,
                                   std::shared_ptr<const NaturalTimeBasis> basis,
                                   EventSequence events)
    : coeffs_(std::move(coeffs)), basis_(std::move(basis)), events_(std::move(events)) {
    if (!basis_) {
        throw ConfigError("spline background needs a basis");
    }
    if (coeffs_.size() != basis_->basis_count()) {
        throw ConfigError("spline coefficient count does not match the basis");
    }
    if (basis_->event_count() != events_.size()) {
        throw ConfigError("basis was built for a different number of events");
    }
    const std::size_t n = events_.size();
    rates_.resize(n + 1);
    cumulative_.resize(n + 2);
    cumulative_[0] = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        rates_[i] = std::exp(basis_->row_dot(i, coeffs_));
        if (!std::isfinite(rates_[i])) {
            throw NumericalError("spline background rate overflowed", i);
        }
        cumulative_[i + 1] = cumulative_[i] + rates_[i] * (segment_end(i) - segment_start(i));
    }
}

double SplineBackground::segment_start(std::size_t i) const {
    return i == 0 ? events_.window().start() : events_[i - 1];
}

double SplineBackground::segment_end(std::size_t i) const {
    return i == events_.size() ? events_.window().end() : events_[i];
}

std::size_t SplineBackground::segment_index(double t) const {
    require_inside(window(), t);
    const auto times = events_.times();
    return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

double SplineBackground::eval(double t) const {
    return rates_[segment_index(t)];
}

double SplineBackground::integral(double a, double b) const {
    require_ordered(a, b);
    const std::size_t ia = segment_index(a);
    const std::size_t ib = segment_index(b);
    if (ia == ib) {
        return rates_[ia] * (b - a);
    }
    double total = rates_[ia] * (segment_end(ia) - a);
    total += cumulative_[ib] - cumulative_[ia + 1];
    total += rates_[ib] * (b - segment_start(ib));
    return total;
}

double SplineBackground::supremum(double a, double b) const {
    require_ordered(a, b);
    const std::size_t ia = segment_index(a);
    const std::size_t ib = segment_index(b);
    return *std::max_element(rates_.begin() + static_cast<std::ptrdiff_t>(ia),
                             rates_.begin() + static_cast<std::ptrdiff_t>(ib) + 1);
}

double background_eval(const BackgroundModel& bg, double t) {
    return std::visit(
        [t](const auto& model) -> double {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, ConstantBackground>) {
                return model.rate();
            } else {
                return model.eval(t);
            }
        },
        bg);
}

double background_integral(const BackgroundModel& bg, double a, double b) {
    return std::visit(
        [a, b](const auto& model) -> double {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, ConstantBackground>) {
                require_ordered(a, b);
                return model.rate() * (b - a);
            } else {
                return model.integral(a, b);
            }
        },
        bg);
}

double background_integral(const BackgroundModel& bg, const EventSequence& seq) {
    return background_integral(bg, seq.window().start(), seq.window().end());
}

double background_supremum(const BackgroundModel& bg, double a, double b) {
    return std::visit(
        [a, b](const auto& model) -> double {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, ConstantBackground>) {
                return model.rate();
            } else {
                return model.supremum(a, b);
            }
        },
        bg);
}

double background_eval(const AnalyticRate& bg, double t) {
    require_inside(bg.window, t);
    return bg.rate(t);
}

double background_integral(const AnalyticRate& bg, double a, double b) {
    require_ordered(a, b);
    require_inside(bg.window, a);
    require_inside(bg.window, b);
    return bg.integral(a, b);
}

double background_integral(const AnalyticRate& bg, const EventSequence& seq) {
    return background_integral(bg, seq.window().start(), seq.window().end());
}

std::string background_family(const BackgroundModel& bg) {
    switch (bg.index()) {
        case 0:
            return "const";
        case 1:
            return "pl";
        default:
            return "spline";
    }
}

}  // namespace hawkesbg
