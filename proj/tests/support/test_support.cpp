#include "test_support.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

namespace hawkesbg::testing {

namespace {

double trampoline(double x, void* params) {
    return (*static_cast<const std::function<double(double)>*>(params))(x);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, std::vector<double> breaks,
                 double rel_tol) {
    gsl_set_error_handler_off();
    std::erase_if(breaks, [&](double x) { return !(x > a && x < b); });
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
        gsl_integration_workspace_alloc(2000), &gsl_integration_workspace_free);
    gsl_function fn;
    fn.function = &trampoline;
    fn.params = const_cast<std::function<double(double)>*>(&f);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double result = 0.0;
        double abserr = 0.0;
        gsl_integration_qag(&fn, breaks[i], breaks[i + 1], 0.0, rel_tol, 2000, GSL_INTEG_GAUSS31,
                            ws.get(), &result, &abserr);
        total += result;
    }
    return total;
}

double relative_error(double value, double reference) {
    const double scale = std::max(std::abs(reference), 1e-300);
    return std::abs(value - reference) / scale;
}

EventSequence random_sequence(std::mt19937_64& rng, std::size_t n, const ObservationWindow& window) {
    std::uniform_real_distribution<double> u(window.start(), window.end());
    std::vector<double> times;
    while (times.size() < n) {
        times.push_back(u(rng));
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
    }
    return EventSequence(std::move(times), window);
}

ExponentialKernel random_kernel(std::mt19937_64& rng, std::size_t order, double max_ratio) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> alphas(order);
    std::vector<double> betas(order);
    double total = 0.0;
    for (std::size_t j = 0; j < order; ++j) {
        alphas[j] = 0.05 + u(rng);
        betas[j] = std::exp(std::log(0.05) + u(rng) * std::log(200.0));
        total += alphas[j];
    }
    const double target = max_ratio * (0.2 + 0.8 * u(rng));
    for (double& a : alphas) {
        a *= target / total;
    }
    return ExponentialKernel(std::move(alphas), std::move(betas));
}

PiecewiseLinearBackground random_piecewise(std::mt19937_64& rng, const ObservationWindow& window,
                                           std::size_t knots) {
    std::uniform_real_distribution<double> u(0.2, 3.0);
    std::vector<double> times(knots);
    std::vector<double> values(knots);
    for (std::size_t l = 0; l < knots; ++l) {
        times[l] = window.start() + window.length() * static_cast<double>(l) / static_cast<double>(knots - 1);
        values[l] = u(rng);
    }
    times.back() = window.end();
    return PiecewiseLinearBackground(std::move(times), std::move(values));
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace hawkesbg::testing
