#include "hawkesbg/gof.hpp"

#include "hawkesbg/errors.hpp"
#include "hawkesbg/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hawkesbg {

namespace {

constexpr int kMaxTerms = 100;

std::vector<double> to_uniform(std::vector<double> compensators) {
    for (double& c : compensators) {
        c = -std::expm1(-c);
    }
    return compensators;
}

}  // namespace

double kolmogorov_survival(double z) {
    if (!(z > 0.0)) {
        return 1.0;
    }
    if (z < 1.0) {
        // P(K <= z) = sqrt(2 pi) / z * sum_k exp(-(2k-1)^2 pi^2 / (8 z^2))
        const double factor = -std::numbers::pi * std::numbers::pi / (8.0 * z * z);
        double sum = 0.0;
        for (int k = 1; k <= kMaxTerms; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(factor * odd * odd);
            sum += term;
            if (term < 1e-18 * sum) {
                break;
            }
        }
        const double cdf = std::sqrt(2.0 * std::numbers::pi) / z * sum;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= kMaxTerms; ++k) {
        const double term = std::exp(-2.0 * k * k * z * z);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_uniform(std::span<const double> values) {
    if (values.size() < 5) {
        throw ConfigError("KS test needs at least 5 values, got " + std::to_string(values.size()));
    }
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("KS uniformity test values must lie in [0, 1]");
        }
    }
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double above = static_cast<double>(i + 1) / n - sorted[i];
        const double below = sorted[i] - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    return {d, kolmogorov_survival(std::sqrt(n) * d), sorted.size()};
}

std::vector<double> rescaled_intervals(const EventSequence& seq, const ExponentialKernel& kernel,
                                       const BackgroundModel& bg) {
    return to_uniform(interval_compensators(seq, kernel, bg));
}

std::vector<double> rescaled_intervals(const EventSequence& seq, const ExponentialKernel& kernel,
                                       const AnalyticRate& bg) {
    return to_uniform(interval_compensators(seq, kernel, bg));
}

SecondLevelResult second_level_ks(std::span<const double> p_values, double level) {
    if (p_values.size() < 10) {
        throw ConfigError("second-level test needs at least 10 sessions, got " +
                          std::to_string(p_values.size()));
    }
    SecondLevelResult out;
    out.ks = ks_test_uniform(p_values);
    out.pass = out.ks.p_value > level;
    return out;
}

}  // namespace hawkesbg
