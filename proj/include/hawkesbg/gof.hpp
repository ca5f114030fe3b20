#pragma once

#include "hawkesbg/core.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hawkesbg {

struct KsResult {
    double statistic = 0.0;  // D = sup |F_N(x) - x|
    double p_value = 1.0;
    std::size_t n = 0;
};

// P(K > z) for the Kolmogorov distribution, each series capped at 100 terms.
double kolmogorov_survival(double z);

// One-sample KS test against Uniform(0, 1), asymptotic p-value from sqrt(N) D.
// Throws ConfigError for fewer than 5 values and DomainError for values outside [0, 1].
KsResult ks_test_uniform(std::span<const double> values);

// tau_i = 1 - exp(-Lambda_i) over the n - 1 inter-event intervals. Empty when n < 2.
std::vector<double> rescaled_intervals(const EventSequence& seq, const ExponentialKernel& kernel,
                                       const BackgroundModel& bg);
std::vector<double> rescaled_intervals(const EventSequence& seq, const ExponentialKernel& kernel,
                                       const AnalyticRate& bg);

struct SecondLevelResult {
    bool pass = false;
    KsResult ks;
};

// KS uniformity test applied to one p-value per session; passes when p > 0.05.
// Throws ConfigError for fewer than 10 sessions.
SecondLevelResult second_level_ks(std::span<const double> p_values, double level = 0.05);

}  // namespace hawkesbg
