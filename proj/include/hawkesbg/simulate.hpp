#pragma once

#include "hawkesbg/core.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace hawkesbg {

// Uniform and exponential draws on top of mt19937_64, with fixed bit-level
// conversions so sequences do not depend on the standard library's
// distribution implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on (0, 1].
    double uniform_open0() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }
    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

private:
    std::mt19937_64 engine_;
};

// Independent stream seed for replicate `index` of a batch (SplitMix64 mix).
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t index);

struct SimulationOptions {
    // Lookahead horizon for the dominating rate, as a fraction of the window.
    double lookahead_fraction = 1.0 / 256.0;
    // Analytic rates: supremum over a horizon from this many samples times safety.
    std::size_t supremum_samples = 16;
    double safety_factor = 1.05;
};

// Thinning simulation of a Hawkes process with time-varying background.
// Throws ConfigError for an unstable kernel (branching ratio >= 1) or a
// background whose supremum is not finite.
EventSequence simulate(const ObservationWindow& window, const BackgroundModel& bg,
                       const ExponentialKernel& kernel, std::uint64_t seed,
                       const SimulationOptions& options = {});
EventSequence simulate(const AnalyticRate& bg, const ExponentialKernel& kernel, std::uint64_t seed,
                       const SimulationOptions& options = {});

// Replicates r = 0..count-1 with seeds replicate_seed(seed, r), using up to
// `workers` threads. Output order is replicate order.
std::vector<EventSequence> simulate_batch(const AnalyticRate& bg, const ExponentialKernel& kernel,
                                          std::size_t count, std::uint64_t seed,
                                          std::size_t workers = 1,
                                          const SimulationOptions& options = {});

// Intraday U-shape: mu(t) = min_rate (1 + (ratio - 1) ((t - mid) / half)^2),
// lowest mid-window, ratio times higher at both ends.
AnalyticRate scenario_ushape(const ObservationWindow& window, double min_rate = 1.0,
                             double ratio = 5.0);

// Step-and-decay after an announcement at t_news:
// mu(t) = base for t < t_news, base (1 + (jump - 1) exp(-(t - t_news) / relaxation)) after.
// relaxation <= 0 selects 5% of the window length.
AnalyticRate scenario_news_shock(const ObservationWindow& window, double t_news,
                                 double base_rate = 1.0, double jump = 10.0,
                                 double relaxation = 0.0);

AnalyticRate scenario_constant(const ObservationWindow& window, double rate);

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace hawkesbg
