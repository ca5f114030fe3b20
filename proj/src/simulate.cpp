#include "hawkesbg/simulate.hpp"

#include "hawkesbg/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace hawkesbg {

namespace {

void require_stable(const ExponentialKernel& kernel) {
    if (!(branching_ratio(kernel) < 1.0)) {
        throw ConfigError("unstable kernel: branching ratio " + std::to_string(branching_ratio(kernel)) +
                          " must be below 1 for simulation");
    }
}

// Shared thinning loop. sup(a, b) bounds the background on [a, b] and
// next_break(t) is the first background discontinuity after t (or +inf).
template <class Rate, class Sup, class NextBreak>
EventSequence thin(const ObservationWindow& window, Rate&& rate, Sup&& sup, NextBreak&& next_break,
                   const ExponentialKernel& kernel, std::uint64_t seed,
                   const SimulationOptions& options) {
    require_stable(kernel);
    RandomStream rng(seed);
    const std::size_t order = kernel.order();
    std::vector<double> excitation(order, 0.0);
    const double step = window.length() * options.lookahead_fraction;
    const double end = window.end();

    auto decay = [&](double dt) {
        for (std::size_t j = 0; j < order; ++j) {
            excitation[j] *= std::exp(-kernel.betas()[j] * dt);
        }
    };
    auto total_excitation = [&] {
        double s = 0.0;
        for (double e : excitation) {
            s += e;
        }
        return s;
    };

    std::vector<double> times;
    double t = window.start();
    while (t < end) {
        const double horizon = std::min({t + step, next_break(t), end});
        const double bound = sup(t, horizon) + total_excitation();
        if (!std::isfinite(bound)) {
            throw ConfigError("background rate is unbounded on the window");
        }
        const double wait = rng.exponential(bound);
        if (t + wait >= horizon) {
            decay(horizon - t);
            t = horizon;
            continue;
        }
        decay(wait);
        t += wait;
        const double intensity = rate(t) + total_excitation();
        if (rng.uniform() * bound <= intensity && (times.empty() || times.back() < t)) {
            times.push_back(t);
            for (std::size_t j = 0; j < order; ++j) {
                excitation[j] += kernel.alphas()[j] * kernel.betas()[j];
            }
        }
    }
    return EventSequence(std::move(times), window);
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

EventSequence simulate(const ObservationWindow& window, const BackgroundModel& bg,
                       const ExponentialKernel& kernel, std::uint64_t seed,
                       const SimulationOptions& options) {
    std::vector<double> breaks;
    if (const auto* pl = std::get_if<PiecewiseLinearBackground>(&bg)) {
        breaks.assign(pl->knot_times().begin(), pl->knot_times().end());
    } else if (const auto* spline = std::get_if<SplineBackground>(&bg)) {
        breaks.assign(spline->events().times().begin(), spline->events().times().end());
    }
    auto next_break = [&](double t) {
        auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
        return it == breaks.end() ? window.end() : *it;
    };
    auto rate = [&](double t) { return background_eval(bg, t); };
    auto sup = [&](double a, double b) { return background_supremum(bg, a, b); };
    return thin(window, rate, sup, next_break, kernel, seed, options);
}

EventSequence simulate(const AnalyticRate& bg, const ExponentialKernel& kernel, std::uint64_t seed,
                       const SimulationOptions& options) {
    std::vector<double> breaks = bg.breakpoints;
    std::sort(breaks.begin(), breaks.end());
    auto next_break = [&](double t) {
        auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
        return it == breaks.end() ? bg.window.end() : *it;
    };
    const std::size_t samples = std::max<std::size_t>(2, options.supremum_samples);
    auto sup = [&](double a, double b) {
        double best = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            const double frac = static_cast<double>(s) / static_cast<double>(samples - 1);
            best = std::max(best, bg.rate(a + frac * (b - a)));
        }
        return best * options.safety_factor;
    };
    return thin(bg.window, bg.rate, sup, next_break, kernel, seed, options);
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::vector<EventSequence> simulate_batch(const AnalyticRate& bg, const ExponentialKernel& kernel,
                                          std::size_t count, std::uint64_t seed,
                                          std::size_t workers, const SimulationOptions& options) {
    require_stable(kernel);
    std::vector<std::optional<EventSequence>> slots(count);
    parallel_for(count, workers, [&](std::size_t r) {
        slots[r].emplace(simulate(bg, kernel, replicate_seed(seed, r), options));
    });
    std::vector<EventSequence> out;
    out.reserve(count);
    for (auto& slot : slots) {
        out.push_back(std::move(*slot));
    }
    return out;
}

AnalyticRate scenario_ushape(const ObservationWindow& window, double min_rate, double ratio) {
    if (!(min_rate > 0.0) || !(ratio >= 1.0)) {
        throw ConfigError("U-shape needs min_rate > 0 and ratio >= 1");
    }
    const double mid = 0.5 * (window.start() + window.end());
    const double half = 0.5 * window.length();
    const double curvature = ratio - 1.0;
    AnalyticRate out{"ushape", window, {}, {}, {}};
    out.rate = [=](double t) {
        const double x = (t - mid) / half;
        return min_rate * (1.0 + curvature * x * x);
    };
    // Antiderivative in x = (t - mid) / half: half * min_rate (x + c x^3 / 3).
    out.integral = [=](double a, double b) {
        auto prim = [&](double t) {
            const double x = (t - mid) / half;
            return half * min_rate * (x + curvature * x * x * x / 3.0);
        };
        return prim(b) - prim(a);
    };
    return out;
}

AnalyticRate scenario_news_shock(const ObservationWindow& window, double t_news, double base_rate,
                                 double jump, double relaxation) {
    if (!(t_news > window.start() && t_news < window.end())) {
        throw ConfigError("news time must lie inside the window");
    }
    if (!(base_rate > 0.0) || !(jump >= 1.0)) {
        throw ConfigError("news shock needs base_rate > 0 and jump >= 1");
    }
    const double tau = relaxation > 0.0 ? relaxation : 0.05 * window.length();
    AnalyticRate out{"news", window, {}, {}, {t_news}};
    out.rate = [=](double t) {
        if (t < t_news) {
            return base_rate;
        }
        return base_rate * (1.0 + (jump - 1.0) * std::exp(-(t - t_news) / tau));
    };
    out.integral = [=](double a, double b) {
        // Excess part: base (jump - 1) tau (exp(-(a' - t_news)/tau) - exp(-(b - t_news)/tau)).
        double total = base_rate * (b - a);
        const double lo = std::max(a, t_news);
        if (b > lo) {
            total += base_rate * (jump - 1.0) * tau *
                     (std::exp(-(lo - t_news) / tau) - std::exp(-(b - t_news) / tau));
        }
        return total;
    };
    return out;
}

AnalyticRate scenario_constant(const ObservationWindow& window, double rate) {
    if (!(rate > 0.0)) {
        throw ConfigError("constant rate must be positive");
    }
    AnalyticRate out{"constant", window, {}, {}, {}};
    out.rate = [=](double) { return rate; };
    out.integral = [=](double a, double b) { return rate * (b - a); };
    return out;
}

}  // namespace hawkesbg
