// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 4 7        run a subset
//   acceptance -j 4 ...   worker threads for the replicate studies

#include "cli_app.hpp"

#include "hawkesbg/basis.hpp"
#include "hawkesbg/estimate.hpp"
#include "hawkesbg/event_io.hpp"
#include "hawkesbg/gof.hpp"
#include "hawkesbg/likelihood.hpp"
#include "hawkesbg/simulate.hpp"

#include "test_support.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace hawkesbg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::size_t g_workers = 1;

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

std::vector<double> random_coeffs(std::mt19937_64& rng, std::size_t m, double centre, double spread) {
    std::normal_distribution<double> normal(centre, spread);
    std::vector<double> a(m);
    for (double& x : a) {
        x = normal(rng);
    }
    return a;
}

// ------------------------------------------------------------------ shared studies

// U-shape study: single exponential alpha = 0.5, beta = 1, about 2000 events.
const ObservationWindow kUshapeWindow(0.0, 1000.0);
const ExponentialKernel kUshapeKernel({0.5}, {1.0});
AnalyticRate ushape_rate() {
    return scenario_ushape(kUshapeWindow, 3.0 / 7.0, 5.0);
}

struct UshapeStudy {
    std::vector<EventSequence> sessions;
    std::vector<FitResult> fits;
    double seconds = 0.0;
};

const UshapeStudy& ushape_study() {
    static std::optional<UshapeStudy> study;
    if (!study) {
        const auto start = std::chrono::steady_clock::now();
        UshapeStudy s;
        s.sessions = simulate_batch(ushape_rate(), kUshapeKernel, 100, 20240601, g_workers);
        s.fits.resize(s.sessions.size());
        parallel_for(s.sessions.size(), g_workers, [&](std::size_t r) { s.fits[r] = fit_bcb(s.sessions[r], 1, 50); });
        s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        study = std::move(s);
    }
    return *study;
}

// News-shock study: step to ten times the base rate, relaxing over 5% of the window.
const ObservationWindow kNewsWindow(0.0, 1000.0);
const ExponentialKernel kNewsKernel({0.4}, {1.0});
AnalyticRate news_rate() {
    return scenario_news_shock(kNewsWindow, 400.0, 1.0, 10.0, 50.0);
}

// ------------------------------------------------------------------ criteria

Outcome likelihood_oracle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> size(2, 300);
    double worst = 0.0;
    int families[3] = {0, 0, 0};
    for (int trial = 0; trial < 51; ++trial) {
        const ObservationWindow w(0.0, 50.0 + 5.0 * trial);
        const std::size_t n = size(rng);
        const auto seq = testing::random_sequence(rng, n, w);
        const auto kernel = testing::random_kernel(rng, 1 + trial % 4);
        BackgroundModel bg = ConstantBackground(static_cast<double>(n) / w.length());
        const int family = trial % 3;
        if (family == 1) {
            bg = testing::random_piecewise(rng, w, 2 + trial % 9);
        } else if (family == 2) {
            auto basis = std::make_shared<const NaturalTimeBasis>(build_basis(n, 25));
            bg = SplineBackground(random_coeffs(rng, basis->basis_count(), 0.0, 1.0), basis, seq);
        }
        ++families[family];
        worst = std::max(worst, testing::relative_error(log_likelihood(seq, kernel, bg),
                                                        log_likelihood_direct(seq, kernel, bg)));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 1e-9 && seconds < 10.0,
            fmt("51 instances (%d const, %d pl, %d spline), max rel err %.2e, %.2f s", families[0], families[1],
                families[2], worst, seconds)};
}

Outcome derivative_checks() {
    std::mt19937_64 rng(2);
    double worst_grad = 0.0;
    double worst_hess = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const ObservationWindow w(0.0, 100.0);
        const std::size_t n = 30 + 15 * trial;
        const auto seq = testing::random_sequence(rng, n, w);
        const auto kernel = testing::random_kernel(rng, 1 + trial % 3);
        const auto basis = build_basis(n, 10);
        const auto a = random_coeffs(rng, basis.basis_count(), std::log(0.5 * n / w.length()), 0.5);
        const std::size_t m = a.size();
        const SplineLikelihood lik(seq, kernel, basis);
        const auto grad = loglik_grad_coeffs(seq, kernel, basis, a);
        const auto hess = loglik_hessian_coeffs(seq, kernel, basis, a).to_dense();
        double gscale = 0.0;
        for (double g : grad) {
            gscale = std::max(gscale, std::abs(g));
        }
        const double hscale = hess.cwiseAbs().maxCoeff();
        for (std::size_t j = 0; j < m; ++j) {
            auto plus = a;
            auto minus = a;
            plus[j] += 1e-6;
            minus[j] -= 1e-6;
            const double fd = (lik.value(plus) - lik.value(minus)) / 2e-6;
            worst_grad = std::max(worst_grad, std::abs(grad[j] - fd) / std::max(std::abs(fd), gscale));
            plus[j] = a[j] + 1e-5;
            minus[j] = a[j] - 1e-5;
            const auto gp = loglik_grad_coeffs(seq, kernel, basis, plus);
            const auto gm = loglik_grad_coeffs(seq, kernel, basis, minus);
            for (std::size_t k = 0; k < m; ++k) {
                const double hfd = (gp[k] - gm[k]) / 2e-5;
                worst_hess = std::max(worst_hess, std::abs(hess(k, j) - hfd) / std::max(std::abs(hfd), hscale));
            }
        }
    }
    return {worst_grad <= 1e-5 && worst_hess <= 1e-4,
            fmt("20 configurations, gradient rel err %.2e, Hessian rel err %.2e", worst_grad, worst_hess)};
}

Outcome basis_partition() {
    double worst = 0.0;
    int bases = 0;
    for (std::size_t n : {1, 50, 500, 5000}) {
        for (std::size_t k : {25, 50, 100, 200}) {
            const auto b = build_basis(n, k);
            ++bases;
            for (std::size_t i = 0; i < b.value_rows(); ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < b.basis_count(); ++j) {
                    sum += b.value(i, j);
                }
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
    }
    return {worst <= 1e-12, fmt("%d bases, max |row sum - 1| = %.2e", bases, worst)};
}

Outcome ushape_recovery() {
    const auto& study = ushape_study();
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> sizes;
    int flagged = 0;
    for (std::size_t r = 0; r < study.fits.size(); ++r) {
        alphas.push_back(study.fits[r].kernel.alphas()[0]);
        betas.push_back(study.fits[r].kernel.betas()[0]);
        sizes.push_back(static_cast<double>(study.sessions[r].size()));
        flagged += !study.fits[r].diagnostics.converged;
    }
    const double a_med = median(alphas);
    const double b_med = median(betas);

    // pointwise median of the fitted background over the central 90% of the window
    const auto truth = ushape_rate();
    double worst_mu = 0.0;
    const double lo = kUshapeWindow.start() + 0.05 * kUshapeWindow.length();
    const double hi = kUshapeWindow.end() - 0.05 * kUshapeWindow.length();
    for (int g = 0; g <= 180; ++g) {
        const double t = lo + (hi - lo) * g / 180.0;
        std::vector<double> mus;
        for (const auto& fit : study.fits) {
            mus.push_back(background_eval(fit.background, t));
        }
        const double true_mu = background_eval(truth, t);
        worst_mu = std::max(worst_mu, std::abs(median(mus) - true_mu) / true_mu);
    }
    const bool pass = std::abs(a_med - 0.5) <= 0.10 && std::abs(b_med - 1.0) <= 0.25 && worst_mu <= 0.30 &&
                      study.seconds < 1800.0;
    return {pass, fmt("100 sessions (mean n = %.0f, %d flagged), median alpha %.3f, median beta %.3f, "
                      "worst median mu rel err %.3f, %.0f s",
                      mean(sizes), flagged, a_med, b_med, worst_mu, study.seconds)};
}

Outcome laplace_accuracy() {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const double length = 30.0 + 12.0 * trial;
        const auto seq = simulate(scenario_ushape(ObservationWindow(0.0, length), 0.7, 3.0),
                                  ExponentialKernel({0.25 + 0.02 * trial}, {1.5}), 500 + trial);
        const std::size_t m = 4 + trial % 2;
        const NaturalTimeBasis basis(seq.size(), m);
        HyperParams h;
        h.kernel = ExponentialKernel({0.25 + 0.02 * trial}, {1.5});
        h.V = std::pow(10.0, -1.5 + 0.4 * trial);
        h.mu_c = static_cast<double>(seq.size()) / length;
        const auto lap = log_marginal_likelihood(seq, h, basis);

        // importance sampling from the Laplace Gaussian, covariance inflated by 1.5^2
        const SmoothnessPrior prior(basis, h.V, h.W, h.mu_c);
        const SplineLikelihood lik(seq, h.kernel, basis);
        const Eigen::MatrixXd hess = lik.evaluate(lap.map.coeffs).neg_hessian.to_dense() + prior.precision();
        const Eigen::MatrixXd chol = (2.25 * hess.inverse()).llt().matrixL();
        const double log_q_norm = -0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi) -
                                  chol.diagonal().array().log().sum();
        std::normal_distribution<double> normal(0.0, 1.0);
        const int samples = 100000;
        std::vector<double> log_w(samples);
        std::vector<double> a(m);
        Eigen::VectorXd z(m);
        for (int s = 0; s < samples; ++s) {
            for (std::size_t j = 0; j < m; ++j) {
                z(j) = normal(rng);
            }
            const Eigen::VectorXd x = chol * z;
            for (std::size_t j = 0; j < m; ++j) {
                a[j] = lap.map.coeffs[j] + x(j);
            }
            log_w[s] = lik.value(a) + prior.log_density(a) - (log_q_norm - 0.5 * z.squaredNorm());
        }
        const double top = *std::max_element(log_w.begin(), log_w.end());
        double sum = 0.0;
        for (double lw : log_w) {
            sum += std::exp(lw - top);
        }
        const double oracle = top + std::log(sum / samples);
        worst = std::max(worst, std::abs(lap.log_marginal_likelihood - oracle));
    }
    return {worst <= 0.2, fmt("10 problems with m in {4, 5}, max |Laplace - Monte Carlo| = %.4f nats", worst)};
}

Outcome branching_bias() {
    const auto sessions = simulate_batch(news_rate(), kNewsKernel, 50, 777, g_workers);
    std::vector<double> a_const(sessions.size());
    std::vector<double> a_bcb(sessions.size());
    parallel_for(sessions.size(), g_workers, [&](std::size_t r) {
        a_const[r] = fit_mle(sessions[r], ModelSpec::constant(), 1).branching_ratio;
        a_bcb[r] = fit_bcb(sessions[r], 1, 50).branching_ratio;
    });
    const double mc = mean(a_const);
    const double mb = mean(a_bcb);
    return {mc > mb && std::abs(mb - 0.4) <= 0.1,
            fmt("50 news-shock sessions, mean alpha CONST %.3f, BCB %.3f (true 0.4)", mc, mb)};
}

Outcome gof_calibration() {
    const auto& study = ushape_study();
    const auto truth = ushape_rate();
    std::vector<double> p_bcb;
    std::vector<double> p_true;
    for (std::size_t r = 0; r < study.fits.size(); ++r) {
        const auto tau = rescaled_intervals(study.sessions[r], study.fits[r].kernel, study.fits[r].background);
        p_bcb.push_back(ks_test_uniform(tau).p_value);
        p_true.push_back(ks_test_uniform(rescaled_intervals(study.sessions[r], kUshapeKernel, truth)).p_value);
    }
    const auto good = second_level_ks(p_bcb);
    const auto at_truth = second_level_ks(p_true);
    const auto upper_decile = std::count_if(p_bcb.begin(), p_bcb.end(), [](double p) { return p >= 0.9; });

    // a persistent step: the rate triples half way through and stays there
    const auto step = scenario_news_shock(kNewsWindow, 500.0, 1.0, 3.0, 1e12);
    const auto steps = simulate_batch(step, kNewsKernel, 100, 4242, g_workers);
    std::vector<double> p_const(steps.size());
    parallel_for(steps.size(), g_workers, [&](std::size_t r) {
        const auto fit = fit_mle(steps[r], ModelSpec::constant(), 1);
        p_const[r] = ks_test_uniform(rescaled_intervals(steps[r], fit.kernel, fit.background)).p_value;
    });
    const auto bad = second_level_ks(p_const);
    return {good.pass && !bad.pass,
            fmt("BCB fits on 100 U-shape sessions: second-level p = %.2e (%s, %ld of 100 session p-values >= 0.9; "
                "same sessions at the true parameters: p = %.3f); CONST on 100 step sessions: p = %.2e (%s)",
                good.ks.p_value, good.pass ? "pass" : "reject", static_cast<long>(upper_decile),
                at_truth.ks.p_value, bad.ks.p_value, bad.pass ? "pass" : "reject")};
}

Outcome stationary_limit() {
    std::vector<EventSequence> sequences;
    sequences.push_back(simulate(ushape_rate(), kUshapeKernel, 8));
    sequences.push_back(simulate(news_rate(), kNewsKernel, 8));
    sequences.push_back(simulate(scenario_constant(ObservationWindow(0.0, 2000.0), 0.6), ExponentialKernel({0.3}, {2.0}), 8));
    FitOptions opts;
    opts.fixed_V = 1e8;
    double worst = 0.0;
    for (const auto& seq : sequences) {
        const auto fit = fit_bcb(seq, 1, 50, opts);
        const double log_mu_c = std::log(fit.hyper->mu_c);
        for (double mu : std::get<SplineBackground>(fit.background).segment_rates()) {
            worst = std::max(worst, std::abs(std::log(mu) - log_mu_c));
        }
    }
    return {worst <= 1e-2, fmt("3 sequences at V = 1e8, sup |log mu(t) - log mu_c| = %.2e", worst)};
}

Outcome performance() {
    // simulate a little more than needed and keep exactly 5000 events
    const ObservationWindow w(0.0, 1400.0);
    const auto full = simulate(scenario_ushape(w, 0.86, 5.0), ExponentialKernel({0.3, 0.2}, {0.5, 5.0}), 99);
    if (full.size() < 5000) {
        return {false, fmt("simulation produced only %zu events", full.size())};
    }
    const std::vector<double> kept(full.times().begin(), full.times().begin() + 5000);
    const EventSequence seq(kept, ObservationWindow(0.0, 0.5 * (kept.back() + full[5000])));
    const auto start = std::chrono::steady_clock::now();
    const auto fit = fit_bcb(seq, 2, 50);
    const double fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::size_t m_fit = std::get<SplineBackground>(fit.background).basis().basis_count();

    // per-step cost of the inner Newton iteration at n = 50 (m - 3)
    std::vector<double> log_m;
    std::vector<double> log_t;
    std::string steps;
    for (std::size_t m : {53, 103, 203, 403}) {
        const std::size_t n = 50 * (m - 3);
        const ObservationWindow wm(0.0, static_cast<double>(n));
        const auto raw = simulate(scenario_ushape(wm, 0.5, 5.0), ExponentialKernel({0.5}, {1.0}), m);
        const NaturalTimeBasis basis(raw.size(), m);
        HyperParams h;
        h.kernel = ExponentialKernel({0.5}, {1.0});
        h.V = 10.0;
        h.mu_c = static_cast<double>(raw.size()) / wm.length();
        std::size_t iterations = 0;
        const auto t0 = std::chrono::steady_clock::now();
        double elapsed = 0.0;
        do {
            iterations += std::max<std::size_t>(1, map_estimate(raw, h, basis).iterations);
            elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } while (elapsed < 0.5);
        const double per_step = elapsed / static_cast<double>(iterations);
        log_m.push_back(std::log(static_cast<double>(basis.basis_count())));
        log_t.push_back(std::log(per_step));
        steps += fmt("%s m=%zu %.2f ms", steps.empty() ? "" : ",", basis.basis_count(), 1e3 * per_step);
    }
    // least-squares slope of log time against log m
    const double mx = mean(log_m);
    const double my = mean(log_t);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < log_m.size(); ++i) {
        sxy += (log_m[i] - mx) * (log_t[i] - my);
        sxx += (log_m[i] - mx) * (log_m[i] - mx);
    }
    const double slope = sxy / sxx;
    return {fit_seconds < 300.0 && m_fit == basis_count(seq.size(), 50) && slope <= 1.3,
            fmt("fit n=%zu M=2 m=%zu in %.1f s; Newton step%s; log-log slope %.2f", seq.size(), m_fit,
                fit_seconds, steps.c_str(), slope)};
}

// Runs every CLI command twice into separate directories and compares bytes.
Outcome cli_determinism() {
    const fs::path root = fs::path(HAWKESBG_TEST_TMP) / "determinism";
    fs::remove_all(root);
    auto run = [](std::vector<std::string> args, const fs::path& stdout_file) {
        args.insert(args.begin(), "hawkesbg");
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(args, out, err);
        std::ofstream(stdout_file, std::ios::binary) << out.str() << "exit=" << code << '\n';
        return code;
    };

    // a synthetic tick file shared by both runs
    fs::create_directories(root);
    {
        std::ofstream ticks(root / "ticks.csv", std::ios::binary);
        ticks << "timestamp,price,volume,contract\n";
        std::mt19937_64 rng(3);
        std::int64_t price = 10000;
        for (std::int64_t t = 0; t < 22200; t += 1 + static_cast<std::int64_t>(rng() % 20)) {
            price += 5 * (static_cast<std::int64_t>(rng() % 5) - 2);
            ticks << t << ',' << price << ',' << 1 + rng() % 9 << ',' << (rng() % 10 ? "A" : "B") << '\n';
        }
    }

    int failures = 0;
    for (const char* pass : {"one", "two"}) {
        const fs::path d = root / pass;
        fs::create_directories(d);
        const std::string ds = d.string();
        failures += run({"simulate", "--scenario", "ushape", "--end", "600", "-n", "12", "--seed", "11",
                         "--output-dir", ds + "/sim"},
                        d / "simulate.out") != 0;
        failures += run({"simulate", "--scenario", "news", "--end", "600", "-n", "2", "--seed", "12", "--alpha",
                         "0.3,0.1", "--beta", "1,5", "--output-dir", ds + "/news"},
                        d / "news.out") != 0;
        failures += run({"filter", (root / "ticks.csv").string(), "-o", ds + "/events.csv", "--jitter-seed", "7"},
                        d / "filter.out") != 0;
        std::vector<std::string> fit_args{"fit"};
        for (int r = 0; r < 12; ++r) {
            fit_args.push_back(ds + fmt("/sim/replicate_%03d.csv", r));
        }
        for (const char* extra : {"--model", "bcb", "--output-dir"}) {
            fit_args.push_back(extra);
        }
        fit_args.push_back(ds + "/sim");
        run(fit_args, d / "fit_batch.out");
        run({"fit", ds + "/events.csv", "--model", "pl2h", "-M", "2", "-o", ds + "/events.fit.json", "--curve",
             ds + "/events.curve.csv"},
            d / "fit.out");
        run({"compare", ds + "/sim/replicate_000.csv", "--models", "const,pl:120,bcb", "-M", "1,2", "-o",
             ds + "/compare.csv"},
            d / "compare.out");
        run({"gof", ds + "/sim/replicate_000.csv", ds + "/sim/replicate_000.fit.json", "-o", ds + "/gof.json"},
            d / "gof.out");
        run({"gof-batch", ds + "/sim", "--sessions", ds + "/sessions.csv", "-o", ds + "/verdict.json"},
            d / "gof_batch.out");
        run({"basis", "-n", "300", "-k", "40", "-o", ds + "/basis.csv"}, d / "basis.out");
    }

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::size_t compared = 0;
    std::size_t differing = 0;
    std::string first_diff;
    for (const auto& entry : fs::recursive_directory_iterator(root / "one")) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const auto rel = fs::relative(entry.path(), root / "one");
        const fs::path twin = root / "two" / rel;
        ++compared;
        // manifests and outputs embed no paths, so the twin must match byte for byte
        if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) {
            ++differing;
            if (first_diff.empty()) {
                first_diff = rel.string();
            }
        }
    }
    return {failures == 0 && differing == 0 && compared > 40,
            fmt("7 commands, %zu output files compared, %zu differ%s%s", compared, differing,
                first_diff.empty() ? "" : ", first: ", first_diff.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"recursive log-likelihood equals the direct double sum", likelihood_oracle},
        {"spline gradient and Hessian match finite differences", derivative_checks},
        {"basis partition of unity over the (n, k) grid", basis_partition},
        {"U-shape replication recovers alpha, beta and mu(t)", ushape_recovery},
        {"Laplace evidence agrees with a Monte Carlo oracle", laplace_accuracy},
        {"constant background overestimates the branching ratio", branching_bias},
        {"two-level KS test separates good and bad fits", gof_calibration},
        {"stiff prior reduces to the stationary model", stationary_limit},
        {"fit time and linear Newton-step scaling", performance},
        {"CLI outputs are byte-identical across re-runs", cli_determinism},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "-j" && i + 1 < argc) {
            g_workers = std::max(1, std::atoi(argv[++i]));
        } else {
            selected.push_back(std::atoi(argv[i]));
        }
    }
    if (selected.empty()) {
        for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) {
            selected.push_back(i);
        }
    }
    if (g_workers == 1) {
        g_workers = std::max(1u, std::thread::hardware_concurrency());
    }

    int failed = 0;
    for (int id : selected) {
        if (id < 1 || id > static_cast<int>(criteria.size())) {
            std::cerr << "unknown criterion " << id << '\n';
            return 2;
        }
        const auto& [name, fn] = criteria[id - 1];
        Outcome outcome;
        try {
            outcome = fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failed += !outcome.pass;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " | "
                  << outcome.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
