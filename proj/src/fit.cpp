#include "hawkesbg/errors.hpp"
#include "hawkesbg/estimate.hpp"
#include "hawkesbg/likelihood.hpp"

#include <cmath>
#include <limits>

namespace hawkesbg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_range(std::span<const double> x) {
    for (double v : x) {
        if (!(std::abs(v) <= 50.0)) {
            return false;
        }
    }
    return true;
}

ExponentialKernel decode_kernel(std::span<const double> x, std::size_t order) {
    std::vector<double> alphas(order);
    std::vector<double> betas(order);
    for (std::size_t j = 0; j < order; ++j) {
        alphas[j] = std::exp(x[j]);
        betas[j] = std::exp(x[order + j]);
    }
    return {std::move(alphas), std::move(betas)};
}

void append_kernel(std::vector<double>& x, const ExponentialKernel& kernel) {
    for (double a : kernel.alphas()) {
        x.push_back(std::log(std::max(a, 1e-12)));
    }
    for (double b : kernel.betas()) {
        x.push_back(std::log(b));
    }
}

FitDiagnostics diagnostics_from(const SimplexResult& search) {
    FitDiagnostics d;
    d.converged = search.converged;
    d.iterations = search.iterations;
    d.evaluations = search.evaluations;
    d.restarts = search.restarts;
    d.message = search.converged ? "converged" : "iteration cap reached";
    return d;
}

void finish(FitResult& fit) {
    fit.branching_ratio = branching_ratio(fit.kernel);
    fit.background_curve = background_curve(fit.background, fit.window);
    fit.score = score(fit);
}

FitResult fit_constant(const EventSequence& seq, std::size_t order, const FitOptions& options) {
    std::vector<double> x0{std::log(static_cast<double>(seq.size()) / seq.window().length())};
    append_kernel(x0, default_kernel(order));

    auto objective = [&](std::span<const double> x) -> double {
        if (!in_range(x)) {
            return kInf;
        }
        try {
            const BackgroundModel bg = ConstantBackground(std::exp(x[0]));
            return -log_likelihood(seq, decode_kernel(x.subspan(1), order), bg);
        } catch (const NumericalError&) {
            return kInf;
        }
    };
    const SimplexResult search = minimize_simplex(objective, x0, options.simplex);

    FitResult fit;
    fit.model = ModelSpec::constant();
    fit.window = seq.window();
    fit.n_events = seq.size();
    fit.kernel = decode_kernel(std::span<const double>(search.x).subspan(1), order);
    fit.background = ConstantBackground(std::exp(search.x[0]));
    fit.log_likelihood = -search.value;
    fit.num_parameters = 1 + 2 * order;
    fit.diagnostics = diagnostics_from(search);
    finish(fit);
    return fit;
}

FitResult fit_piecewise_linear(const EventSequence& seq, const ModelSpec& model, std::size_t order,
                               const FitOptions& options) {
    const auto& knots = model.knot_times;
    if (knots.size() < 2 || knots.front() != seq.window().start() ||
        knots.back() != seq.window().end()) {
        throw ConfigError("piecewise-linear knots must start at S and end at T");
    }
    // Start from the constant fit so the nested optimum is never lost.
    const FitResult base = fit_constant(seq, order, options);
    const double base_rate = std::get<ConstantBackground>(base.background).rate();
    const std::size_t k = knots.size();
    std::vector<double> x0(k, std::log(base_rate));
    append_kernel(x0, base.kernel);

    auto decode_background = [&](std::span<const double> x) {
        std::vector<double> values(k);
        for (std::size_t i = 0; i < k; ++i) {
            values[i] = std::exp(x[i]);
        }
        return PiecewiseLinearBackground(knots, std::move(values));
    };

    auto objective = [&](std::span<const double> x) -> double {
        if (!in_range(x)) {
            return kInf;
        }
        try {
            const BackgroundModel bg = decode_background(x);
            return -log_likelihood(seq, decode_kernel(x.subspan(k), order), bg);
        } catch (const NumericalError&) {
            return kInf;
        } catch (const ConfigError&) {
            return kInf;
        }
    };
    const SimplexResult search = minimize_simplex(objective, x0, options.simplex);

    FitResult fit;
    fit.model = model;
    fit.window = seq.window();
    fit.n_events = seq.size();
    fit.kernel = decode_kernel(std::span<const double>(search.x).subspan(k), order);
    fit.background = decode_background(search.x);
    fit.log_likelihood = -search.value;
    fit.num_parameters = k + 2 * order;
    fit.diagnostics = diagnostics_from(search);
    fit.diagnostics.iterations += base.diagnostics.iterations;
    fit.diagnostics.evaluations += base.diagnostics.evaluations;
    fit.diagnostics.converged = search.converged && base.diagnostics.converged;
    if (!fit.diagnostics.converged) {
        fit.diagnostics.message = "iteration cap reached";
    }
    finish(fit);
    return fit;
}

}  // namespace

ModelSpec ModelSpec::constant() {
    return ModelSpec{};
}

ModelSpec ModelSpec::piecewise_linear(std::vector<double> knot_times, std::string tag) {
    ModelSpec spec;
    spec.kind = ModelKind::PiecewiseLinear;
    spec.tag = std::move(tag);
    spec.knot_times = std::move(knot_times);
    return spec;
}

ModelSpec ModelSpec::bcb(std::size_t k, std::string tag) {
    ModelSpec spec;
    spec.kind = ModelKind::Bcb;
    spec.tag = std::move(tag);
    spec.k = k;
    return spec;
}

std::vector<double> interval_knots(const ObservationWindow& window, double interval) {
    if (!(interval > 0.0)) {
        throw ConfigError("knot interval must be positive");
    }
    std::vector<double> knots{window.start()};
    for (std::size_t l = 1;; ++l) {
        const double t = window.start() + static_cast<double>(l) * interval;
        if (!(window.end() - t >= 0.5 * interval)) {
            break;
        }
        knots.push_back(t);
    }
    knots.push_back(window.end());
    return knots;
}

ModelSpec model_from_tag(const std::string& tag, const ObservationWindow& window, std::size_t k) {
    if (tag == "const") {
        return ModelSpec::constant();
    }
    if (tag == "pl2h") {
        return ModelSpec::piecewise_linear(interval_knots(window, 7200.0), tag);
    }
    if (tag == "pl30") {
        return ModelSpec::piecewise_linear(interval_knots(window, 1800.0), tag);
    }
    if (tag.rfind("pl:", 0) == 0) {
        double interval = 0.0;
        try {
            interval = std::stod(tag.substr(3));
        } catch (const std::exception&) {
            throw ConfigError("bad knot interval in model tag '" + tag + "'");
        }
        return ModelSpec::piecewise_linear(interval_knots(window, interval), tag);
    }
    if (tag == "bcb") {
        return ModelSpec::bcb(k);
    }
    throw ConfigError("unknown model tag '" + tag + "' (expected const, pl2h, pl30, pl:<seconds> or bcb)");
}

FitResult fit_mle(const EventSequence& seq, const ModelSpec& model, std::size_t order,
                  const FitOptions& options) {
    if (order < 1) {
        throw ConfigError("kernel order M must be at least 1");
    }
    if (seq.empty()) {
        throw ConfigError("cannot fit an empty event sequence");
    }
    switch (model.kind) {
        case ModelKind::Constant:
            return fit_constant(seq, order, options);
        case ModelKind::PiecewiseLinear:
            return fit_piecewise_linear(seq, model, order, options);
        case ModelKind::Bcb:
            break;
    }
    throw ConfigError("fit_mle handles the constant and piecewise-linear models only");
}

FitResult fit_bcb(const EventSequence& seq, std::size_t order, std::size_t k,
                  const FitOptions& options) {
    if (order < 1) {
        throw ConfigError("kernel order M must be at least 1");
    }
    if (seq.size() < 4) {
        throw ConfigError("the spline background model needs at least 4 events");
    }
    auto basis = std::make_shared<const NaturalTimeBasis>(build_basis(seq.size(), k));
    HyperParams init = options.bcb_init ? *options.bcb_init : default_hyperparams(seq, order);
    init.W = options.W;
    if (options.fixed_V) {
        init.V = *options.fixed_V;
    }
    HyperOptions hyper_options;
    hyper_options.fixed_V = options.fixed_V;
    hyper_options.simplex = options.simplex;
    hyper_options.map = options.map;
    HyperFit hf = optimize_hyperparams(seq, *basis, init, hyper_options);

    FitResult fit;
    fit.model = ModelSpec::bcb(k);
    fit.window = seq.window();
    fit.n_events = seq.size();
    fit.kernel = hf.hyper.kernel;
    fit.background = SplineBackground(hf.laplace.map.coeffs, basis, seq);
    fit.hyper = hf.hyper;
    fit.log_likelihood = hf.laplace.map.log_likelihood;
    fit.log_marginal_likelihood = hf.laplace.log_marginal_likelihood;
    fit.num_parameters = 2 * order + (options.fixed_V ? 1 : 2);
    fit.diagnostics = diagnostics_from(hf.search);
    finish(fit);
    return fit;
}

FitResult fit_model(const EventSequence& seq, const ModelSpec& model, std::size_t order,
                    const FitOptions& options) {
    if (model.kind == ModelKind::Bcb) {
        FitResult fit = fit_bcb(seq, order, model.k, options);
        fit.model = model;
        return fit;
    }
    return fit_mle(seq, model, order, options);
}

double score(const FitResult& fit) {
    const double penalty = static_cast<double>(fit.num_parameters);
    if (fit.model.kind == ModelKind::Bcb) {
        return fit.log_marginal_likelihood.value_or(-kInf) - penalty;
    }
    return fit.log_likelihood - penalty;
}

std::vector<std::pair<double, double>> background_curve(const BackgroundModel& bg,
                                                        const ObservationWindow& window) {
    std::vector<std::pair<double, double>> curve;
    if (const auto* c = std::get_if<ConstantBackground>(&bg)) {
        curve.emplace_back(window.start(), c->rate());
        curve.emplace_back(window.end(), c->rate());
    } else if (const auto* pl = std::get_if<PiecewiseLinearBackground>(&bg)) {
        for (std::size_t i = 0; i < pl->knot_times().size(); ++i) {
            curve.emplace_back(pl->knot_times()[i], pl->knot_values()[i]);
        }
    } else {
        const auto& spline = std::get<SplineBackground>(bg);
        const auto rates = spline.segment_rates();
        for (std::size_t i = 0; i < rates.size(); ++i) {
            curve.emplace_back(spline.segment_start(i), rates[i]);
        }
        curve.emplace_back(spline.window().end(), rates.back());
    }
    return curve;
}

}  // namespace hawkesbg
