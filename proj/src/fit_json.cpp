#include "hawkesbg/fit_json.hpp"

#include "hawkesbg/errors.hpp"
#include "hawkesbg/event_io.hpp"

#include <ostream>

namespace hawkesbg {

using nlohmann::json;

namespace {

json vec(std::span<const double> v) {
    return json(std::vector<double>(v.begin(), v.end()));
}

}  // namespace

json fit_to_json(const FitResult& fit) {
    json params;
    params["alpha"] = vec(fit.kernel.alphas());
    params["beta"] = vec(fit.kernel.betas());
    if (const auto* c = std::get_if<ConstantBackground>(&fit.background)) {
        params["mu_c"] = c->rate();
    } else if (const auto* pl = std::get_if<PiecewiseLinearBackground>(&fit.background)) {
        params["knot_times"] = vec(pl->knot_times());
        params["knot_values"] = vec(pl->knot_values());
    } else {
        const auto& spline = std::get<SplineBackground>(fit.background);
        params["mu_c"] = fit.hyper ? fit.hyper->mu_c : 0.0;
        params["V"] = fit.hyper ? fit.hyper->V : 0.0;
        params["W"] = fit.hyper ? fit.hyper->W : 0.0;
        params["k"] = fit.model.k;
        params["basis_count"] = spline.basis().basis_count();
        params["coefficients"] = vec(spline.coeffs());
    }

    json curve = json::array();
    for (const auto& [t, mu] : fit.background_curve) {
        curve.push_back(json::array({t, mu}));
    }

    json doc;
    doc["format"] = "hawkesbg-fit/1";
    doc["model"] = fit.model.tag;
    doc["kernel_order"] = fit.kernel.order();
    doc["n_events"] = fit.n_events;
    doc["window"] = {{"start", fit.window.start()}, {"end", fit.window.end()}};
    doc["parameters"] = std::move(params);
    doc["log_likelihood"] = fit.log_likelihood;
    if (fit.log_marginal_likelihood) {
        doc["log_marginal_likelihood"] = *fit.log_marginal_likelihood;
    }
    doc["num_parameters"] = fit.num_parameters;
    doc["score"] = fit.score;
    doc["branching_ratio"] = fit.branching_ratio;
    doc["background"] = std::move(curve);
    doc["diagnostics"] = {{"converged", fit.diagnostics.converged},
                          {"iterations", fit.diagnostics.iterations},
                          {"evaluations", fit.diagnostics.evaluations},
                          {"restarts", fit.diagnostics.restarts},
                          {"message", fit.diagnostics.message}};
    return doc;
}

FitResult fit_from_json(const json& doc, const EventSequence& events) {
    try {
        FitResult fit;
        const std::string tag = doc.at("model").get<std::string>();
        fit.window = ObservationWindow(doc.at("window").at("start").get<double>(),
                                       doc.at("window").at("end").get<double>());
        fit.n_events = doc.at("n_events").get<std::size_t>();
        if (!(fit.window == events.window())) {
            throw DomainError("fit window [" + format_double(fit.window.start()) + ", " +
                              format_double(fit.window.end()) +
                              "] does not match the event window");
        }
        if (fit.n_events != events.size()) {
            throw DomainError("fit was made on " + std::to_string(fit.n_events) +
                              " events, event file has " + std::to_string(events.size()));
        }
        const json& params = doc.at("parameters");
        fit.kernel = ExponentialKernel(params.at("alpha").get<std::vector<double>>(),
                                       params.at("beta").get<std::vector<double>>());
        if (tag == "bcb") {
            const auto k = params.at("k").get<std::size_t>();
            fit.model = ModelSpec::bcb(k);
            auto basis = std::make_shared<const NaturalTimeBasis>(
                events.size(), params.at("basis_count").get<std::size_t>());
            fit.background = SplineBackground(params.at("coefficients").get<std::vector<double>>(),
                                              std::move(basis), events);
            HyperParams hyper;
            hyper.kernel = fit.kernel;
            hyper.V = params.at("V").get<double>();
            hyper.W = params.at("W").get<double>();
            hyper.mu_c = params.at("mu_c").get<double>();
            fit.hyper = hyper;
            fit.log_marginal_likelihood = doc.at("log_marginal_likelihood").get<double>();
        } else if (tag == "const") {
            fit.model = ModelSpec::constant();
            fit.background = ConstantBackground(params.at("mu_c").get<double>());
        } else {
            auto knots = params.at("knot_times").get<std::vector<double>>();
            fit.model = ModelSpec::piecewise_linear(knots, tag);
            fit.background = PiecewiseLinearBackground(
                std::move(knots), params.at("knot_values").get<std::vector<double>>());
        }
        fit.log_likelihood = doc.at("log_likelihood").get<double>();
        fit.num_parameters = doc.at("num_parameters").get<std::size_t>();
        fit.score = doc.at("score").get<double>();
        fit.branching_ratio = doc.at("branching_ratio").get<double>();
        fit.background_curve = background_curve(fit.background, fit.window);
        const json& diag = doc.at("diagnostics");
        fit.diagnostics.converged = diag.at("converged").get<bool>();
        fit.diagnostics.iterations = diag.at("iterations").get<std::size_t>();
        fit.diagnostics.evaluations = diag.at("evaluations").get<std::size_t>();
        fit.diagnostics.restarts = diag.at("restarts").get<std::size_t>();
        fit.diagnostics.message = diag.at("message").get<std::string>();
        return fit;
    } catch (const json::exception& err) {
        throw ParseError(std::string("malformed fit JSON: ") + err.what(), 0);
    }
}

void write_curve_csv(const FitResult& fit, std::ostream& out) {
    out << "t,mu\n";
    for (const auto& [t, mu] : fit.background_curve) {
        out << format_double(t) << ',' << format_double(mu) << '\n';
    }
}

}  // namespace hawkesbg
