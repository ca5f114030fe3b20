#include "hawkesbg/basis.hpp"
#include "hawkesbg/errors.hpp"
#include "hawkesbg/estimate.hpp"
#include "hawkesbg/event_io.hpp"
#include "hawkesbg/fit_json.hpp"
#include "hawkesbg/gof.hpp"
#include "hawkesbg/likelihood.hpp"
#include "hawkesbg/simulate.hpp"
#include "hawkesbg/tickdata.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include <sstream>

namespace py = pybind11;
using namespace hawkesbg;

namespace {

ExponentialKernel make_kernel(const std::vector<double>& alphas, const std::vector<double>& betas) {
    return ExponentialKernel(alphas, betas);
}

std::string fit_events(const std::vector<double>& times, double start, double end, const std::string& model,
                       std::size_t order, std::size_t k, std::optional<double> fixed_v) {
    const EventSequence seq(times, ObservationWindow(start, end));
    const ModelSpec spec = model_from_tag(model, seq.window(), k);
    FitOptions options;
    options.fixed_V = fixed_v;
    py::gil_scoped_release release;
    return fit_to_json(fit_model(seq, spec, order, options)).dump();
}

py::dict gof_events(const std::vector<double>& times, double start, double end, const std::string& fit_json) {
    const EventSequence seq(times, ObservationWindow(start, end));
    const FitResult fit = fit_from_json(nlohmann::json::parse(fit_json), seq);
    const auto tau = rescaled_intervals(seq, fit.kernel, fit.background);
    const auto ks = ks_test_uniform(tau);
    py::dict out;
    out["n_intervals"] = tau.size();
    out["statistic"] = ks.statistic;
    out["p_value"] = ks.p_value;
    return out;
}

double loglik(const std::vector<double>& times, double start, double end, const std::vector<double>& alphas,
              const std::vector<double>& betas, std::optional<double> mu,
              std::optional<std::vector<double>> knot_times, std::optional<std::vector<double>> knot_values) {
    const EventSequence seq(times, ObservationWindow(start, end));
    const auto kernel = make_kernel(alphas, betas);
    if (knot_times || knot_values) {
        if (!knot_times || !knot_values || mu) {
            throw ConfigError("give either mu or both knot_times and knot_values");
        }
        return log_likelihood(seq, kernel, PiecewiseLinearBackground(*knot_times, *knot_values));
    }
    if (!mu) {
        throw ConfigError("a background is required: mu or knot_times/knot_values");
    }
    return log_likelihood(seq, kernel, ConstantBackground(*mu));
}

std::vector<double> simulate_events(const std::string& scenario, double start, double end,
                                    const std::vector<double>& alphas, const std::vector<double>& betas,
                                    std::uint64_t seed, double base_rate, double ratio, double jump,
                                    std::optional<double> t_news, double relaxation) {
    const ObservationWindow w(start, end);
    const auto kernel = make_kernel(alphas, betas);
    AnalyticRate rate = [&] {
        if (scenario == "ushape") {
            return scenario_ushape(w, base_rate, ratio);
        }
        if (scenario == "news") {
            return scenario_news_shock(w, t_news.value_or(start + 0.4 * w.length()), base_rate, jump, relaxation);
        }
        if (scenario == "constant") {
            return scenario_constant(w, base_rate);
        }
        throw ConfigError("unknown scenario '" + scenario + "' (expected ushape, news or constant)");
    }();
    const auto seq = simulate(rate, kernel, seed);
    return {seq.times().begin(), seq.times().end()};
}

std::vector<std::vector<double>> basis_values(std::size_t n, std::size_t k) {
    const auto b = build_basis(n, k);
    std::vector<std::vector<double>> rows(b.value_rows(), std::vector<double>(b.basis_count()));
    for (std::size_t i = 0; i < b.value_rows(); ++i) {
        for (std::size_t j = 0; j < b.basis_count(); ++j) {
            rows[i][j] = b.value(i, j);
        }
    }
    return rows;
}

py::dict extract(const std::string& csv_text, std::int64_t session_start, std::int64_t session_end,
                 std::int64_t tick_size, std::uint64_t jitter_seed, const std::string& sign_reference) {
    SessionConfig cfg;
    cfg.session_start = session_start;
    cfg.session_end = session_end;
    cfg.tick_size = tick_size;
    cfg.jitter_seed = jitter_seed;
    if (sign_reference == "change") {
        cfg.sign_reference = SignReference::PreviousChange;
    } else if (sign_reference == "transaction") {
        cfg.sign_reference = SignReference::PreviousTransaction;
    } else {
        throw ConfigError("sign_reference must be 'change' or 'transaction'");
    }
    std::istringstream in(csv_text);
    const auto records = read_ticks_csv(in);
    const auto ex = extract_movements(records, cfg);
    py::dict out;
    out["times"] = std::vector<double>(ex.events.times().begin(), ex.events.times().end());
    out["start"] = ex.events.window().start();
    out["end"] = ex.events.window().end();
    out["contract"] = ex.contract;
    out["total_records"] = ex.total_records;
    out["contract_records"] = ex.contract_records;
    out["retained"] = ex.retained;
    out["retained_fraction"] = ex.retained_fraction;
    return out;
}

}  // namespace

PYBIND11_MODULE(_hawkesbg, m) {
    m.doc() = "Hawkes processes with a smooth time-varying background";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def("basis_count", &basis_count, py::arg("n"), py::arg("k"));
    m.def("basis_values", &basis_values, py::arg("n"), py::arg("k"),
          "Rows i = 0..n+1 of the natural-time basis, one column per basis function.");
    m.def("log_likelihood", &loglik, py::arg("times"), py::arg("start"), py::arg("end"), py::arg("alphas"),
          py::arg("betas"), py::kw_only(), py::arg("mu") = py::none(), py::arg("knot_times") = py::none(),
          py::arg("knot_values") = py::none());
    m.def("fit_json", &fit_events, py::arg("times"), py::arg("start"), py::arg("end"), py::arg("model") = "bcb",
          py::arg("order") = 1, py::arg("k") = 50, py::arg("fixed_V") = py::none(),
          "Fit a model and return the fit document as a JSON string.");
    m.def("gof", &gof_events, py::arg("times"), py::arg("start"), py::arg("end"), py::arg("fit_json"));
    m.def("ks_uniform",
          [](const std::vector<double>& values) {
              const auto r = ks_test_uniform(values);
              return py::make_tuple(r.statistic, r.p_value);
          },
          py::arg("values"));
    m.def("simulate", &simulate_events, py::arg("scenario"), py::arg("start"), py::arg("end"), py::arg("alphas"),
          py::arg("betas"), py::arg("seed"), py::kw_only(), py::arg("base_rate") = 1.0, py::arg("ratio") = 5.0,
          py::arg("jump") = 10.0, py::arg("t_news") = py::none(), py::arg("relaxation") = 0.0);
    m.def("extract_movements", &extract, py::arg("csv_text"), py::kw_only(), py::arg("session_start") = 0,
          py::arg("session_end") = 22200, py::arg("tick_size") = 5, py::arg("jitter_seed") = 0,
          py::arg("sign_reference") = "change");
}
