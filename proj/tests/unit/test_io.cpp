#include "hawkesbg/errors.hpp"
#include "hawkesbg/event_io.hpp"
#include "hawkesbg/fit_json.hpp"
#include "hawkesbg/likelihood.hpp"
#include "hawkesbg/simulate.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <random>
#include <sstream>

using namespace hawkesbg;
using Catch::Matchers::WithinRel;

TEST_CASE("event file round-trips every double exactly", "[io]") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    std::vector<double> times(500);
    for (double& t : times) {
        t = u(rng);
    }
    std::sort(times.begin(), times.end());
    const EventSequence seq(times, ObservationWindow(-1e4, 1e4 + 0.1));
    std::ostringstream out;
    write_events_csv(seq, out);
    std::istringstream in(out.str());
    const auto back = read_events_csv(in);
    CHECK(back.window() == seq.window());
    CHECK(std::vector<double>(back.times().begin(), back.times().end()) == times);

    CHECK(out.str().rfind("# start=-10000\n# end=10000.1\n", 0) == 0);
}

TEST_CASE("empty event file", "[io]") {
    std::istringstream in("# start=0\n# end=5\n");
    const auto seq = read_events_csv(in);
    CHECK(seq.empty());
    CHECK(seq.window() == ObservationWindow(0.0, 5.0));
}

TEST_CASE("event file errors carry line numbers", "[io]") {
    std::istringstream no_header("1.0\n2.0\n");
    CHECK_THROWS_AS(read_events_csv(no_header), ParseError);
    std::istringstream bad("# start=0\n# end=5\n1.0\nabc\n");
    try {
        read_events_csv(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    // ordering problems surface as domain errors
    std::istringstream unsorted("# start=0\n# end=5\n2.0\n1.0\n");
    CHECK_THROWS(read_events_csv(unsorted));
}

TEST_CASE("number formatting", "[io]") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(parse_double("2.5", 1) == 2.5);
    CHECK_THROWS_AS(parse_double("2.5x", 1), ParseError);
    CHECK_THROWS_AS(parse_double("", 1), ParseError);
}

TEST_CASE("fit JSON round-trip for every model", "[io]") {
    const ObservationWindow w(0.0, 3600.0);
    const auto seq = simulate(scenario_ushape(w, 0.2, 4.0), ExponentialKernel({0.3}, {1.0}), 19);
    for (const std::string tag : {"const", "pl30", "bcb"}) {
        const auto fit = fit_model(seq, model_from_tag(tag, w), 1);
        const auto doc = fit_to_json(fit);
        CHECK(doc.at("format") == "hawkesbg-fit/1");
        CHECK(doc.at("model") == tag);
        CHECK(doc.at("n_events") == seq.size());
        CHECK(doc.contains("diagnostics"));
        CHECK(doc.at("background").size() == fit.background_curve.size());

        const auto back = fit_from_json(nlohmann::json::parse(doc.dump()), seq);
        CHECK(back.score == fit.score);
        CHECK(back.num_parameters == fit.num_parameters);
        CHECK(back.branching_ratio == fit.branching_ratio);
        CHECK(log_likelihood(seq, back.kernel, back.background) ==
              log_likelihood(seq, fit.kernel, fit.background));
        CHECK(fit_to_json(back).dump() == doc.dump());
    }
}

TEST_CASE("fit JSON for a bcb model reports the basis size", "[io]") {
    std::vector<double> times;
    for (int i = 1; i <= 100; ++i) {
        times.push_back(i + 0.25 * std::sin(i));
    }
    const EventSequence seq(times, ObservationWindow(0.0, 101.0));
    const auto doc = fit_to_json(fit_bcb(seq, 1, 50));
    CHECK(doc.at("parameters").at("basis_count") == 5);
    CHECK(doc.at("parameters").at("coefficients").size() == 5);
}

TEST_CASE("fit JSON validation", "[io]") {
    const ObservationWindow w(0.0, 100.0);
    const auto seq = simulate(scenario_constant(w, 1.0), ExponentialKernel(), 1);
    const auto doc = fit_to_json(fit_mle(seq, ModelSpec::constant(), 1));
    const auto other = simulate(scenario_constant(ObservationWindow(0.0, 120.0), 1.0), ExponentialKernel(), 1);
    CHECK_THROWS_AS(fit_from_json(doc, other), DomainError);
    auto broken = doc;
    broken.erase("parameters");
    CHECK_THROWS_AS(fit_from_json(broken, seq), ParseError);
}

TEST_CASE("curve CSV", "[io]") {
    const EventSequence seq({1.0, 2.0, 3.0, 4.0, 5.0}, ObservationWindow(0.0, 6.0));
    FitResult fit;
    fit.window = seq.window();
    fit.background = ConstantBackground(2.0);
    fit.background_curve = background_curve(fit.background, seq.window());
    std::ostringstream out;
    write_curve_csv(fit, out);
    CHECK(out.str().rfind("t,mu\n", 0) == 0);
    CHECK(out.str().find("6,2\n") != std::string::npos);
}
