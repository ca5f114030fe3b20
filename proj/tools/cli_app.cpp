#include "cli_app.hpp"

#include "hawkesbg/errors.hpp"
#include "hawkesbg/event_io.hpp"
#include "hawkesbg/fit_json.hpp"
#include "hawkesbg/gof.hpp"
#include "hawkesbg/simulate.hpp"
#include "hawkesbg/tickdata.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

namespace hawkesbg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> values;
    for (const auto& item : split_list(text)) {
        values.push_back(parse_double(item, 0));
    }
    return values;
}

void write_file(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << contents;
}

std::string dump(const json& doc) {
    return doc.dump(2) + "\n";
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw ParseError(path.string() + ": " + err.what(), 0);
    }
}

// Strips a suffix such as ".fit.json" or ".csv" from a file name.
std::string stem_without(const fs::path& path, const std::string& suffix) {
    std::string name = path.filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        name.resize(name.size() - suffix.size());
    }
    return name;
}

struct TaskOutcome {
    int code = kSuccess;
    std::string message;
};

// Maps library exceptions onto exit codes.
template <class Fn>
TaskOutcome guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        return {kUsageError, e.what()};
    } catch (const ConfigError& e) {
        return {kValidationFailure, e.what()};
    } catch (const DomainError& e) {
        return {kValidationFailure, e.what()};
    } catch (const ConvergenceError& e) {
        return {kConvergenceFlag, e.what()};
    } catch (const NumericalError& e) {
        return {kValidationFailure, e.what()};
    } catch (const std::exception& e) {
        return {kUsageError, e.what()};
    }
}

int worst(int a, int b) {
    // Errors outrank the convergence flag.
    auto rank = [](int c) { return c == kSuccess ? 0 : c == kConvergenceFlag ? 1 : 2; };
    return rank(b) > rank(a) ? b : a;
}

// ---------------------------------------------------------------- filter

struct FilterArgs {
    std::string input;
    std::string output;
    std::int64_t session_start = 0;
    std::int64_t session_end = 22200;
    std::int64_t tick_size = 5;
    std::uint64_t jitter_seed = 0;
    std::string sign_reference = "change";
};

int cmd_filter(const FilterArgs& a, std::ostream& out) {
    std::ifstream in(a.input, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + a.input);
    }
    const auto records = read_ticks_csv(in);
    SessionConfig cfg;
    cfg.session_start = a.session_start;
    cfg.session_end = a.session_end;
    cfg.tick_size = a.tick_size;
    cfg.jitter_seed = a.jitter_seed;
    cfg.sign_reference =
        a.sign_reference == "transaction" ? SignReference::PreviousTransaction : SignReference::PreviousChange;
    const auto result = extract_movements(records, cfg);
    std::ostringstream events;
    write_events_csv(result.events, events);
    write_file(a.output, events.str());
    out << "contract=" << (result.contract.empty() ? "-" : result.contract)
        << " records=" << result.contract_records << " retained=" << result.retained
        << " retained_fraction=" << format_double(result.retained_fraction) << '\n';
    return kSuccess;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::vector<std::string> inputs;
    std::string model = "bcb";
    std::size_t order = 1;
    std::size_t k = 50;
    std::uint64_t seed = 0;
    std::string output;
    std::string curve;
    std::string output_dir;
    std::optional<double> fixed_V;
    double W = kDefaultBaselineWeight;
    std::size_t max_iterations = 4000;
    std::size_t jobs = 1;
};

FitOptions fit_options(const FitArgs& a) {
    FitOptions opts;
    opts.fixed_V = a.fixed_V;
    opts.W = a.W;
    opts.simplex.max_iterations = a.max_iterations;
    return opts;
}

FitResult run_fit(const EventSequence& events, const std::string& tag, std::size_t order,
                  std::size_t k, const FitOptions& opts) {
    if (events.size() < 4) {
        throw ConfigError("too few events to fit (" + std::to_string(events.size()) + ", need >= 4)");
    }
    return fit_model(events, model_from_tag(tag, events.window(), k), order, opts);
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    if (a.inputs.size() > 1 && a.output_dir.empty()) {
        err << "error: several inputs need --output-dir\n";
        return kUsageError;
    }
    const FitOptions opts = fit_options(a);
    std::vector<TaskOutcome> outcomes(a.inputs.size());
    std::vector<std::string> stdout_docs(a.inputs.size());
    parallel_for(a.inputs.size(), a.jobs, [&](std::size_t i) {
        outcomes[i] = guarded([&]() -> TaskOutcome {
            const fs::path input = a.inputs[i];
            const EventSequence events = load_events(input);
            const FitResult fit = run_fit(events, a.model, a.order, a.k, opts);
            const std::string doc = dump(fit_to_json(fit));
            std::ostringstream curve;
            write_curve_csv(fit, curve);
            if (!a.output_dir.empty()) {
                const std::string stem = stem_without(input, ".csv");
                write_file(fs::path(a.output_dir) / (stem + ".fit.json"), doc);
                write_file(fs::path(a.output_dir) / (stem + ".curve.csv"), curve.str());
            } else {
                if (a.output.empty()) {
                    stdout_docs[i] = doc;
                } else {
                    write_file(a.output, doc);
                }
                if (!a.curve.empty()) {
                    write_file(a.curve, curve.str());
                }
            }
            if (!fit.diagnostics.converged) {
                return {kConvergenceFlag, input.string() + ": " + fit.diagnostics.message};
            }
            return {};
        });
    });
    int code = kSuccess;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        out << stdout_docs[i];
        if (!outcomes[i].message.empty()) {
            err << (outcomes[i].code == kConvergenceFlag ? "warning: " : "error: ")
                << outcomes[i].message << '\n';
        }
        code = worst(code, outcomes[i].code);
    }
    return code;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
    std::string input;
    std::string models = "const,pl2h,pl30,bcb";
    std::string orders = "1";
    std::size_t k = 50;
    std::string output;
    std::optional<double> fixed_V;
    double W = kDefaultBaselineWeight;
    std::size_t max_iterations = 4000;
    std::size_t jobs = 1;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    const EventSequence events = load_events(a.input);
    const auto models = split_list(a.models);
    std::vector<std::size_t> orders;
    for (double v : parse_numbers(a.orders)) {
        if (!(v >= 1.0) || v != std::floor(v)) {
            throw ConfigError("kernel orders must be positive integers");
        }
        orders.push_back(static_cast<std::size_t>(v));
    }
    if (models.empty() || orders.empty()) {
        throw ConfigError("compare needs at least one model and one kernel order");
    }
    FitArgs fa;
    fa.fixed_V = a.fixed_V;
    fa.W = a.W;
    fa.max_iterations = a.max_iterations;
    const FitOptions opts = fit_options(fa);

    struct Row {
        std::string model;
        std::size_t order;
        std::optional<FitResult> fit;
        TaskOutcome outcome;
    };
    std::vector<Row> rows;
    for (const auto& m : models) {
        for (std::size_t o : orders) {
            rows.push_back({m, o, std::nullopt, {}});
        }
    }
    parallel_for(rows.size(), a.jobs, [&](std::size_t r) {
        rows[r].outcome = guarded([&]() -> TaskOutcome {
            rows[r].fit = run_fit(events, rows[r].model, rows[r].order, a.k, opts);
            if (!rows[r].fit->diagnostics.converged) {
                return {kConvergenceFlag, rows[r].model + " M=" + std::to_string(rows[r].order) +
                                              ": " + rows[r].fit->diagnostics.message};
            }
            return {};
        });
    });

    std::optional<double> best;
    for (const auto& row : rows) {
        if (row.fit) {
            best = best ? std::max(*best, row.fit->score) : row.fit->score;
        }
    }
    std::ostringstream table;
    table << "model,M,num_parameters,log_likelihood,log_marginal_likelihood,score,relative_score,"
             "branching_ratio,converged,error\n";
    int code = kSuccess;
    for (const auto& row : rows) {
        table << row.model << ',' << row.order << ',';
        if (row.fit) {
            const FitResult& f = *row.fit;
            table << f.num_parameters << ',' << format_double(f.log_likelihood) << ','
                  << (f.log_marginal_likelihood ? format_double(*f.log_marginal_likelihood) : "")
                  << ',' << format_double(f.score) << ',' << format_double(f.score - *best) << ','
                  << format_double(f.branching_ratio) << ',' << (f.diagnostics.converged ? "true" : "false")
                  << ",\n";
        } else {
            std::string msg = row.outcome.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            table << ",,,,,,false," << msg << '\n';
        }
        if (!row.outcome.message.empty()) {
            err << (row.outcome.code == kConvergenceFlag ? "warning: " : "error: ")
                << row.outcome.message << '\n';
        }
        code = worst(code, row.outcome.code);
    }
    if (a.output.empty()) {
        out << table.str();
    } else {
        write_file(a.output, table.str());
    }
    return code;
}

// ---------------------------------------------------------------- gof

struct GofArgs {
    std::string events;
    std::string fit;
    std::string output;
};

struct SessionGof {
    std::size_t n_events = 0;
    std::size_t n_intervals = 0;
    std::optional<KsResult> ks;
    std::string warning;
};

SessionGof session_gof(const fs::path& events_path, const fs::path& fit_path) {
    const EventSequence events = load_events(events_path);
    const FitResult fit = fit_from_json(read_json(fit_path), events);
    SessionGof s;
    s.n_events = events.size();
    const auto tau = rescaled_intervals(events, fit.kernel, fit.background);
    s.n_intervals = tau.size();
    if (events.size() < 2) {
        s.warning = "fewer than 2 events: no inter-event intervals to test";
    } else if (tau.size() < 5) {
        s.warning = "fewer than 5 inter-event intervals: KS test skipped";
    } else {
        s.ks = ks_test_uniform(tau);
    }
    return s;
}

int cmd_gof(const GofArgs& a, std::ostream& out, std::ostream& err) {
    const SessionGof s = session_gof(a.events, a.fit);
    json doc;
    doc["n_events"] = s.n_events;
    doc["n_intervals"] = s.n_intervals;
    if (s.ks) {
        doc["statistic"] = s.ks->statistic;
        doc["p_value"] = s.ks->p_value;
    } else {
        doc["statistic"] = nullptr;
        doc["p_value"] = nullptr;
        doc["warning"] = s.warning;
        err << "warning: " << s.warning << '\n';
    }
    if (a.output.empty()) {
        out << dump(doc);
    } else {
        write_file(a.output, dump(doc));
    }
    return kSuccess;
}

struct GofBatchArgs {
    std::string dir;
    std::string sessions_csv;
    std::string output;
    double level = 0.05;
};

int cmd_gof_batch(const GofBatchArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<fs::path> fits;
    for (const auto& entry : fs::directory_iterator(a.dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 9 && name.ends_with(".fit.json")) {
            fits.push_back(entry.path());
        }
    }
    std::sort(fits.begin(), fits.end());
    std::ostringstream table;
    table << "session,n_intervals,statistic,p_value\n";
    std::vector<double> p_values;
    std::size_t skipped = 0;
    for (const auto& fit_path : fits) {
        const std::string stem = stem_without(fit_path, ".fit.json");
        const fs::path events_path = fit_path.parent_path() / (stem + ".csv");
        const SessionGof s = session_gof(events_path, fit_path);
        if (!s.ks) {
            ++skipped;
            err << "warning: " << stem << ": " << s.warning << '\n';
            table << stem << ',' << s.n_intervals << ",,\n";
            continue;
        }
        p_values.push_back(s.ks->p_value);
        table << stem << ',' << s.n_intervals << ',' << format_double(s.ks->statistic) << ','
              << format_double(s.ks->p_value) << '\n';
    }
    if (!a.sessions_csv.empty()) {
        write_file(a.sessions_csv, table.str());
    }
    const SecondLevelResult verdict = second_level_ks(p_values, a.level);
    json doc;
    doc["sessions"] = p_values.size();
    doc["skipped"] = skipped;
    doc["statistic"] = verdict.ks.statistic;
    doc["p_value"] = verdict.ks.p_value;
    doc["level"] = a.level;
    doc["pass"] = verdict.pass;
    if (a.output.empty()) {
        out << dump(doc);
    } else {
        write_file(a.output, dump(doc));
    }
    return kSuccess;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string scenario = "ushape";
    double start = 0.0;
    double end = 1000.0;
    std::string alpha = "0.5";
    std::string beta = "1.0";
    double base_rate = 1.0;
    double ratio = 5.0;
    double jump = 10.0;
    double relaxation = 0.0;
    std::optional<double> t_news;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    std::size_t jobs = 1;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const ObservationWindow window(a.start, a.end);
    const ExponentialKernel kernel(parse_numbers(a.alpha), parse_numbers(a.beta));
    json scenario;
    scenario["name"] = a.scenario;
    AnalyticRate bg = [&] {
        if (a.scenario == "ushape") {
            scenario["min_rate"] = a.base_rate;
            scenario["ratio"] = a.ratio;
            return scenario_ushape(window, a.base_rate, a.ratio);
        }
        if (a.scenario == "news") {
            const double t_news = a.t_news.value_or(a.start + 0.4 * window.length());
            const double relax = a.relaxation > 0.0 ? a.relaxation : 0.05 * window.length();
            scenario["base_rate"] = a.base_rate;
            scenario["t_news"] = t_news;
            scenario["jump"] = a.jump;
            scenario["relaxation"] = relax;
            return scenario_news_shock(window, t_news, a.base_rate, a.jump, relax);
        }
        if (a.scenario == "constant") {
            scenario["rate"] = a.base_rate;
            return scenario_constant(window, a.base_rate);
        }
        throw ConfigError("unknown scenario '" + a.scenario + "' (expected ushape, news or constant)");
    }();

    const auto sequences = simulate_batch(bg, kernel, a.replicates, a.seed, a.jobs);
    const int width = std::max<int>(3, static_cast<int>(std::to_string(a.replicates - 1).size()));
    json files = json::array();
    std::size_t total = 0;
    for (std::size_t r = 0; r < sequences.size(); ++r) {
        std::ostringstream name;
        name << "replicate_" << std::setw(width) << std::setfill('0') << r << ".csv";
        std::ostringstream body;
        write_events_csv(sequences[r], body);
        write_file(fs::path(a.output_dir) / name.str(), body.str());
        files.push_back({{"file", name.str()},
                         {"seed", replicate_seed(a.seed, r)},
                         {"n_events", sequences[r].size()}});
        total += sequences[r].size();
    }
    json manifest;
    manifest["format"] = "hawkesbg-simulation/1";
    manifest["seed"] = a.seed;
    manifest["replicates"] = a.replicates;
    manifest["window"] = {{"start", a.start}, {"end", a.end}};
    manifest["kernel"] = {{"alpha", std::vector<double>(kernel.alphas().begin(), kernel.alphas().end())},
                          {"beta", std::vector<double>(kernel.betas().begin(), kernel.betas().end())}};
    manifest["scenario"] = scenario;
    manifest["files"] = files;
    write_file(fs::path(a.output_dir) / "manifest.json", dump(manifest));
    out << "replicates=" << a.replicates << " events=" << total << '\n';
    return kSuccess;
}

// ---------------------------------------------------------------- basis

struct BasisArgs {
    std::size_t n = 0;
    std::size_t k = 50;
    std::optional<std::size_t> m;
    std::string output;
};

int cmd_basis(const BasisArgs& a, std::ostream& out) {
    const NaturalTimeBasis basis = a.m ? NaturalTimeBasis(a.n, *a.m) : build_basis(a.n, a.k);
    std::ostringstream body;
    write_basis_csv(basis, body);
    if (a.output.empty()) {
        out << body.str();
    } else {
        write_file(a.output, body.str());
    }
    return kSuccess;
}

using ConfigPaths = std::map<CLI::App*, std::string>;

void add_config(CLI::App* sub, ConfigPaths& paths) {
    sub->add_option("--config", paths[sub], "key = value file mirroring the long flags (flags win)")
        ->check(CLI::ExistingFile);
}

// Fills options not given on the command line from the subcommand's config
// file. Keys may be bare or sit under a [subcommand] section.
void apply_config(CLI::App* sub, const std::string& path) {
    CLI::ConfigINI reader;
    for (const auto& item : reader.from_file(path)) {
        if (item.name == "++" || item.name == "--") {
            continue;
        }
        if (!item.parents.empty() && (item.parents.size() != 1 || item.parents[0] != sub->get_name())) {
            throw CLI::ConfigError::Extras(item.fullname());
        }
        std::string key = item.name;
        std::replace(key.begin(), key.end(), '_', '-');
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || opt->get_name() == "--config") {
            throw CLI::ConfigError::Extras(item.fullname());
        }
        if (opt->count() == 0) {
            opt->add_result(item.inputs);
            opt->run_callback();
        }
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hawkes-process estimation with a time-dependent background rate"};
    app.name(args.empty() ? "hawkesbg" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);
    ConfigPaths config_paths;

    FilterArgs filter_args;
    auto* filter = app.add_subcommand("filter", "Extract market-movement events from tick records");
    add_config(filter, config_paths);
    filter->add_option("input", filter_args.input, "Tick CSV (timestamp,price,volume,contract)")->required();
    filter->add_option("-o,--output", filter_args.output, "Event CSV to write")->required();
    filter->add_option("--session-start", filter_args.session_start, "Session open, seconds");
    filter->add_option("--session-end", filter_args.session_end, "Session close, seconds");
    filter->add_option("--tick-size", filter_args.tick_size, "Price tick size");
    filter->add_option("--jitter-seed", filter_args.jitter_seed, "Seed of the timestamp jitter");
    filter->add_option("--sign-reference", filter_args.sign_reference,
                       "Sign rule reference: change (previous price change) or transaction")
        ->check(CLI::IsMember({"change", "transaction"}));

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit a Hawkes model to event files");
    add_config(fit, config_paths);
    fit->add_option("inputs", fit_args.inputs, "Event CSV file(s)")->required();
    fit->add_option("--model", fit_args.model, "const, pl2h, pl30, pl:<seconds> or bcb");
    fit->add_option("-M,--order", fit_args.order, "Number of exponentials in the kernel")
        ->check(CLI::PositiveNumber);
    fit->add_option("-k,--events-per-basis", fit_args.k, "Basis divisor k (m = 3 + round(n/k))")
        ->check(CLI::PositiveNumber);
    fit->add_option("--seed", fit_args.seed, "Accepted for scripting symmetry; fitting is deterministic");
    fit->add_option("-o,--output", fit_args.output, "Fit JSON (single input; default stdout)");
    fit->add_option("--curve", fit_args.curve, "Background curve CSV (single input)");
    fit->add_option("--output-dir", fit_args.output_dir,
                    "Directory for <stem>.fit.json and <stem>.curve.csv per input");
    fit->add_option("--fixed-V", fit_args.fixed_V, "Hold the smoothness weight V fixed (bcb)");
    fit->add_option("--W", fit_args.W, "Baseline weight W (bcb)");
    fit->add_option("--max-iterations", fit_args.max_iterations, "Simplex iteration cap");
    fit->add_option("-j,--jobs", fit_args.jobs, "Worker threads for several inputs");

    CompareArgs compare_args;
    auto* compare = app.add_subcommand("compare", "Score several models on one event file");
    add_config(compare, config_paths);
    compare->add_option("input", compare_args.input, "Event CSV")->required();
    compare->add_option("--models", compare_args.models, "Comma-separated model tags");
    compare->add_option("-M,--orders", compare_args.orders, "Comma-separated kernel orders");
    compare->add_option("-k,--events-per-basis", compare_args.k, "Basis divisor k for bcb")
        ->check(CLI::PositiveNumber);
    compare->add_option("-o,--output", compare_args.output, "Score table CSV (default stdout)");
    compare->add_option("--fixed-V", compare_args.fixed_V, "Hold V fixed for bcb");
    compare->add_option("--W", compare_args.W, "Baseline weight W (bcb)");
    compare->add_option("--max-iterations", compare_args.max_iterations, "Simplex iteration cap");
    compare->add_option("-j,--jobs", compare_args.jobs, "Worker threads");

    GofArgs gof_args;
    auto* gof = app.add_subcommand("gof", "KS test of the rescaled inter-event intervals of one fit");
    add_config(gof, config_paths);
    gof->add_option("events", gof_args.events, "Event CSV")->required();
    gof->add_option("fit", gof_args.fit, "Fit JSON made on the same events")->required();
    gof->add_option("-o,--output", gof_args.output, "Result JSON (default stdout)");

    GofBatchArgs batch_args;
    auto* batch = app.add_subcommand("gof-batch",
                                     "Per-session KS tests over a directory plus the second-level test");
    add_config(batch, config_paths);
    batch->add_option("dir", batch_args.dir, "Directory with <stem>.csv and <stem>.fit.json pairs")
        ->required()
        ->check(CLI::ExistingDirectory);
    batch->add_option("--sessions", batch_args.sessions_csv, "Per-session CSV to write");
    batch->add_option("-o,--output", batch_args.output, "Verdict JSON (default stdout)");
    batch->add_option("--level", batch_args.level, "Significance level of the second-level test");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Simulate replicate event files for a scenario");
    add_config(sim, config_paths);
    sim->add_option("--scenario", sim_args.scenario, "ushape, news or constant");
    sim->add_option("--start", sim_args.start, "Window start, seconds");
    sim->add_option("--end", sim_args.end, "Window end, seconds");
    sim->add_option("--alpha", sim_args.alpha, "Comma-separated kernel alphas");
    sim->add_option("--beta", sim_args.beta, "Comma-separated kernel betas (1/s)");
    sim->add_option("--base-rate", sim_args.base_rate,
                    "ushape: minimum rate; news: pre-announcement rate; constant: the rate");
    sim->add_option("--ratio", sim_args.ratio, "ushape: endpoint / minimum rate");
    sim->add_option("--jump", sim_args.jump, "news: jump factor");
    sim->add_option("--relaxation", sim_args.relaxation, "news: decay time (default 5% of window)");
    sim->add_option("--t-news", sim_args.t_news, "news: announcement time (default 40% into window)");
    sim->add_option("-n,--replicates", sim_args.replicates, "Number of replicates")
        ->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_args.seed, "Batch seed");
    sim->add_option("--output-dir", sim_args.output_dir, "Output directory");
    sim->add_option("-j,--jobs", sim_args.jobs, "Worker threads");

    BasisArgs basis_args;
    auto* basis = app.add_subcommand("basis", "Dump the natural-time basis matrix as CSV");
    basis->add_option("-n,--events", basis_args.n, "Event count")->required();
    basis->add_option("-k,--events-per-basis", basis_args.k, "Basis divisor k");
    basis->add_option("-m,--basis-count", basis_args.m, "Explicit basis count (overrides k)");
    basis->add_option("-o,--output", basis_args.output, "CSV to write (default stdout)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }
    try {
        for (auto& [sub, path] : config_paths) {
            if (sub->parsed() && !path.empty()) {
                apply_config(sub, path);
            }
        }
    } catch (const CLI::Error& e) {
        err << "error: config: " << e.what() << '\n';
        return kUsageError;
    }

    const TaskOutcome outcome = guarded([&]() -> TaskOutcome {
        int code = kSuccess;
        if (filter->parsed()) {
            code = cmd_filter(filter_args, out);
        } else if (fit->parsed()) {
            code = cmd_fit(fit_args, out, err);
        } else if (compare->parsed()) {
            code = cmd_compare(compare_args, out, err);
        } else if (gof->parsed()) {
            code = cmd_gof(gof_args, out, err);
        } else if (batch->parsed()) {
            code = cmd_gof_batch(batch_args, out, err);
        } else if (sim->parsed()) {
            code = cmd_simulate(sim_args, out);
        } else if (basis->parsed()) {
            code = cmd_basis(basis_args, out);
        }
        return {code, {}};
    });
    if (!outcome.message.empty()) {
        err << "error: " << outcome.message << '\n';
    }
    return outcome.code;
}

}  // namespace hawkesbg::cli
