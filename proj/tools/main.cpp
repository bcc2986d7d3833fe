#include "json_io.hpp"

#include "streamsbm/batch.hpp"
#include "streamsbm/history.hpp"
#include "streamsbm/io.hpp"
#include "streamsbm/metrics.hpp"
#include "streamsbm/online.hpp"
#include "streamsbm/simulator.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace streamsbm::cli {
namespace {

constexpr int kInputFailure = 2;
constexpr int kNumericFailure = 3;

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

EventFormat parse_format(const std::string& text) {
    if (text == "csv") {
        return EventFormat::Csv;
    }
    if (text == "snap") {
        return EventFormat::Snap;
    }
    throw InputError("unknown event format '" + text + "' (csv | snap)");
}

std::ifstream open_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    return out;
}

std::vector<Event> events_on(std::span<const Event> events, const EdgeList& edges, std::size_t& dropped) {
    std::vector<Event> kept;
    kept.reserve(events.size());
    for (const auto& e : events) {
        if (e.src < edges.num_nodes() && e.dst < edges.num_nodes() && edges.contains(e.src, e.dst)) {
            kept.push_back(e);
        } else {
            ++dropped;
        }
    }
    return kept;
}

/// Settings shared by the fitting subcommands.
struct FitSettings {
    std::string events;
    std::string format{"csv"};
    std::string edges;
    std::string model{"hom-poisson"};
    std::size_t classes{0};
    double dt{0.0};
    std::optional<double> horizon;
    std::string schedule{"default"};
    double alpha{0.5};
    double scale{1.0};
    std::size_t basis_count{1};
    double basis_period{0.0};
    double radius{0.0};
    std::uint64_t seed{0};
    bool freeze_pi{false};
    double floor{kDefaultRateFloor};
    std::string init{"one-hot"};
    std::size_t max_backtracks{30};
    std::size_t max_iterations{0};
    double tolerance{1e-3};
    std::string out{"fit.json"};
    std::string trace;
    std::string snapshots;
};

void add_fit_options(CLI::App* sub, FitSettings& s, bool online) {
    sub->add_option("--events", s.events, "events CSV (header src,dst,t)")->required();
    sub->add_option("--format", s.format, "csv | snap")->capture_default_str();
    sub->add_option("--edges", s.edges, "edge list CSV (default: pairs seen in the events)");
    sub->add_option("--model", s.model, "hom-poisson | inhom-poisson | hom-hawkes | inhom-hawkes")
        ->capture_default_str();
    sub->add_option("--k", s.classes, "number of classes")->required();
    sub->add_option("--dt", s.dt, online ? "window length" : "window length used for the default iteration cap")
        ->required(online);
    sub->add_option("--t", s.horizon, "horizon T (default: last event time)");
    sub->add_option("--basis-count", s.basis_count, "number of step basis functions")->capture_default_str();
    sub->add_option("--basis-period", s.basis_period, "length of one basis step (default: dT, or 1)");
    sub->add_option("--seed", s.seed, "random seed")->capture_default_str();
    sub->add_flag("--freeze-pi", s.freeze_pi, "keep pi at its initial value");
    sub->add_option("--floor", s.floor, "rate floor")->capture_default_str();
    sub->add_option("--init", s.init, "one-hot | soft")->capture_default_str();
    sub->add_option("--out", s.out, "fit output JSON")->capture_default_str();
    sub->add_option("--trace", s.trace, "trace CSV path");
    if (online) {
        sub->add_option("--schedule", s.schedule, "default | power | flat")->capture_default_str();
        sub->add_option("--alpha", s.alpha, "power-law exponent")->capture_default_str();
        sub->add_option("--c", s.scale, "schedule constant")->capture_default_str();
        sub->add_option("--radius", s.radius, "history radius R (default ceil(10 / decay))");
        sub->add_option("--max-backtracks", s.max_backtracks, "step halvings per window (0: raw steps)")
            ->capture_default_str();
        sub->add_option("--snapshots", s.snapshots, "JSON-lines file of the parameters after every window");
    } else {
        sub->add_option("--max-iter", s.max_iterations, "EM iterations (default ceil(T/dT), or 100)");
        sub->add_option("--tol", s.tolerance, "ELBO change tolerance")->capture_default_str();
    }
}

InitMode parse_init(const std::string& text) {
    if (text == "one-hot") {
        return InitMode::OneHot;
    }
    if (text == "soft") {
        return InitMode::SoftJitter;
    }
    throw InputError("unknown init mode '" + text + "' (one-hot | soft)");
}

StepSchedule parse_schedule(const FitSettings& s) {
    if (s.schedule == "default") {
        return StepSchedule::algorithm_default();
    }
    if (s.schedule == "power") {
        return StepSchedule::power_law(s.alpha, s.scale);
    }
    if (s.schedule == "flat") {
        return StepSchedule::flat_sqrt_t(s.scale);
    }
    throw InputError("unknown schedule '" + s.schedule + "' (default | power | flat)");
}

OnlineOptions online_options(const FitSettings& s) {
    OnlineOptions o;
    o.model = parse_model_kind(s.model);
    o.num_classes = s.classes;
    o.basis_count = s.basis_count;
    o.basis_period = s.basis_period;
    o.schedule = parse_schedule(s);
    o.init = parse_init(s.init);
    o.seed = s.seed;
    o.rate_floor = s.floor;
    o.history_radius = s.radius;
    o.max_backtracks = s.max_backtracks;
    o.freeze_pi = s.freeze_pi;
    o.record_params = false;
    o.keep_trace = false;
    return o;
}

BatchOptions batch_options(const FitSettings& s, double horizon) {
    BatchOptions o;
    o.model = parse_model_kind(s.model);
    o.num_classes = s.classes;
    o.basis_count = s.basis_count;
    o.basis_period = s.basis_period > 0.0 ? s.basis_period : (s.dt > 0.0 ? s.dt : 1.0);
    o.horizon = horizon;
    o.max_iterations = s.max_iterations > 0 ? s.max_iterations
                       : s.dt > 0.0       ? WindowConfig(s.dt, horizon).count()
                                          : 100;
    o.tolerance = s.tolerance;
    o.init = parse_init(s.init);
    o.seed = s.seed;
    o.rate_floor = s.floor;
    o.freeze_pi = s.freeze_pi;
    return o;
}

json settings_json(const FitSettings& s, double horizon) {
    return {{"model", s.model},       {"k", s.classes},         {"dt", s.dt},
            {"horizon", horizon},     {"schedule", s.schedule}, {"alpha", s.alpha},
            {"c", s.scale},           {"h", s.basis_count},     {"basis_period", s.basis_period},
            {"radius", s.radius},     {"seed", s.seed},         {"freeze_pi", s.freeze_pi},
            {"floor", s.floor},       {"init", s.init},         {"max_backtracks", s.max_backtracks},
            {"tolerance", s.tolerance}};
}

FitOutput make_fit(const ModelParams& params, const Eigen::VectorXd& pi, const Eigen::MatrixXd& tau) {
    FitOutput fit;
    fit.params = params;
    fit.pi.assign(pi.data(), pi.data() + pi.size());
    fit.tau = tau;
    LatentState state;
    state.tau = tau;
    fit.z_hat = state.assignments();
    return fit;
}

struct OnlineRun {
    FitOutput fit;
    double seconds{0.0};
    HistoryStore history;
};

/// Streams the event file through the estimator; a first pass derives A and T when absent.
OnlineRun run_fit_online(const FitSettings& s, const EdgeList* given_edges, std::optional<double> horizon,
                         const std::string& trace_path) {
    const EventFormat format = parse_format(s.format);
    EdgeList derived;
    if (given_edges == nullptr || !horizon) {
        auto in = open_events(s.events);
        EventReader reader(in, format);
        StreamSummary summary = summarize_stream(reader);
        if (!horizon) {
            horizon = summary.last_time;
        }
        derived = std::move(summary.edges);
        if (reader.skipped_self_loops() > 0) {
            warn("skipped " + std::to_string(reader.skipped_self_loops()) + " self-loops");
        }
    }
    const EdgeList& edges = given_edges != nullptr ? *given_edges : derived;
    const WindowConfig windows(s.dt, *horizon);
    OnlineOptions options = online_options(s);

    std::optional<std::ofstream> trace;
    if (!trace_path.empty()) {
        trace.emplace(open_output(trace_path));
        write_trace_header(*trace);
    }
    std::optional<std::ofstream> snapshots;
    if (!s.snapshots.empty()) {
        snapshots.emplace(open_output(s.snapshots));
        options.record_params = true;
    }
    const auto started = std::chrono::steady_clock::now();
    OnlineEstimator estimator(edges, windows, options);
    auto in = open_events(s.events);
    EventReader reader(in, format);
    stream_online(reader, estimator, [&](const WindowRecord& record) {
        if (trace) {
            write_trace_row(*trace, record);
        }
        if (snapshots) {
            *snapshots << to_json(*record.params).dump() << '\n';
        }
    });
    OnlineRun run;
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    run.fit = make_fit(estimator.params(), estimator.state().pi, estimator.state().tau);
    run.fit.config = settings_json(s, *horizon);
    run.fit.config["wall_seconds"] = run.seconds;
    run.fit.config["events"] = estimator.events_seen();
    run.history = estimator.history();
    return run;
}

int cmd_simulate(const std::string& model, NodeId m, std::size_t k, double horizon, std::uint64_t seed,
                 NodeId degree, NodeId dense_count, NodeId dense_degree, NodeId sparse_degree,
                 std::size_t basis_count, double basis_period, double rate_scale, const std::string& out_dir) {
    const ModelKind kind = parse_model_kind(model);
    ModelParams params = reference::default_params(kind, k, basis_count, basis_period, seed);
    if (!(rate_scale > 0.0)) {
        throw InputError("rate scale must be positive");
    }
    for (auto& a : params.baseline) {
        a *= rate_scale;
    }
    const std::vector<double> pi =
        k == 3 ? reference::class_proportions() : std::vector<double>(k, 1.0 / static_cast<double>(k));
    DegreeScenario scenario = DegreeScenario::even(degree);
    if (dense_count > 0) {
        scenario = DegreeScenario::uneven_default(m, dense_count);
        if (dense_degree > 0) {
            scenario.dense_degree = dense_degree;
        }
        if (sparse_degree > 0) {
            scenario.sparse_degree = sparse_degree;
        }
    }
    const GroundTruth truth = simulate_ground_truth(params, pi, m, scenario, horizon, seed);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_events_file((dir / "events.csv").string(), truth.events);
    write_edge_list_file((dir / "edges.csv").string(), truth.edges);
    TruthRecord record{truth.params, truth.pi, truth.classes, truth.dense_nodes, horizon, m, seed};
    write_json_file((dir / "truth.json").string(), to_json(record));
    std::cerr << "simulated " << truth.events.size() << " events on " << truth.edges.size() << " pairs\n";
    return 0;
}

int cmd_fit_online(const FitSettings& s) {
    std::optional<EdgeList> edges;
    if (!s.edges.empty()) {
        edges = read_edge_list_file(s.edges);
    }
    OnlineRun run = run_fit_online(s, edges ? &*edges : nullptr, s.horizon, s.trace);
    write_json_file(s.out, to_json(run.fit));
    return 0;
}

int cmd_fit_batch(const FitSettings& s) {
    const std::vector<Event> events = read_events_file(s.events, parse_format(s.format));
    const EdgeList edges = s.edges.empty() ? derive_edge_list(events) : read_edge_list_file(s.edges);
    const double horizon = s.horizon.value_or(events.empty() ? 0.0 : events.back().t);
    const BatchFitReport report = batch_fit(events, edges, batch_options(s, horizon));
    FitOutput fit = make_fit(report.params, report.pi, report.tau);
    fit.config = settings_json(s, horizon);
    fit.config["wall_seconds"] = report.seconds;
    fit.config["iterations"] = report.iterations;
    fit.config["converged"] = report.converged;
    write_json_file(s.out, to_json(fit));
    if (!s.trace.empty()) {
        auto out = open_output(s.trace);
        out << "iteration,elbo\n";
        for (std::size_t i = 0; i < report.elbo_trace.size(); ++i) {
            out << i << ',' << format_double(report.elbo_trace[i]) << '\n';
        }
    }
    return 0;
}

/// Timestamp store of the events on A at or before t0, for Hawkes transients.
HistoryStore history_before(std::span<const Event> events, const EdgeList& edges, const ModelParams& params,
                            double t0) {
    const double radius = std::ceil(40.0 / params.decay);
    HistoryStore store(HistoryStore::Mode::Timestamps, edges, radius);
    std::size_t dropped = 0;
    std::vector<Event> kept = events_on(events, edges, dropped);
    kept.erase(std::upper_bound(kept.begin(), kept.end(), t0, [](double t, const Event& e) { return t < e.t; }),
               kept.end());
    trim_history(store, edges, radius, t0, kept);
    return store;
}

std::vector<double> predict_for(const FitOutput& fit, const EdgeList& edges, double t0, double t1,
                                const std::string& history_path, const std::string& mode, std::size_t paths,
                                std::uint64_t seed) {
    std::optional<HistoryStore> store;
    if (fit.params.hawkes() && !history_path.empty()) {
        store = history_before(read_events_file(history_path), edges, fit.params, t0);
    }
    if (mode == "analytic") {
        return predict_counts(fit.params, fit.tau, edges, t0, t1, store ? &*store : nullptr);
    }
    if (mode == "monte-carlo") {
        return predict_counts_monte_carlo(fit.params, fit.tau, edges, t0, t1, store ? &*store : nullptr, paths,
                                          seed);
    }
    throw InputError("unknown prediction mode '" + mode + "' (analytic | monte-carlo)");
}

int cmd_predict(const std::string& fit_path, const std::string& edges_path, double t0, double t1,
                const std::string& history_path, const std::string& mode, std::size_t paths, std::uint64_t seed,
                const std::string& out_path) {
    const FitOutput fit = fit_from_json(read_json_file(fit_path));
    const EdgeList edges = read_edge_list_file(edges_path, static_cast<NodeId>(fit.tau.rows()));
    const std::vector<double> counts = predict_for(fit, edges, t0, t1, history_path, mode, paths, seed);
    auto out = open_output(out_path);
    out << "src,dst,expected\n";
    for (std::size_t p = 0; p < edges.size(); ++p) {
        out << edges.pair(p).src << ',' << edges.pair(p).dst << ',' << format_double(counts[p]) << '\n';
    }
    return 0;
}

struct EvaluateSettings {
    std::string fit;
    std::string truth;
    std::string test;
    std::string edges;
    std::string history;
    std::optional<double> t0;
    std::optional<double> t1;
    std::string events;
    std::string snapshots;
    double dt{0.0};
    std::string regret_trace;
    std::string out{"-"};
};

int cmd_evaluate(const EvaluateSettings& s) {
    const FitOutput fit = fit_from_json(read_json_file(s.fit));
    json report = json::object();
    report["model"] = std::string(to_string(fit.params.kind));
    if (!s.truth.empty()) {
        const TruthRecord truth = truth_from_json(read_json_file(s.truth));
        if (truth.classes.size() != fit.z_hat.size()) {
            throw InputError("fit and ground truth disagree on the node count");
        }
        const std::size_t kk = std::max(fit.params.num_classes(), truth.params.num_classes());
        report["nmi"] = nmi(fit.z_hat, truth.classes);
        if (truth.params.num_classes() == fit.params.num_classes()) {
            report["intensity_recovery"] =
                intensity_recovery(truth.params.mean_baseline(), fit.params.mean_baseline());
            report["aligned_mae"] = aligned_mae(truth.params.mean_baseline(), fit.params.mean_baseline());
        }
        if (!truth.dense_nodes.empty()) {
            report["r_dense"] = r_dense(fit.z_hat, truth.classes, truth.dense_nodes, kk);
        }
        if (!s.regret_trace.empty()) {
            if (s.snapshots.empty() || s.events.empty() || s.edges.empty() || !(s.dt > 0.0)) {
                throw InputError("the regret trace needs --snapshots, --events, --edges and --dt");
            }
            const std::vector<Event> events = read_events_file(s.events);
            const EdgeList edges = read_edge_list_file(s.edges, truth.num_nodes);
            const WindowConfig windows(s.dt, truth.horizon);
            // Snapshots are compared with the truth under the label map of the final fit.
            const std::vector<int> map = label_map(fit.z_hat, truth.classes, kk);
            std::vector<ModelParams> snapshots;
            std::ifstream in(s.snapshots);
            if (!in) {
                throw InputError("cannot open " + s.snapshots);
            }
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty()) {
                    try {
                        snapshots.push_back(params_from_json(json::parse(line)).relabeled(map));
                    } catch (const json::parse_error& e) {
                        throw InputError(s.snapshots + ": " + e.what());
                    }
                }
            }
            const std::vector<double> regret =
                regret_trace(snapshots, truth.params, truth.classes, events, edges, windows);
            auto out = open_output(s.regret_trace);
            out << "window,regret\n";
            for (std::size_t n = 0; n < regret.size(); ++n) {
                out << n + 1 << ',' << format_double(regret[n]) << '\n';
            }
            report["regret_final"] = regret.empty() ? 0.0 : regret.back();
        }
    }
    if (!s.test.empty()) {
        if (s.edges.empty()) {
            throw InputError("link prediction needs --edges");
        }
        const EdgeList edges = read_edge_list_file(s.edges, static_cast<NodeId>(fit.tau.rows()));
        const std::vector<Event> test_all = read_events_file(s.test);
        std::size_t dropped = 0;
        const std::vector<Event> test = events_on(test_all, edges, dropped);
        if (dropped > 0) {
            warn(std::to_string(dropped) + " test events lie on pairs outside A and are ignored");
        }
        const double t0 = s.t0.value_or(fit.config.value("horizon", 0.0));
        const double t1 = s.t1.value_or(test.empty() ? t0 : test.back().t);
        const std::vector<double> predicted = predict_for(fit, edges, t0, t1, s.history, "analytic", 0, 0);
        report["rmse"] = rmse(predicted, observed_counts(test, edges));
        report["prediction_window"] = {t0, t1};
    }
    write_json_file(s.out, report);
    return 0;
}

int cmd_compare(FitSettings s, double train_fraction, std::size_t batch_iterations, const std::string& out_path) {
    const std::vector<Event> events = read_events_file(s.events, parse_format(s.format));
    const TrainTestSplit split = split_train_test(events, train_fraction);
    if (split.test.empty()) {
        warn("the test period is empty; link prediction is skipped");
    }
    const EdgeList edges = s.edges.empty() ? derive_edge_list(split.train) : read_edge_list_file(s.edges);
    std::size_t dropped = 0;
    const std::vector<Event> train = events_on(split.train, edges, dropped);
    const std::vector<Event> test = events_on(split.test, edges, dropped);
    if (dropped > 0) {
        warn(std::to_string(dropped) + " events lie on pairs outside A and are ignored");
    }
    const double t0 = split.t_split;
    const double t1 = s.horizon.value_or(events.empty() ? 0.0 : events.back().t);

    // Online pass over the training period; both fits are timed on in-memory events.
    OnlineOptions options = online_options(s);
    std::optional<std::ofstream> trace;
    if (!s.trace.empty()) {
        trace.emplace(open_output(s.trace));
        write_trace_header(*trace);
    }
    const WindowConfig windows(s.dt, t0);
    const auto started = std::chrono::steady_clock::now();
    OnlineEstimator estimator(edges, windows, options);
    for (const auto& slice : partition_windows(train, windows)) {
        const WindowRecord& record = estimator.process_window(slice.index, slice.events);
        if (trace) {
            write_trace_row(*trace, record);
        }
    }
    OnlineRun on;
    on.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    on.fit = make_fit(estimator.params(), estimator.state().pi, estimator.state().tau);
    on.history = estimator.history();

    s.max_iterations = batch_iterations;
    const BatchFitReport batch = batch_fit(train, edges, batch_options(s, t0));
    const FitOutput off = make_fit(batch.params, batch.pi, batch.tau);

    const auto per_event = train.empty() ? 0.0 : 1.0 / static_cast<double>(train.size());
    const double ll_online = complete_loglik(on.fit.params, on.fit.pi, on.fit.z_hat, train, edges, t0) * per_event;
    const double ll_batch = complete_loglik(off.params, off.pi, off.z_hat, train, edges, t0) * per_event;

    std::optional<double> rmse_online;
    std::optional<double> rmse_batch;
    if (!test.empty() && t1 > t0) {
        const std::vector<double> actual = observed_counts(test, edges);
        const HistoryStore* history = on.fit.params.hawkes() ? &on.history : nullptr;
        rmse_online = rmse(predict_counts(on.fit.params, on.fit.tau, edges, t0, t1, history), actual);
        std::optional<HistoryStore> batch_history;
        if (off.params.hawkes()) {
            batch_history = history_before(train, edges, off.params, t0);
        }
        rmse_batch = rmse(
            predict_counts(off.params, off.tau, edges, t0, t1, batch_history ? &*batch_history : nullptr), actual);
    }

    const auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("nan"); };
    std::cout << "method,time_s,link_pred_rmse,loglik_norm\n"
              << "online," << format_double(on.seconds) << ',' << cell(rmse_online) << ',' << format_double(ll_online)
              << '\n'
              << "batch," << format_double(batch.seconds) << ',' << cell(rmse_batch) << ','
              << format_double(ll_batch) << '\n'
              << "loglik_ratio," << format_double(ll_online / ll_batch) << "\n";
    if (!out_path.empty()) {
        json report = {{"online", {{"time_s", on.seconds}, {"loglik_norm", ll_online}}},
                       {"batch", {{"time_s", batch.seconds}, {"loglik_norm", ll_batch}}},
                       {"loglik_ratio", ll_online / ll_batch},
                       {"t_split", t0},
                       {"train_events", train.size()},
                       {"test_events", test.size()}};
        if (rmse_online) {
            report["online"]["link_pred_rmse"] = *rmse_online;
            report["batch"]["link_pred_rmse"] = *rmse_batch;
        }
        write_json_file(out_path, report);
    }
    return 0;
}

/// Rewrites `--config FILE` into flags placed before the explicit ones; explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> explicit_keys;
    std::optional<std::string> config;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config" && i + 1 < args.size()) {
            config = args[++i];
            continue;
        }
        if (a.rfind("--config=", 0) == 0) {
            config = a.substr(9);
            continue;
        }
        if (a.rfind("--", 0) == 0) {
            explicit_keys.push_back(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
        }
        rest.push_back(a);
    }
    if (!config) {
        return rest;
    }
    if (!std::filesystem::exists(*config)) {
        throw InputError("cannot open config " + *config);
    }
    std::vector<std::string> injected;
    for (const auto& item : CLI::ConfigINI().from_file(*config)) {
        if (!item.parents.empty()) {
            throw InputError("config sections are not supported: " + item.fullname());
        }
        if (std::find(explicit_keys.begin(), explicit_keys.end(), item.name) != explicit_keys.end()) {
            continue;
        }
        injected.push_back("--" + item.name + "=" + (item.inputs.empty() ? std::string() : item.inputs.front()));
    }
    // Subcommand name stays first so injected flags bind to it.
    std::vector<std::string> out;
    if (!rest.empty()) {
        out.push_back(rest.front());
    }
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), rest.begin() + (rest.empty() ? 0 : 1), rest.end());
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Streaming community detection for timestamped interaction events"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");
    app.footer("Any subcommand accepts --config FILE with flat key=value lines (keys are flag names\n"
               "without dashes, '#' starts a comment); flags on the command line take precedence.");

    std::string sim_model{"hom-poisson"};
    NodeId sim_m{100};
    std::size_t sim_k{3};
    double sim_t{100.0};
    std::uint64_t sim_seed{0};
    NodeId sim_degree{40};
    NodeId sim_dense_count{0};
    NodeId sim_dense_degree{0};
    NodeId sim_sparse_degree{0};
    std::size_t sim_h{1};
    double sim_period{1.0};
    double sim_scale{1.0};
    std::string sim_out{"."};
    auto* simulate = app.add_subcommand("simulate", "simulate a block point-process network");
    simulate->add_option("--model", sim_model, "model family")->capture_default_str();
    simulate->add_option("--m", sim_m, "number of nodes")->capture_default_str();
    simulate->add_option("--k", sim_k, "number of classes")->capture_default_str();
    simulate->add_option("--t", sim_t, "horizon")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "random seed")->capture_default_str();
    simulate->add_option("--degree", sim_degree, "out-degree of every node (even layout)")->capture_default_str();
    simulate->add_option("--dense-count", sim_dense_count, "number of dense nodes (uneven layout when > 0)");
    simulate->add_option("--dense-degree", sim_dense_degree, "dense out-degree (default ceil(m^0.7))");
    simulate->add_option("--sparse-degree", sim_sparse_degree, "sparse out-degree (default 3)");
    simulate->add_option("--basis-count", sim_h, "number of step basis functions")->capture_default_str();
    simulate->add_option("--basis-period", sim_period, "length of one basis step")->capture_default_str();
    simulate->add_option("--rate-scale", sim_scale, "multiplier on every baseline rate")->capture_default_str();
    simulate->add_option("--out-dir", sim_out, "output directory")->capture_default_str();

    FitSettings online_settings;
    auto* fit_online = app.add_subcommand("fit-online", "one streaming pass of online variational inference");
    add_fit_options(fit_online, online_settings, true);

    FitSettings batch_settings;
    auto* fit_batch = app.add_subcommand("fit-batch", "variational EM over the full stream");
    add_fit_options(fit_batch, batch_settings, false);

    std::string pred_fit;
    std::string pred_edges;
    double pred_t0{0.0};
    double pred_t1{0.0};
    std::string pred_history;
    std::string pred_mode{"analytic"};
    std::size_t pred_paths{10000};
    std::uint64_t pred_seed{0};
    std::string pred_out{"predictions.csv"};
    auto* predict = app.add_subcommand("predict", "expected event counts per pair over [t0, t1]");
    predict->add_option("--fit", pred_fit, "fit output JSON")->required();
    predict->add_option("--edges", pred_edges, "edge list CSV")->required();
    predict->add_option("--t0", pred_t0, "start of the prediction period")->required();
    predict->add_option("--t1", pred_t1, "end of the prediction period")->required();
    predict->add_option("--history", pred_history, "events CSV providing Hawkes history before t0");
    predict->add_option("--mode", pred_mode, "analytic | monte-carlo")->capture_default_str();
    predict->add_option("--paths", pred_paths, "Monte Carlo sample paths")->capture_default_str();
    predict->add_option("--seed", pred_seed, "Monte Carlo seed")->capture_default_str();
    predict->add_option("--out", pred_out, "output CSV")->capture_default_str();

    EvaluateSettings eval;
    auto* evaluate = app.add_subcommand("evaluate", "score a fit against ground truth or held-out events");
    evaluate->add_option("--fit", eval.fit, "fit output JSON")->required();
    evaluate->add_option("--truth", eval.truth, "ground truth JSON from simulate");
    evaluate->add_option("--test", eval.test, "held-out events CSV for link prediction");
    evaluate->add_option("--edges", eval.edges, "edge list CSV");
    evaluate->add_option("--history", eval.history, "events CSV providing Hawkes history before t0");
    evaluate->add_option("--t0", eval.t0, "start of the prediction period (default: fit horizon)");
    evaluate->add_option("--t1", eval.t1, "end of the prediction period (default: last test event)");
    evaluate->add_option("--events", eval.events, "events CSV for the regret trace");
    evaluate->add_option("--snapshots", eval.snapshots, "per-window parameters written by fit-online");
    evaluate->add_option("--dt", eval.dt, "window length for the regret trace");
    evaluate->add_option("--regret-trace", eval.regret_trace, "regret trace CSV path");
    evaluate->add_option("--out", eval.out, "report JSON ('-' for stdout)")->capture_default_str();

    FitSettings compare_settings;
    double train_fraction{0.85};
    std::size_t compare_iterations{0};
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "online vs batch on a train/test split");
    add_fit_options(compare, compare_settings, true);
    compare->remove_option(compare->get_option("--out"));
    compare->add_option("--train-fraction", train_fraction, "fraction of events in the training period")
        ->capture_default_str();
    compare->add_option("--max-iter", compare_iterations, "batch EM iterations (default ceil(T/dT))");
    compare->add_option("--out", compare_out, "report JSON");

    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputFailure;
    }

    if (*simulate) {
        return cmd_simulate(sim_model, sim_m, sim_k, sim_t, sim_seed, sim_degree, sim_dense_count, sim_dense_degree,
                            sim_sparse_degree, sim_h, sim_period, sim_scale, sim_out);
    }
    if (*fit_online) {
        return cmd_fit_online(online_settings);
    }
    if (*fit_batch) {
        return cmd_fit_batch(batch_settings);
    }
    if (*predict) {
        return cmd_predict(pred_fit, pred_edges, pred_t0, pred_t1, pred_history, pred_mode, pred_paths, pred_seed,
                           pred_out);
    }
    if (*evaluate) {
        return cmd_evaluate(eval);
    }
    return cmd_compare(compare_settings, train_fraction, compare_iterations, compare_out);
}

}  // namespace
}  // namespace streamsbm::cli

int main(int argc, char** argv) {
    try {
        return streamsbm::cli::run(argc, argv);
    } catch (const streamsbm::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return streamsbm::cli::kInputFailure;
    } catch (const streamsbm::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return streamsbm::cli::kNumericFailure;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return streamsbm::cli::kInputFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return streamsbm::cli::kInputFailure;
    }
}
