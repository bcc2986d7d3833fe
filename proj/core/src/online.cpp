#include "streamsbm/online.hpp"

#include "streamsbm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace streamsbm {

using Index = Eigen::Index;

double StepSchedule::eta(std::size_t n, std::size_t window_events, std::size_t num_classes, double horizon,
                         std::size_t num_pairs) const {
    const double nd = static_cast<double>(std::max<std::size_t>(n, 1));
    const double pairs = static_cast<double>(std::max<std::size_t>(num_pairs, 1));
    switch (kind) {
        case Kind::AlgorithmDefault: {
            const double kk = static_cast<double>(num_classes);
            return kk * kk / (std::sqrt(nd) * static_cast<double>(std::max<std::size_t>(window_events, 1)));
        }
        case Kind::PowerLaw: return scale / std::pow(nd, alpha) / pairs;
        case Kind::FlatSqrtT: return scale / std::sqrt(std::max(horizon, 1e-300)) / pairs;
    }
    return 0.0;
}

double empirical_pair_rate(std::size_t events, std::size_t num_pairs, double length) {
    if (num_pairs == 0 || !(length > 0.0)) {
        return 1.0;
    }
    return static_cast<double>(std::max<std::size_t>(events, 1)) / (static_cast<double>(num_pairs) * length);
}

ModelParams init_params(ModelKind kind, std::size_t num_classes, const BasisFamily& basis, const InitRanges& ranges,
                        std::uint64_t seed, double empirical_rate) {
    if (num_classes == 0) {
        throw InputError("number of classes must be positive");
    }
    if (!(ranges.rate_lo > 0.0) || ranges.rate_hi < ranges.rate_lo) {
        throw InputError("invalid baseline initialization range");
    }
    Rng rng = Rng::substream(seed, 0x696e6974);
    const auto kk = static_cast<Index>(num_classes);
    const std::size_t count = is_inhomogeneous(kind) ? basis.size() : 1;
    std::vector<Eigen::MatrixXd> coefficients(count, Eigen::MatrixXd(kk, kk));
    for (auto& a : coefficients) {
        for (Index k = 0; k < kk; ++k) {
            for (Index l = 0; l < kk; ++l) {
                a(k, l) = rng.uniform(ranges.rate_lo, ranges.rate_hi);
            }
        }
    }
    Eigen::MatrixXd excitation(kk, kk);
    for (Index k = 0; k < kk; ++k) {
        for (Index l = 0; l < kk; ++l) {
            excitation(k, l) = rng.uniform(ranges.excitation_lo, ranges.excitation_hi);
        }
    }
    if (ranges.data_relative) {
        for (auto& a : coefficients) {
            a *= empirical_rate;
            if (is_hawkes(kind)) {
                a.array() *= 1.0 - excitation.array();
            }
        }
    }
    switch (kind) {
        case ModelKind::HomPoisson: return ModelParams::hom_poisson(coefficients.front());
        case ModelKind::InhomPoisson: return ModelParams::inhom_poisson(std::move(coefficients), basis);
        case ModelKind::HomHawkes: return ModelParams::hom_hawkes(coefficients.front(), excitation, ranges.decay);
        case ModelKind::InhomHawkes:
            return ModelParams::inhom_hawkes(std::move(coefficients), basis, excitation, ranges.decay);
    }
    throw InputError("unknown model kind");
}

std::vector<int> LatentState::assignments() const {
    std::vector<int> z(static_cast<std::size_t>(tau.rows()));
    for (Index i = 0; i < tau.rows(); ++i) {
        Index best = 0;
        for (Index k = 1; k < tau.cols(); ++k) {
            if (tau(i, k) > tau(i, best)) {
                best = k;
            }
        }
        z[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return z;
}

LatentState init_state(NodeId num_nodes, std::size_t num_classes, std::uint64_t seed, InitMode mode) {
    if (num_nodes < 1 || num_classes == 0) {
        throw InputError("init_state needs m >= 1 and K >= 1");
    }
    const auto m = static_cast<Index>(num_nodes);
    const auto kk = static_cast<Index>(num_classes);
    Rng rng = Rng::substream(seed, 0x74617530);
    LatentState state;
    state.tau = Eigen::MatrixXd::Zero(m, kk);
    state.log_evidence.resize(m, kk);
    for (Index i = 0; i < m; ++i) {
        if (mode == InitMode::OneHot) {
            state.tau(i, static_cast<Index>(rng.below(num_classes))) = 1.0;
        } else {
            const double width = 0.01 / static_cast<double>(kk);
            for (Index k = 0; k < kk; ++k) {
                state.tau(i, k) = 1.0 / static_cast<double>(kk) + rng.uniform(-width, width);
            }
            state.tau.row(i) /= state.tau.row(i).sum();
        }
    }
    state.log_evidence.setConstant(-std::log(static_cast<double>(kk)));
    state.pi = Eigen::VectorXd::Constant(kk, 1.0 / static_cast<double>(kk));
    return state;
}

namespace {

double project_rate(double current, double proposed, double floor, Projection projection) {
    if (proposed >= floor) {
        return proposed;
    }
    return projection == Projection::Clip ? floor : std::max(current / 2.0, floor);
}

/// tau_i proportional to pi * exp(log S_i), computed with max subtraction.
void normalize_rows(const Eigen::MatrixXd& log_evidence, const Eigen::VectorXd& pi, Eigen::MatrixXd& tau) {
    const Index kk = tau.cols();
    Eigen::VectorXd log_pi(kk);
    for (Index k = 0; k < kk; ++k) {
        log_pi(k) = pi(k) > 0.0 ? std::log(pi(k)) : -std::numeric_limits<double>::infinity();
    }
    Eigen::VectorXd row(kk);
    for (Index i = 0; i < tau.rows(); ++i) {
        row = log_evidence.row(i).transpose() + log_pi;
        const double top = row.maxCoeff();
        if (!std::isfinite(top)) {
            throw NumericError("node " + std::to_string(i) + " has no finite class log-weight");
        }
        row = (row.array() - top).exp();
        tau.row(i) = row.transpose() / row.sum();
    }
}

double entropy_term(const Eigen::MatrixXd& tau, const Eigen::VectorXd& pi) {
    double total = 0.0;
    for (Index i = 0; i < tau.rows(); ++i) {
        for (Index k = 0; k < tau.cols(); ++k) {
            const double t = tau(i, k);
            if (t > 0.0) {
                total += t * (std::log(pi(k)) - std::log(t));
            }
        }
    }
    return total;
}

}  // namespace

void apply_step(ModelParams& params, const Eigen::VectorXd& step, double floor, double max_excitation,
                Projection projection) {
    Eigen::VectorXd theta = params.values();
    if (step.size() != theta.size()) {
        throw InputError("step length differs from the parameter count");
    }
    if (!step.allFinite()) {
        throw NumericError("non-finite gradient step");
    }
    const std::size_t kk = params.num_classes();
    for (std::size_t h = 0; h < params.num_basis(); ++h) {
        for (std::size_t k = 0; k < kk; ++k) {
            for (std::size_t l = 0; l < kk; ++l) {
                const auto j = static_cast<Index>(params.baseline_index(h, k, l));
                theta(j) = project_rate(theta(j), theta(j) + step(j), floor, projection);
            }
        }
    }
    if (params.hawkes()) {
        for (std::size_t k = 0; k < kk; ++k) {
            for (std::size_t l = 0; l < kk; ++l) {
                const auto j = static_cast<Index>(params.excitation_index(k, l));
                theta(j) = std::min(project_rate(theta(j), theta(j) + step(j), floor, projection), max_excitation);
            }
        }
        const auto j = static_cast<Index>(params.decay_index());
        theta(j) = project_rate(theta(j), theta(j) + step(j), floor, projection);
    }
    params.set_values(theta);
}

OnlineEstimator::OnlineEstimator(const EdgeList& edges, const WindowConfig& windows, OnlineOptions options)
    : OnlineEstimator(edges, windows, options,
                      init_state(edges.num_nodes(), options.num_classes, options.seed, options.init),
                      init_params(options.model, options.num_classes,
                                  BasisFamily(options.basis_count,
                                              options.basis_period > 0.0 ? options.basis_period
                                                                         : windows.window_length()),
                                  options.ranges, options.seed)) {
    rescale_pending_ = options_.ranges.data_relative;
}

OnlineEstimator::OnlineEstimator(const EdgeList& edges, const WindowConfig& windows, OnlineOptions options,
                                 LatentState state, ModelParams params)
    : edges_(&edges),
      windows_(windows),
      options_(options),
      state_(std::move(state)),
      params_(std::move(params)) {
    params_.validate();
    if (params_.num_classes() != options_.num_classes ||
        state_.tau.rows() != static_cast<Index>(edges.num_nodes()) ||
        state_.tau.cols() != static_cast<Index>(options_.num_classes) ||
        state_.pi.size() != static_cast<Index>(options_.num_classes)) {
        throw InputError("initial state does not match m and K");
    }
    if (state_.log_evidence.rows() != state_.tau.rows() || state_.log_evidence.cols() != state_.tau.cols()) {
        state_.log_evidence = Eigen::MatrixXd::Zero(state_.tau.rows(), state_.tau.cols());
    }
    if (params_.hawkes()) {
        radius_ = options_.history_radius > 0.0 ? options_.history_radius : std::ceil(10.0 / params_.decay);
        store_ = HistoryStore(HistoryStore::Mode::Timestamps, edges, radius_);
    } else {
        store_ = HistoryStore(HistoryStore::Mode::Counts, edges, 0.0);
    }
}

const WindowRecord& OnlineEstimator::process_window(std::size_t n, std::span<const Event> events) {
    if (n != next_ || n > windows_.count()) {
        throw InputError("window " + std::to_string(n) + " processed out of order (expected " +
                         std::to_string(next_) + " of " + std::to_string(windows_.count()) + ")");
    }
    const EdgeList& edges = *edges_;
    const TimeWindow window{windows_.window_start(n), windows_.window_end(n), n == windows_.count()};
    for (std::size_t e = 0; e < events.size(); ++e) {
        if (!window.contains(events[e].t) || (e > 0 && events[e].t < events[e - 1].t)) {
            throw InputError("event " + std::to_string(e) + " of window " + std::to_string(n) +
                                 " is unsorted or outside the window",
                             e);
        }
    }

    if (rescale_pending_) {
        params_ = init_params(options_.model, options_.num_classes, params_.basis, options_.ranges, options_.seed,
                              empirical_pair_rate(events.size(), edges.size(), window.length()));
        rescale_pending_ = false;
    }

    // Active pairs: window events grouped by pair (Poisson) or the trimmed history (Hawkes).
    PairTimeline timeline;
    std::vector<ActivePair> hawkes_active;
    std::span<const ActivePair> active;
    if (params_.hawkes()) {
        // Keeps history within radius of the window start: end - f <= radius + length.
        trim_history(store_, edges, radius_ + window.length(), window.end, events);
        hawkes_active.reserve(store_.active_pairs());
        store_.for_each_queue([&](std::uint32_t pair, std::span<const double> times) {
            hawkes_active.push_back({pair, times});
        });
        active = hawkes_active;
    } else {
        timeline = PairTimeline(events, edges, window);
        active = timeline.active();
        for (const auto& a : active) {
            for (const double t : a.times) {
                store_.add(a.pair, t);
            }
        }
    }

    // Evidence at the previous tau and theta, then tau and pi.
    ActiveTables tables;
    tables.evaluate(params_, window, active, edges.size());
    const WindowIntegrals integrals = window_integrals(params_, window);
    state_.log_evidence += expected_node_evidence(edges, state_.tau, integrals.baseline_mass, tables);
    normalize_rows(state_.log_evidence, state_.pi, state_.tau);
    if (!options_.freeze_pi) {
        state_.pi = state_.tau.colwise().mean().transpose();
    }

    events_seen_ += events.size();
    expected_total_ += expected_loglik(edges, state_.tau, integrals.baseline_mass, tables);
    const std::vector<int> z = state_.assignments();
    assigned_total_ += assigned_loglik(edges, z, integrals.baseline_mass, tables);
    double prior = 0.0;
    for (const int c : z) {
        prior += std::log(state_.pi(c));
    }
    const double per_event = 1.0 / static_cast<double>(std::max<std::size_t>(events_seen_, 1));

    // Gradient step at the previous theta with the new tau.
    const double eta = options_.schedule.eta(n, events.size(), options_.num_classes, windows_.horizon(),
                                             edges.size());
    const Eigen::VectorXd gradient = expected_gradient(params_, window, edges, state_.tau, active);
    if (options_.max_backtracks == 0) {
        apply_step(params_, eta * gradient, options_.rate_floor, options_.max_excitation, options_.projection);
    } else {
        const double current = expected_loglik(edges, state_.tau, integrals.baseline_mass, tables);
        double scale = 1.0;
        for (std::size_t attempt = 0; attempt <= options_.max_backtracks; ++attempt, scale *= 0.5) {
            ModelParams trial = params_;
            apply_step(trial, (scale * eta) * gradient, options_.rate_floor, options_.max_excitation,
                       options_.projection);
            tables.evaluate(trial, window, active, edges.size());
            const double value =
                expected_loglik(edges, state_.tau, window_integrals(trial, window).baseline_mass, tables);
            if (value >= current) {
                params_ = std::move(trial);
                break;
            }
        }
    }

    WindowRecord record;
    record.window = n;
    record.events = events.size();
    record.eta = eta;
    record.elbo_norm = (expected_total_ + entropy_term(state_.tau, state_.pi)) * per_event;
    record.loglik_norm = (assigned_total_ + prior) * per_event;
    if (options_.record_params) {
        record.params = params_;
    }
    if (options_.tau_every > 0 && (n % options_.tau_every == 0 || n == windows_.count())) {
        record.tau = state_.tau;
    }
    if (!options_.keep_trace) {
        trace_.clear();
    }
    trace_.push_back(std::move(record));
    ++next_;
    return trace_.back();
}

std::size_t OnlineEstimator::state_bytes() const noexcept {
    const auto matrix_bytes = [](const Eigen::MatrixXd& a) { return static_cast<std::size_t>(a.size()) * sizeof(double); };
    std::size_t bytes = matrix_bytes(state_.tau) + matrix_bytes(state_.log_evidence) +
                        static_cast<std::size_t>(state_.pi.size()) * sizeof(double);
    bytes += params_.num_values() * sizeof(double);
    bytes += store_.memory_bytes();
    return bytes;
}

OnlineResult run_online(std::span<const Event> events, const EdgeList& edges, const WindowConfig& windows,
                        const OnlineOptions& options) {
    OnlineEstimator estimator(edges, windows, options);
    for (const auto& slice : partition_windows(events, windows)) {
        estimator.process_window(slice.index, slice.events);
    }
    return {estimator.params(), estimator.state(), estimator.trace()};
}

}  // namespace streamsbm
