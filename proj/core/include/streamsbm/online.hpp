#pragma once

#include "streamsbm/history.hpp"
#include "streamsbm/likelihood.hpp"
#include "streamsbm/model.hpp"
#include "streamsbm/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace streamsbm {

/// Step size for window n (1-based).
///   AlgorithmDefault: K^2 / (sqrt(n) * max(n_events, 1))
///   PowerLaw        : c / n^alpha, divided by |A|
///   FlatSqrtT       : c / sqrt(T), divided by |A|
struct StepSchedule {
    enum class Kind { AlgorithmDefault, PowerLaw, FlatSqrtT };

    Kind kind{Kind::AlgorithmDefault};
    double alpha{0.5};
    double scale{1.0};

    static StepSchedule algorithm_default() { return {}; }
    static StepSchedule power_law(double alpha, double scale) { return {Kind::PowerLaw, alpha, scale}; }
    static StepSchedule flat_sqrt_t(double scale) { return {Kind::FlatSqrtT, 0.5, scale}; }

    [[nodiscard]] double eta(std::size_t n, std::size_t window_events, std::size_t num_classes, double horizon,
                             std::size_t num_pairs) const;
};

/// How rate-like coordinates are kept positive after a gradient step.
///   Clip : max(theta + step, floor)
///   Halve: theta + step when that stays above floor, otherwise max(theta / 2, floor)
enum class Projection { Clip, Halve };

enum class InitMode { OneHot, SoftJitter };

/// Ranges for random parameter initialization. With data_relative, baseline draws are
/// multiples of an empirical per-pair event rate (Hawkes baselines are further scaled by
/// 1 - b_kl so the initial stationary rate matches it); otherwise they are absolute rates.
struct InitRanges {
    bool data_relative{true};
    double rate_lo{0.8};
    double rate_hi{1.2};
    double excitation_lo{0.1};
    double excitation_hi{0.5};
    double decay{1.0};
};

/// Random initial parameters of the given family. `empirical_rate` (events per pair per unit
/// time) scales the baseline draws when ranges.data_relative is set.
[[nodiscard]] ModelParams init_params(ModelKind kind, std::size_t num_classes, const BasisFamily& basis,
                                      const InitRanges& ranges, std::uint64_t seed, double empirical_rate = 1.0);

/// Events per pair per unit time over a span of the given length (at least one event counted).
[[nodiscard]] double empirical_pair_rate(std::size_t events, std::size_t num_pairs, double length);

struct LatentState {
    Eigen::MatrixXd tau;           // m x K responsibilities, rows on the simplex
    Eigen::MatrixXd log_evidence;  // m x K accumulated expected log-likelihood
    Eigen::VectorXd pi;            // class proportions

    /// argmax_k tau_ik per node, ties to the lowest index.
    [[nodiscard]] std::vector<int> assignments() const;
};

/// OneHot: each node gets a uniformly random class. SoftJitter: 1/K plus a small uniform
/// perturbation, renormalized. log S starts at log(1/K) and pi at 1/K.
[[nodiscard]] LatentState init_state(NodeId num_nodes, std::size_t num_classes, std::uint64_t seed, InitMode mode);

/// Adds a step to theta and projects it back to the feasible set.
void apply_step(ModelParams& params, const Eigen::VectorXd& step, double floor, double max_excitation,
                Projection projection);

struct OnlineOptions {
    ModelKind model{ModelKind::HomPoisson};
    std::size_t num_classes{3};
    std::size_t basis_count{1};
    double basis_period{0.0};  // 0: use the window length
    StepSchedule schedule{};
    Projection projection{Projection::Clip};
    InitMode init{InitMode::OneHot};
    InitRanges ranges{};
    std::uint64_t seed{0};
    double rate_floor{kDefaultRateFloor};
    double max_excitation{0.999};
    double history_radius{0.0};  // 0: ceil(10 / initial decay)
    std::size_t max_backtracks{30};  // 0: take the raw step
    bool freeze_pi{false};
    bool record_params{true};
    bool keep_trace{true};       // false: trace() holds only the latest record
    std::size_t tau_every{0};    // keep tau every k windows (0: never)
};

struct WindowRecord {
    std::size_t window{0};
    std::size_t events{0};
    double eta{0.0};
    double elbo_norm{0.0};    // running ELBO per event seen so far
    double loglik_norm{0.0};  // running complete-data log-likelihood per event at argmax classes
    std::optional<ModelParams> params;
    std::optional<Eigen::MatrixXd> tau;
};

/// Streaming estimator: holds (tau, log S, pi, theta, history) and consumes windows in order.
class OnlineEstimator {
public:
    /// Draws the initial state and parameters from options.seed. Data-relative parameter
    /// ranges are resolved from the first window's events.
    OnlineEstimator(const EdgeList& edges, const WindowConfig& windows, OnlineOptions options);
    OnlineEstimator(const EdgeList& edges, const WindowConfig& windows, OnlineOptions options,
                    LatentState state, ModelParams params);

    /// Processes window n (must equal next_window()) holding `events`, which must be
    /// sorted and lie inside the window.
    const WindowRecord& process_window(std::size_t n, std::span<const Event> events);

    [[nodiscard]] std::size_t next_window() const noexcept { return next_; }
    [[nodiscard]] const LatentState& state() const noexcept { return state_; }
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] const HistoryStore& history() const noexcept { return store_; }
    [[nodiscard]] const std::vector<WindowRecord>& trace() const noexcept { return trace_; }
    [[nodiscard]] const OnlineOptions& options() const noexcept { return options_; }
    [[nodiscard]] const WindowConfig& windows() const noexcept { return windows_; }
    [[nodiscard]] const EdgeList& edges() const noexcept { return *edges_; }
    [[nodiscard]] double history_radius() const noexcept { return radius_; }
    [[nodiscard]] std::size_t events_seen() const noexcept { return events_seen_; }

    /// Bytes of persistent estimator state (tau, log S, pi, theta, history store); excludes
    /// per-window scratch, the trace and the edge list.
    [[nodiscard]] std::size_t state_bytes() const noexcept;

private:
    const EdgeList* edges_;
    WindowConfig windows_;
    OnlineOptions options_;
    LatentState state_;
    ModelParams params_;
    HistoryStore store_;
    double radius_{0.0};
    std::size_t next_{1};
    std::size_t events_seen_{0};
    bool rescale_pending_{false};
    double expected_total_{0.0};
    double assigned_total_{0.0};
    std::vector<WindowRecord> trace_;
};

struct OnlineResult {
    ModelParams params;
    LatentState state;
    std::vector<WindowRecord> trace;
};

/// Runs the estimator over a whole sorted stream on [0, T].
[[nodiscard]] OnlineResult run_online(std::span<const Event> events, const EdgeList& edges,
                                      const WindowConfig& windows, const OnlineOptions& options);

}  // namespace streamsbm
