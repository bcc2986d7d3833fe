#pragma once

#include "streamsbm/model.hpp"
#include "streamsbm/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace streamsbm {

/// Integration window. Events with start <= t < end count as window events
/// (t == end as well when closed); earlier events act as Hawkes history.
struct TimeWindow {
    double start{0.0};
    double end{0.0};
    bool closed{false};

    [[nodiscard]] bool contains(double t) const noexcept {
        return t >= start && (t < end || (closed && t == end));
    }
    [[nodiscard]] bool reaches(double t) const noexcept { return t < end || (closed && t == end); }
    [[nodiscard]] double length() const noexcept { return end - start; }
};

/// Quantities of a window that are shared by every pair.
struct WindowIntegrals {
    TimeWindow window;
    std::vector<double> basis_mass;   // measure of each step function inside the window
    Eigen::MatrixXd baseline_mass;    // integral of mu_kl over the window
};

[[nodiscard]] WindowIntegrals window_integrals(const ModelParams& params, const TimeWindow& window);

/// A pair with events or live history: its index in A and its sorted timestamps
/// (history plus window events; nothing past the window end).
struct ActivePair {
    std::uint32_t pair{0};
    std::span<const double> times;
};

/// Event-dependent log-likelihood terms for one pair and every class pair (k, l):
///   X(k,l) = sum_{t in window} log lambda_kl(t) - b_kl * sum_s kernel_mass(s, window).
/// The pair's full window log-likelihood is X - WindowIntegrals::baseline_mass.
void pair_event_table(const ModelParams& params, std::span<const double> times, const TimeWindow& window,
                      Eigen::Ref<Eigen::MatrixXd> out);

/// Adds sum_kl weights(k,l) * dX(k,l)/dtheta into `gradient` (layout of ModelParams::values()).
void add_pair_gradient(const ModelParams& params, std::span<const double> times, const TimeWindow& window,
                       const Eigen::MatrixXd& weights, Eigen::Ref<Eigen::VectorXd> gradient);

/// Event tables for a set of active pairs, stored contiguously (K*K row-major per pair),
/// plus a lookup from pair index to slot (-1 when the pair is quiet).
class ActiveTables {
public:
    ActiveTables() = default;

    void evaluate(const ModelParams& params, const TimeWindow& window, std::span<const ActivePair> active,
                  std::size_t num_pairs);

    [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
    [[nodiscard]] std::uint32_t pair(std::size_t slot) const { return pairs_[slot]; }
    [[nodiscard]] Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    table(std::size_t slot) const {
        return {values_.data() + slot * classes_ * classes_, static_cast<Eigen::Index>(classes_),
                static_cast<Eigen::Index>(classes_)};
    }
    /// Slot of a pair or -1.
    [[nodiscard]] std::int64_t slot_of(std::uint32_t pair) const {
        return slot_.empty() ? -1 : slot_[pair];
    }
    [[nodiscard]] std::size_t memory_bytes() const noexcept {
        return pairs_.capacity() * sizeof(std::uint32_t) + values_.capacity() * sizeof(double) +
               slot_.capacity() * sizeof(std::int64_t);
    }

private:
    std::size_t classes_{0};
    std::vector<std::uint32_t> pairs_;
    std::vector<double> values_;
    std::vector<std::int64_t> slot_;
};

/// Sum over pairs of tau_i tau_j^T (K x K): the expected number of pairs in each class pair.
[[nodiscard]] Eigen::MatrixXd pair_weight_total(const EdgeList& edges, const Eigen::MatrixXd& tau);

/// Expected per-node log-evidence increments:
///   out(i,k) = E_{q(z_-i)} [ window log-lik | z_i = k ]  (terms independent of z_i dropped)
/// summed over the node's outbound and inbound pairs.
[[nodiscard]] Eigen::MatrixXd expected_node_evidence(const EdgeList& edges, const Eigen::MatrixXd& tau,
                                                     const Eigen::MatrixXd& baseline_mass,
                                                     const ActiveTables& tables);

/// Node evidence for a single node using its adjacency lists (for sequential coordinate updates).
[[nodiscard]] Eigen::VectorXd node_evidence(const EdgeList& edges, const Eigen::MatrixXd& tau,
                                            const Eigen::MatrixXd& baseline_mass, const ActiveTables& tables,
                                            NodeId node);

/// sum_p sum_kl tau_ik tau_jl L_p(k,l): expected window log-likelihood under q = prod tau_i.
[[nodiscard]] double expected_loglik(const EdgeList& edges, const Eigen::MatrixXd& tau,
                                     const Eigen::MatrixXd& baseline_mass, const ActiveTables& tables);

/// sum_p L_p(z_i, z_j) for a hard assignment z (0-based classes).
[[nodiscard]] double assigned_loglik(const EdgeList& edges, std::span<const int> z,
                                     const Eigen::MatrixXd& baseline_mass, const ActiveTables& tables);

/// Gradient in theta of sum_p sum_kl tau_ik tau_jl L_p(k,l; theta) over the window.
[[nodiscard]] Eigen::VectorXd expected_gradient(const ModelParams& params, const TimeWindow& window,
                                                const EdgeList& edges, const Eigen::MatrixXd& tau,
                                                std::span<const ActivePair> active);

/// Timestamps grouped by pair: for every pair of A that has at least one event with t reaching
/// the window, its sorted times. Events on pairs outside A are rejected with their index.
class PairTimeline {
public:
    PairTimeline() = default;
    PairTimeline(std::span<const Event> events, const EdgeList& edges, const TimeWindow& upto);

    [[nodiscard]] std::span<const ActivePair> active() const noexcept { return active_; }
    [[nodiscard]] std::size_t num_events() const noexcept { return times_.size(); }

private:
    std::vector<double> times_;
    std::vector<ActivePair> active_;
};

/// Conditional log-likelihood of the window given hard classes z (0-based): sum over A of
/// [sum of log intensities at window events - integral of the intensity over the window].
/// `events` may include earlier events, which serve as Hawkes history.
[[nodiscard]] double window_loglik(const ModelParams& params, std::span<const int> z,
                                   std::span<const Event> events, const EdgeList& edges,
                                   const TimeWindow& window);

}  // namespace streamsbm
