#pragma once

#include "streamsbm/history.hpp"
#include "streamsbm/model.hpp"
#include "streamsbm/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace streamsbm {

/// Normalized mutual information I(a;b) / sqrt(H(a) H(b)) with natural logs.
/// Returns 1 when both partitions are single-cluster and 0 when exactly one is.
[[nodiscard]] double nmi(std::span<const int> a, std::span<const int> b);

/// Minimum-cost assignment for a square cost matrix: result[row] = column.
[[nodiscard]] std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// Label permutation map[k] = true class matched to estimated class k, maximizing the
/// overlap of the two partitions (Hungarian on the confusion matrix).
[[nodiscard]] std::vector<int> label_map(std::span<const int> estimate, std::span<const int> truth,
                                         std::size_t num_classes);

/// Relabels `estimate` so that the overlap with `truth` is maximal (Hungarian on the
/// confusion matrix). Labels must lie in [0, num_classes).
[[nodiscard]] std::vector<int> align_labels(std::span<const int> estimate, std::span<const int> truth,
                                            std::size_t num_classes);

/// (1/K^2) |sum B_true - sum B_hat|. Invariant under relabeling of B_hat.
[[nodiscard]] double intensity_recovery(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

/// Elementwise mean absolute error after the class permutation that minimizes it
/// (exhaustive for K <= 8, Hungarian on row/column profiles otherwise).
[[nodiscard]] double aligned_mae(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

/// Fraction of dense nodes whose aligned estimated class equals the true class.
[[nodiscard]] double r_dense(std::span<const int> estimate, std::span<const int> truth,
                             std::span<const NodeId> dense_nodes, std::size_t num_classes);

/// Expected event count of every pair of A over [t0, t1] under q = prod tau_i.
/// Hawkes families add the transient from `history` (pair-indexed timestamps, may be null)
/// and use the exact mean-intensity ODE for the exponential kernel with the window-averaged
/// baseline. Throws NumericError when any excitation entry is >= 1.
[[nodiscard]] std::vector<double> predict_counts(const ModelParams& params, const Eigen::MatrixXd& tau,
                                                 const EdgeList& edges, double t0, double t1,
                                                 const HistoryStore* history = nullptr);

/// Monte Carlo counterpart of predict_counts: per path, classes are drawn from tau and the
/// pair is simulated forward from its history.
[[nodiscard]] std::vector<double> predict_counts_monte_carlo(const ModelParams& params, const Eigen::MatrixXd& tau,
                                                             const EdgeList& edges, double t0, double t1,
                                                             const HistoryStore* history, std::size_t paths,
                                                             std::uint64_t seed);

/// Per-pair event counts of `events` in pair-index order (events on pairs outside A are rejected).
[[nodiscard]] std::vector<double> observed_counts(std::span<const Event> events, const EdgeList& edges);

/// sqrt(mean squared difference).
[[nodiscard]] double rmse(std::span<const double> predicted, std::span<const double> actual);

/// Partial sums over windows of l_n(theta_n | z*) - l_n(theta* | z*), where
/// l_n = -window_loglik / |A| and snapshots[n-1] is the estimate after window n.
[[nodiscard]] std::vector<double> regret_trace(std::span<const ModelParams> snapshots, const ModelParams& truth,
                                               std::span<const int> z_star, std::span<const Event> events,
                                               const EdgeList& edges, const WindowConfig& windows);

/// Complete-data log-likelihood log p(events, z | theta, pi) over [0, T].
[[nodiscard]] double complete_loglik(const ModelParams& params, std::span<const double> pi, std::span<const int> z,
                                     std::span<const Event> events, const EdgeList& edges, double horizon);

struct SpectralResult {
    std::vector<int> classes;
    bool degenerate{false};  // all-zero count matrix: classes are a random partition
};

/// Spectral clustering of the symmetrized aggregate count matrix C + C^T: rows of the K
/// eigenvectors with the largest |eigenvalue|, then k-means with 20 seeded restarts.
[[nodiscard]] SpectralResult spectral_count_baseline(std::span<const Event> events, NodeId num_nodes,
                                                     std::size_t num_classes, std::uint64_t seed);

}  // namespace streamsbm
