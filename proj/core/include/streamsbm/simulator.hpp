#pragma once

#include "streamsbm/model.hpp"
#include "streamsbm/rng.hpp"
#include "streamsbm/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace streamsbm {

/// Out-degree layout for sampled edge lists.
struct DegreeScenario {
    enum class Kind { Even, Uneven };

    Kind kind{Kind::Even};
    NodeId degree{1};          // Even: out-degree of every node
    NodeId dense_count{0};     // Uneven: number of dense nodes
    NodeId dense_degree{0};    // Uneven: out-degree of dense nodes
    NodeId sparse_degree{0};   // Uneven: out-degree of every other node

    static DegreeScenario even(NodeId degree) { return {Kind::Even, degree, 0, 0, 0}; }
    static DegreeScenario uneven(NodeId dense_count, NodeId dense_degree, NodeId sparse_degree) {
        return {Kind::Uneven, 0, dense_count, dense_degree, sparse_degree};
    }
    /// Uneven layout with dense degree ceil(m^0.7) and sparse degree 3.
    static DegreeScenario uneven_default(NodeId num_nodes, NodeId dense_count);
};

struct SampledEdges {
    EdgeList edges;
    std::vector<NodeId> dense_nodes;  // empty for even layouts
};

/// i.i.d. class draws (0-based) from pi. Rejects pi off the simplex (tolerance 1e-9).
[[nodiscard]] std::vector<int> sample_memberships(NodeId num_nodes, std::span<const double> pi, std::uint64_t seed);

/// Each node picks its out-partners uniformly without replacement among the other nodes.
[[nodiscard]] SampledEdges sample_edge_list(NodeId num_nodes, const DegreeScenario& scenario, std::uint64_t seed);

/// Simulates one pair with classes (k, l) on [start, end). `history` holds earlier events of
/// the pair (used by Hawkes models only). Homogeneous Poisson uses exponential gaps, the
/// inhomogeneous Poisson model thins against max_h a_kl(h), Hawkes models use Ogata thinning
/// with the O(1) exponential-kernel recursion.
[[nodiscard]] std::vector<double> simulate_pair(const ModelParams& params, std::size_t k, std::size_t l,
                                                double start, double end, std::span<const double> history,
                                                Rng& rng);

/// Simulates every pair of A independently on [0, T) with a per-pair substream keyed by
/// (seed, src, dst), then merges into one stream sorted by (t, src, dst).
/// Throws NumericError for Hawkes parameters with any b_kl >= 1.
[[nodiscard]] std::vector<Event> simulate(const ModelParams& params, const EdgeList& edges,
                                          std::span<const int> classes, double horizon, std::uint64_t seed);

struct GroundTruth {
    std::vector<int> classes;
    std::vector<double> pi;
    ModelParams params;
    EdgeList edges;
    std::vector<NodeId> dense_nodes;
    std::vector<Event> events;
    double horizon{0.0};
};

/// Memberships, edge list and events in one call; sub-seeds are derived from `seed`.
[[nodiscard]] GroundTruth simulate_ground_truth(const ModelParams& params, std::span<const double> pi,
                                                NodeId num_nodes, const DegreeScenario& scenario,
                                                double horizon, std::uint64_t seed);

/// Reference settings used throughout the simulation studies: K = 3,
/// pi = (0.4, 0.3, 0.3), the 3x3 Poisson rate matrix and the Hawkes baseline/excitation pair.
namespace reference {
[[nodiscard]] std::vector<double> class_proportions();
[[nodiscard]] Eigen::MatrixXd poisson_rates();
[[nodiscard]] Eigen::MatrixXd hawkes_baseline();
[[nodiscard]] Eigen::MatrixXd hawkes_excitation();
/// Default parameters of each family for K classes. K = 3 uses the reference matrices;
/// other K draw rates from `seed`. Inhomogeneous coefficients modulate the baseline by
/// 1 + 0.5 cos(2 pi h / H).
[[nodiscard]] ModelParams default_params(ModelKind kind, std::size_t num_classes, std::size_t basis_count,
                                         double basis_period, std::uint64_t seed);
}  // namespace reference

}  // namespace streamsbm
