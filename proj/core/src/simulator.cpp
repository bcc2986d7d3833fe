#include "streamsbm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_set>

namespace streamsbm {

DegreeScenario DegreeScenario::uneven_default(NodeId num_nodes, NodeId dense_count) {
    const auto dense = static_cast<NodeId>(std::ceil(std::pow(static_cast<double>(num_nodes), 0.7)));
    return uneven(dense_count, dense, 3);
}

std::vector<int> sample_memberships(NodeId num_nodes, std::span<const double> pi, std::uint64_t seed) {
    if (pi.empty()) {
        throw InputError("class proportions are empty");
    }
    double total = 0.0;
    for (const double p : pi) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InputError("class proportions must be finite and nonnegative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InputError("class proportions sum to " + std::to_string(total) + ", not 1");
    }
    std::vector<double> cumulative(pi.size());
    std::partial_sum(pi.begin(), pi.end(), cumulative.begin());
    Rng rng = Rng::substream(seed, 0x6d656d62);
    std::vector<int> classes(static_cast<std::size_t>(num_nodes));
    for (auto& c : classes) {
        const double u = rng.uniform() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto k = static_cast<std::size_t>(std::distance(cumulative.begin(), it));
        c = static_cast<int>(std::min(k, pi.size() - 1));
    }
    return classes;
}

namespace {

/// d distinct values from [0, n) (Floyd's algorithm), returned sorted.
std::vector<NodeId> choose_distinct(NodeId n, NodeId d, Rng& rng) {
    std::unordered_set<NodeId> chosen;
    chosen.reserve(static_cast<std::size_t>(d) * 2);
    for (NodeId j = n - d; j < n; ++j) {
        const auto v = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(j) + 1));
        if (!chosen.insert(v).second) {
            chosen.insert(j);
        }
    }
    std::vector<NodeId> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

void add_partners(NodeId node, NodeId num_nodes, NodeId degree, std::uint64_t seed, std::vector<NodePair>& pairs) {
    Rng rng = Rng::substream(seed, 0x65646765, static_cast<std::uint64_t>(node));
    for (NodeId v : choose_distinct(num_nodes - 1, degree, rng)) {
        pairs.push_back({node, v >= node ? v + 1 : v});
    }
}

}  // namespace

SampledEdges sample_edge_list(NodeId num_nodes, const DegreeScenario& scenario, std::uint64_t seed) {
    if (num_nodes < 2) {
        throw InputError("edge sampling needs at least two nodes");
    }
    SampledEdges out;
    std::vector<NodePair> pairs;
    if (scenario.kind == DegreeScenario::Kind::Even) {
        if (scenario.degree < 1 || scenario.degree >= num_nodes) {
            throw InputError("out-degree " + std::to_string(scenario.degree) + " must lie in [1, m)");
        }
        pairs.reserve(static_cast<std::size_t>(num_nodes) * static_cast<std::size_t>(scenario.degree));
        for (NodeId i = 0; i < num_nodes; ++i) {
            add_partners(i, num_nodes, scenario.degree, seed, pairs);
        }
    } else {
        if (scenario.dense_count < 1 || scenario.dense_count > num_nodes) {
            throw InputError("dense node count must lie in [1, m]");
        }
        if (scenario.dense_degree >= num_nodes || scenario.sparse_degree >= num_nodes) {
            throw InputError("degrees must be below the node count");
        }
        if (scenario.sparse_degree < 1 || scenario.dense_degree <= scenario.sparse_degree) {
            throw InputError("uneven layout needs 1 <= sparse degree < dense degree");
        }
        Rng rng = Rng::substream(seed, 0x64656e73);
        out.dense_nodes = choose_distinct(num_nodes, scenario.dense_count, rng);
        std::vector<char> dense(static_cast<std::size_t>(num_nodes), 0);
        for (const NodeId i : out.dense_nodes) {
            dense[static_cast<std::size_t>(i)] = 1;
        }
        for (NodeId i = 0; i < num_nodes; ++i) {
            add_partners(i, num_nodes, dense[static_cast<std::size_t>(i)] ? scenario.dense_degree : scenario.sparse_degree,
                         seed, pairs);
        }
    }
    out.edges = EdgeList(num_nodes, std::move(pairs));
    return out;
}

std::vector<double> simulate_pair(const ModelParams& params, std::size_t k, std::size_t l, double start,
                                  double end, std::span<const double> history, Rng& rng) {
    std::vector<double> times;
    if (!(end > start)) {
        return times;
    }
    const auto ki = static_cast<Eigen::Index>(k);
    const auto li = static_cast<Eigen::Index>(l);
    double base_max = 0.0;
    for (const auto& a : params.baseline) {
        base_max = std::max(base_max, a(ki, li));
    }

    if (params.kind == ModelKind::HomPoisson) {
        if (base_max <= 0.0) {
            return times;
        }
        for (double t = start + rng.exponential(base_max); t < end; t += rng.exponential(base_max)) {
            times.push_back(t);
        }
        return times;
    }

    if (!params.hawkes()) {
        if (base_max <= 0.0) {
            return times;
        }
        for (double t = start + rng.exponential(base_max); t < end; t += rng.exponential(base_max)) {
            if (rng.uniform() * base_max < params.baseline_at(k, l, t)) {
                times.push_back(t);
            }
        }
        return times;
    }

    const double decay = params.decay;
    const double b = params.excitation(ki, li);
    // decayed = sum over past events of exp(-decay (t - s)); nonincreasing between events.
    double decayed = 0.0;
    for (const double s : history) {
        if (s < start) {
            decayed += std::exp(-decay * (start - s));
        }
    }
    double t = start;
    while (true) {
        const double bound = base_max + b * decay * decayed;
        if (bound <= 0.0) {
            break;
        }
        const double gap = rng.exponential(bound);
        t += gap;
        if (t >= end) {
            break;
        }
        decayed *= std::exp(-decay * gap);
        const double rate = params.baseline_at(k, l, t) + b * decay * decayed;
        if (rng.uniform() * bound < rate) {
            times.push_back(t);
            decayed += 1.0;
        }
    }
    return times;
}

std::vector<Event> simulate(const ModelParams& params, const EdgeList& edges, std::span<const int> classes,
                            double horizon, std::uint64_t seed) {
    params.validate();
    params.require_stationary();
    if (classes.size() != static_cast<std::size_t>(edges.num_nodes())) {
        throw InputError("class vector length differs from the node count");
    }
    if (!(horizon >= 0.0)) {
        throw InputError("horizon must be nonnegative");
    }
    std::vector<Event> events;
    for (const auto& [src, dst] : edges.pairs()) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(src), static_cast<std::uint64_t>(dst));
        const auto k = static_cast<std::size_t>(classes[static_cast<std::size_t>(src)]);
        const auto l = static_cast<std::size_t>(classes[static_cast<std::size_t>(dst)]);
        for (const double t : simulate_pair(params, k, l, 0.0, horizon, {}, rng)) {
            events.push_back({src, dst, t});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.src != b.src) return a.src < b.src;
        return a.dst < b.dst;
    });
    return events;
}

GroundTruth simulate_ground_truth(const ModelParams& params, std::span<const double> pi, NodeId num_nodes,
                                  const DegreeScenario& scenario, double horizon, std::uint64_t seed) {
    GroundTruth truth;
    truth.classes = sample_memberships(num_nodes, pi, mix_seed(seed + 1));
    truth.pi.assign(pi.begin(), pi.end());
    truth.params = params;
    auto sampled = sample_edge_list(num_nodes, scenario, mix_seed(seed + 2));
    truth.edges = std::move(sampled.edges);
    truth.dense_nodes = std::move(sampled.dense_nodes);
    truth.events = simulate(params, truth.edges, truth.classes, horizon, mix_seed(seed + 3));
    truth.horizon = horizon;
    return truth;
}

namespace reference {

std::vector<double> class_proportions() { return {0.4, 0.3, 0.3}; }

Eigen::MatrixXd poisson_rates() {
    Eigen::MatrixXd b(3, 3);
    b << 0.6, 0.2, 0.3,
         0.1, 1.0, 0.4,
         0.5, 0.4, 0.8;
    return b;
}

Eigen::MatrixXd hawkes_baseline() {
    Eigen::MatrixXd mu(3, 3);
    mu << 0.6, 0.2, 0.3,
          0.1, 1.0, 0.4,
          0.5, 0.2, 0.75;
    return mu;
}

Eigen::MatrixXd hawkes_excitation() {
    Eigen::MatrixXd b(3, 3);
    b << 0.5, 0.1, 0.3,
         0.4, 0.4, 0.4,
         0.2, 0.6, 0.2;
    return b;
}

ModelParams default_params(ModelKind kind, std::size_t num_classes, std::size_t basis_count, double basis_period,
                           std::uint64_t seed) {
    const auto kk = static_cast<Eigen::Index>(num_classes);
    Eigen::MatrixXd base;
    Eigen::MatrixXd excitation;
    if (num_classes == 3) {
        base = is_hawkes(kind) ? hawkes_baseline() : poisson_rates();
        excitation = hawkes_excitation();
    } else {
        Rng rng = Rng::substream(seed, 0x70617261);
        base.resize(kk, kk);
        excitation.resize(kk, kk);
        for (Eigen::Index k = 0; k < kk; ++k) {
            for (Eigen::Index l = 0; l < kk; ++l) {
                base(k, l) = rng.uniform(0.1, 1.0);
                excitation(k, l) = rng.uniform(0.1, 0.6);
            }
        }
    }
    std::vector<Eigen::MatrixXd> coefficients;
    const BasisFamily basis(basis_count, basis_period);
    for (std::size_t h = 0; h < basis_count; ++h) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(h) / static_cast<double>(basis_count);
        coefficients.push_back(base * (1.0 + 0.5 * std::cos(phase)));
    }
    switch (kind) {
        case ModelKind::HomPoisson: return ModelParams::hom_poisson(base);
        case ModelKind::InhomPoisson: return ModelParams::inhom_poisson(std::move(coefficients), basis);
        case ModelKind::HomHawkes: return ModelParams::hom_hawkes(base, excitation, 1.0);
        case ModelKind::InhomHawkes:
            return ModelParams::inhom_hawkes(std::move(coefficients), basis, excitation, 1.0);
    }
    throw InputError("unknown model kind");
}

}  // namespace reference

}  // namespace streamsbm
