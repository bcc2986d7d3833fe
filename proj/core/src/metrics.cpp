#include "streamsbm/metrics.hpp"

#include "streamsbm/likelihood.hpp"
#include "streamsbm/rng.hpp"
#include "streamsbm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace streamsbm {

using Index = Eigen::Index;

namespace {

double entropy_of(const std::map<int, double>& counts, double n) {
    double h = 0.0;
    for (const auto& [label, c] : counts) {
        const double p = c / n;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

double nmi(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) {
        throw InputError("partitions differ in length (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    if (a.empty()) {
        return 1.0;
    }
    const auto n = static_cast<double>(a.size());
    std::map<int, double> count_a;
    std::map<int, double> count_b;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        count_a[a[i]] += 1.0;
        count_b[b[i]] += 1.0;
        joint[{a[i], b[i]}] += 1.0;
    }
    const double ha = entropy_of(count_a, n);
    const double hb = entropy_of(count_b, n);
    if (count_a.size() == 1 && count_b.size() == 1) {
        return 1.0;
    }
    if (count_a.size() == 1 || count_b.size() == 1) {
        return 0.0;
    }
    double mutual = 0.0;
    for (const auto& [key, c] : joint) {
        mutual += (c / n) * std::log(c * n / (count_a[key.first] * count_b[key.second]));
    }
    return std::clamp(mutual / std::sqrt(ha * hb), 0.0, 1.0);
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols()) {
        throw InputError("assignment cost matrix must be square");
    }
    const auto n = static_cast<std::size_t>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    // Potentials u (rows), v (columns); match[j] = row assigned to column j, 1-based with 0 as sentinel.
    std::vector<double> u(n + 1, 0.0);
    std::vector<double> v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0);
    std::vector<std::size_t> way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost(static_cast<Index>(i0 - 1), static_cast<Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(n, 0);
    for (std::size_t j = 1; j <= n; ++j) {
        assignment[match[j] - 1] = static_cast<int>(j - 1);
    }
    return assignment;
}

std::vector<int> label_map(std::span<const int> estimate, std::span<const int> truth, std::size_t num_classes) {
    if (estimate.size() != truth.size()) {
        throw InputError("partitions differ in length");
    }
    const auto kk = static_cast<Index>(num_classes);
    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(kk, kk);
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        if (estimate[i] < 0 || estimate[i] >= kk || truth[i] < 0 || truth[i] >= kk) {
            throw InputError("class label outside [0, K)");
        }
        overlap(estimate[i], truth[i]) += 1.0;
    }
    return hungarian(-overlap);
}

std::vector<int> align_labels(std::span<const int> estimate, std::span<const int> truth, std::size_t num_classes) {
    const std::vector<int> map = label_map(estimate, truth, num_classes);
    std::vector<int> aligned(estimate.size());
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        aligned[i] = map[static_cast<std::size_t>(estimate[i])];
    }
    return aligned;
}

double intensity_recovery(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols() || truth.rows() != truth.cols()) {
        throw InputError("intensity matrices must be square with equal K");
    }
    const double k2 = static_cast<double>(truth.size());
    return k2 == 0.0 ? 0.0 : std::abs(truth.sum() - estimate.sum()) / k2;
}

double aligned_mae(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols() || truth.rows() != truth.cols()) {
        throw InputError("intensity matrices must be square with equal K");
    }
    const Index kk = truth.rows();
    if (kk == 0) {
        return 0.0;
    }
    const auto cost_of = [&](const std::vector<int>& perm) {
        double total = 0.0;
        for (Index k = 0; k < kk; ++k) {
            for (Index l = 0; l < kk; ++l) {
                total += std::abs(truth(k, l) - estimate(perm[static_cast<std::size_t>(k)],
                                                         perm[static_cast<std::size_t>(l)]));
            }
        }
        return total;
    };
    std::vector<int> perm(static_cast<std::size_t>(kk));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    if (kk <= 8) {
        do {
            best = std::min(best, cost_of(perm));
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        Eigen::MatrixXd cost(kk, kk);
        for (Index k = 0; k < kk; ++k) {
            for (Index c = 0; c < kk; ++c) {
                cost(k, c) = (truth.row(k) - estimate.row(c)).cwiseAbs().sum() +
                             (truth.col(k) - estimate.col(c)).cwiseAbs().sum();
            }
        }
        best = cost_of(hungarian(cost));
    }
    return best / static_cast<double>(kk * kk);
}

double r_dense(std::span<const int> estimate, std::span<const int> truth, std::span<const NodeId> dense_nodes,
               std::size_t num_classes) {
    if (dense_nodes.empty()) {
        throw InputError("dense node set is empty");
    }
    const std::vector<int> aligned = align_labels(estimate, truth, num_classes);
    std::size_t hits = 0;
    for (const NodeId i : dense_nodes) {
        if (i < 0 || static_cast<std::size_t>(i) >= truth.size()) {
            throw InputError("dense node id outside the partition");
        }
        hits += aligned[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(dense_nodes.size());
}

namespace {

void check_tau(const Eigen::MatrixXd& tau, const ModelParams& params, const EdgeList& edges) {
    if (tau.rows() != static_cast<Index>(edges.num_nodes()) ||
        tau.cols() != static_cast<Index>(params.num_classes())) {
        throw InputError("tau must be m x K");
    }
}

/// Expected count of a Hawkes (k, l) pair over [t0, t0 + length] given its excitation at t0.
double hawkes_expected_count(double mean_baseline, double excitation, double decay, double impact_at_start,
                             double length) {
    const double rate = decay * (1.0 - excitation);
    const double steady = excitation * mean_baseline / (1.0 - excitation);
    const double start = excitation * impact_at_start;
    return (mean_baseline + steady) * length + (start - steady) * -std::expm1(-rate * length) / rate;
}

}  // namespace

std::vector<double> predict_counts(const ModelParams& params, const Eigen::MatrixXd& tau, const EdgeList& edges,
                                   double t0, double t1, const HistoryStore* history) {
    check_tau(tau, params, edges);
    if (t1 < t0) {
        throw InputError("prediction horizon must satisfy t0 <= t1");
    }
    std::vector<double> out(edges.size(), 0.0);
    const double length = t1 - t0;
    if (length == 0.0) {
        return out;
    }
    const Index kk = static_cast<Index>(params.num_classes());
    Eigen::MatrixXd mass(kk, kk);
    for (Index k = 0; k < kk; ++k) {
        for (Index l = 0; l < kk; ++l) {
            mass(k, l) = params.baseline_mass(static_cast<std::size_t>(k), static_cast<std::size_t>(l), t0, t1);
        }
    }
    if (!params.hawkes()) {
        for (std::size_t p = 0; p < edges.size(); ++p) {
            const auto& [src, dst] = edges.pair(p);
            out[p] = tau.row(src) * mass * tau.row(dst).transpose();
        }
        return out;
    }
    params.require_stationary();
    Eigen::MatrixXd quiet(kk, kk);
    for (Index k = 0; k < kk; ++k) {
        for (Index l = 0; l < kk; ++l) {
            quiet(k, l) = hawkes_expected_count(mass(k, l) / length, params.excitation(k, l), params.decay, 0.0, length);
        }
    }
    Eigen::MatrixXd table(kk, kk);
    for (std::size_t p = 0; p < edges.size(); ++p) {
        const auto& [src, dst] = edges.pair(p);
        double impact = 0.0;
        if (history != nullptr) {
            for (const double s : history->times(static_cast<std::uint32_t>(p))) {
                if (s <= t0) {
                    impact += params.decay * std::exp(-params.decay * (t0 - s));
                }
            }
        }
        if (impact == 0.0) {
            out[p] = tau.row(src) * quiet * tau.row(dst).transpose();
            continue;
        }
        for (Index k = 0; k < kk; ++k) {
            for (Index l = 0; l < kk; ++l) {
                table(k, l) = hawkes_expected_count(mass(k, l) / length, params.excitation(k, l), params.decay,
                                                    impact, length);
            }
        }
        out[p] = tau.row(src) * table * tau.row(dst).transpose();
    }
    return out;
}

std::vector<double> predict_counts_monte_carlo(const ModelParams& params, const Eigen::MatrixXd& tau,
                                               const EdgeList& edges, double t0, double t1,
                                               const HistoryStore* history, std::size_t paths, std::uint64_t seed) {
    check_tau(tau, params, edges);
    if (t1 < t0) {
        throw InputError("prediction horizon must satisfy t0 <= t1");
    }
    if (paths == 0) {
        throw InputError("Monte Carlo prediction needs at least one path");
    }
    if (params.hawkes()) {
        params.require_stationary();
    }
    std::vector<double> out(edges.size(), 0.0);
    const auto draw = [](const Eigen::RowVectorXd& w, Rng& rng) {
        double u = rng.uniform() * w.sum();
        for (Index k = 0; k + 1 < w.size(); ++k) {
            if (u < w(k)) {
                return static_cast<std::size_t>(k);
            }
            u -= w(k);
        }
        return static_cast<std::size_t>(w.size() - 1);
    };
    for (std::size_t p = 0; p < edges.size(); ++p) {
        const auto& [src, dst] = edges.pair(p);
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(src), static_cast<std::uint64_t>(dst));
        std::span<const double> past;
        if (history != nullptr) {
            past = history->times(static_cast<std::uint32_t>(p));
        }
        double total = 0.0;
        for (std::size_t r = 0; r < paths; ++r) {
            const std::size_t k = draw(tau.row(src), rng);
            const std::size_t l = draw(tau.row(dst), rng);
            total += static_cast<double>(simulate_pair(params, k, l, t0, t1, past, rng).size());
        }
        out[p] = total / static_cast<double>(paths);
    }
    return out;
}

std::vector<double> observed_counts(std::span<const Event> events, const EdgeList& edges) {
    std::vector<double> out(edges.size(), 0.0);
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto p = edges.find(events[e].src, events[e].dst);
        if (!p) {
            throw InputError("event on a pair outside the edge list", e);
        }
        out[*p] += 1.0;
    }
    return out;
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) {
        throw InputError("prediction and observation differ in length");
    }
    if (predicted.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        total += d * d;
    }
    return std::sqrt(total / static_cast<double>(predicted.size()));
}

std::vector<double> regret_trace(std::span<const ModelParams> snapshots, const ModelParams& truth,
                                 std::span<const int> z_star, std::span<const Event> events, const EdgeList& edges,
                                 const WindowConfig& windows) {
    if (snapshots.size() > windows.count()) {
        throw InputError("more parameter snapshots than windows");
    }
    if (edges.empty()) {
        throw InputError("regret needs a nonempty edge list");
    }
    require_sorted(events);
    double min_decay = truth.hawkes() ? truth.decay : 0.0;
    for (const auto& s : snapshots) {
        if (s.hawkes()) {
            min_decay = min_decay > 0.0 ? std::min(min_decay, s.decay) : s.decay;
        }
    }
    // Earlier events contribute at most exp(-40) of their kernel mass past this reach.
    const double reach = min_decay > 0.0 ? 40.0 / min_decay : 0.0;
    const double scale = 1.0 / static_cast<double>(edges.size());
    std::vector<double> out;
    out.reserve(snapshots.size());
    double total = 0.0;
    for (std::size_t n = 1; n <= snapshots.size(); ++n) {
        const TimeWindow window{windows.window_start(n), windows.window_end(n), n == windows.count()};
        const auto first = std::lower_bound(events.begin(), events.end(), window.start - reach,
                                            [](const Event& e, double t) { return e.t < t; });
        const auto slice = events.subspan(static_cast<std::size_t>(first - events.begin()));
        const double est = window_loglik(snapshots[n - 1], z_star, slice, edges, window);
        const double ref = window_loglik(truth, z_star, slice, edges, window);
        total += (ref - est) * scale;
        out.push_back(total);
    }
    return out;
}

double complete_loglik(const ModelParams& params, std::span<const double> pi, std::span<const int> z,
                       std::span<const Event> events, const EdgeList& edges, double horizon) {
    if (pi.size() != params.num_classes()) {
        throw InputError("pi length differs from K");
    }
    double prior = 0.0;
    for (const int c : z) {
        if (c < 0 || static_cast<std::size_t>(c) >= pi.size()) {
            throw InputError("class label outside [0, K)");
        }
        prior += std::log(pi[static_cast<std::size_t>(c)]);
    }
    return prior + window_loglik(params, z, events, edges, TimeWindow{0.0, horizon, true});
}

}  // namespace streamsbm
