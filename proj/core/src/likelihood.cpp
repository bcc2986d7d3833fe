#include "streamsbm/likelihood.hpp"

#include <cmath>
#include <limits>

namespace streamsbm {

namespace {

using Index = Eigen::Index;

/// Walks a pair's sorted timestamps and exposes, at every event, the sums over strictly
/// earlier events of exp(-decay (t - s)) and (t - s) exp(-decay (t - s)).
class ExcitationScan {
public:
    explicit ExcitationScan(double decay) : decay_(decay) {}

    void advance(double t) {
        if (t > last_) {
            if (std::isfinite(last_)) {
                const double dt = t - last_;
                const double e = std::exp(-decay_ * dt);
                lagged_ = e * (lagged_ + dt * (decayed_ + tied_));
                decayed_ = e * (decayed_ + tied_);
            }
            last_ = t;
            tied_ = 0.0;
        }
    }
    void record() { tied_ += 1.0; }

    [[nodiscard]] double decayed() const noexcept { return decayed_; }
    [[nodiscard]] double lagged() const noexcept { return lagged_; }

private:
    double decay_;
    double last_{-std::numeric_limits<double>::infinity()};
    double tied_{0.0};
    double decayed_{0.0};
    double lagged_{0.0};
};

std::size_t basis_index(const ModelParams& params, double t) {
    return params.baseline.size() == 1 ? 0 : params.basis.active(t);
}

}  // namespace

WindowIntegrals window_integrals(const ModelParams& params, const TimeWindow& window) {
    WindowIntegrals out;
    out.window = window;
    const auto kk = static_cast<Index>(params.num_classes());
    out.baseline_mass = Eigen::MatrixXd::Zero(kk, kk);
    out.basis_mass.resize(params.num_basis());
    for (std::size_t h = 0; h < params.num_basis(); ++h) {
        out.basis_mass[h] = params.num_basis() == 1 ? std::max(0.0, window.length())
                                                    : params.basis.mass(h, window.start, window.end);
        out.baseline_mass += params.baseline[h] * out.basis_mass[h];
    }
    return out;
}

void pair_event_table(const ModelParams& params, std::span<const double> times, const TimeWindow& window,
                      Eigen::Ref<Eigen::MatrixXd> out) {
    const auto kk = static_cast<Index>(params.num_classes());
    out.setZero();
    if (!params.hawkes()) {
        std::vector<double> counts(params.num_basis(), 0.0);
        for (const double t : times) {
            if (!window.reaches(t)) {
                break;
            }
            if (t >= window.start) {
                counts[basis_index(params, t)] += 1.0;
            }
        }
        for (std::size_t h = 0; h < counts.size(); ++h) {
            if (counts[h] > 0.0) {
                out.array() += counts[h] * params.baseline[h].array().log();
            }
        }
        return;
    }

    const double decay = params.decay;
    ExcitationScan scan(decay);
    double compensator = 0.0;
    for (const double t : times) {
        if (!window.reaches(t)) {
            break;
        }
        compensator += kernel_mass(t, window.start, window.end, decay);
        scan.advance(t);
        if (t >= window.start) {
            const auto& mu = params.baseline[basis_index(params, t)];
            const double impact = decay * scan.decayed();
            for (Index k = 0; k < kk; ++k) {
                for (Index l = 0; l < kk; ++l) {
                    out(k, l) += std::log(mu(k, l) + params.excitation(k, l) * impact);
                }
            }
        }
        scan.record();
    }
    out -= params.excitation * compensator;
}

void add_pair_gradient(const ModelParams& params, std::span<const double> times, const TimeWindow& window,
                       const Eigen::MatrixXd& weights, Eigen::Ref<Eigen::VectorXd> gradient) {
    const std::size_t kk = params.num_classes();
    if (!params.hawkes()) {
        std::vector<double> counts(params.num_basis(), 0.0);
        for (const double t : times) {
            if (!window.reaches(t)) {
                break;
            }
            if (t >= window.start) {
                counts[basis_index(params, t)] += 1.0;
            }
        }
        for (std::size_t h = 0; h < counts.size(); ++h) {
            if (counts[h] == 0.0) {
                continue;
            }
            for (std::size_t k = 0; k < kk; ++k) {
                for (std::size_t l = 0; l < kk; ++l) {
                    gradient(static_cast<Index>(params.baseline_index(h, k, l))) +=
                        weights(static_cast<Index>(k), static_cast<Index>(l)) * counts[h] /
                        params.baseline[h](static_cast<Index>(k), static_cast<Index>(l));
                }
            }
        }
        return;
    }

    const double decay = params.decay;
    const auto decay_slot = static_cast<Index>(params.decay_index());
    ExcitationScan scan(decay);
    double compensator = 0.0;
    double compensator_slope = 0.0;  // d compensator / d decay
    for (const double t : times) {
        if (!window.reaches(t)) {
            break;
        }
        const double from = std::max(window.start, t);
        if (window.end > from) {
            const double near = from - t;
            const double far = window.end - t;
            const double e_near = std::exp(-decay * near);
            const double e_far = std::exp(-decay * far);
            compensator += e_near - e_far;
            compensator_slope += -near * e_near + far * e_far;
        }
        scan.advance(t);
        if (t >= window.start) {
            const std::size_t h = basis_index(params, t);
            const auto& mu = params.baseline[h];
            const double decayed = scan.decayed();
            const double impact = decay * decayed;
            const double impact_slope = decayed - decay * scan.lagged();
            for (std::size_t k = 0; k < kk; ++k) {
                for (std::size_t l = 0; l < kk; ++l) {
                    const auto ki = static_cast<Index>(k);
                    const auto li = static_cast<Index>(l);
                    const double b = params.excitation(ki, li);
                    const double w = weights(ki, li) / (mu(ki, li) + b * impact);
                    gradient(static_cast<Index>(params.baseline_index(h, k, l))) += w;
                    gradient(static_cast<Index>(params.excitation_index(k, l))) += w * impact;
                    gradient(decay_slot) += w * b * impact_slope;
                }
            }
        }
        scan.record();
    }
    for (std::size_t k = 0; k < kk; ++k) {
        for (std::size_t l = 0; l < kk; ++l) {
            const auto ki = static_cast<Index>(k);
            const auto li = static_cast<Index>(l);
            gradient(static_cast<Index>(params.excitation_index(k, l))) -= weights(ki, li) * compensator;
            gradient(decay_slot) -= weights(ki, li) * params.excitation(ki, li) * compensator_slope;
        }
    }
}

void ActiveTables::evaluate(const ModelParams& params, const TimeWindow& window,
                            std::span<const ActivePair> active, std::size_t num_pairs) {
    classes_ = params.num_classes();
    const std::size_t cells = classes_ * classes_;
    for (const auto p : pairs_) {
        if (p < slot_.size()) {
            slot_[p] = -1;
        }
    }
    if (slot_.size() != num_pairs) {
        slot_.assign(num_pairs, -1);
    }
    pairs_.clear();
    values_.resize(active.size() * cells);
    Eigen::MatrixXd scratch(static_cast<Index>(classes_), static_cast<Index>(classes_));
    for (std::size_t s = 0; s < active.size(); ++s) {
        pair_event_table(params, active[s].times, window, scratch);
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            values_.data() + s * cells, static_cast<Index>(classes_), static_cast<Index>(classes_)) = scratch;
        pairs_.push_back(active[s].pair);
        slot_[active[s].pair] = static_cast<std::int64_t>(s);
    }
}

Eigen::MatrixXd pair_weight_total(const EdgeList& edges, const Eigen::MatrixXd& tau) {
    const Index kk = tau.cols();
    Eigen::MatrixXd neighbour_sum = Eigen::MatrixXd::Zero(tau.rows(), kk);
    for (const auto& [src, dst] : edges.pairs()) {
        neighbour_sum.row(src) += tau.row(dst);
    }
    return tau.transpose() * neighbour_sum;
}

Eigen::MatrixXd expected_node_evidence(const EdgeList& edges, const Eigen::MatrixXd& tau,
                                       const Eigen::MatrixXd& baseline_mass, const ActiveTables& tables) {
    const Index m = tau.rows();
    const Index kk = tau.cols();
    Eigen::MatrixXd out_sum = Eigen::MatrixXd::Zero(m, kk);
    Eigen::MatrixXd in_sum = Eigen::MatrixXd::Zero(m, kk);
    for (const auto& [src, dst] : edges.pairs()) {
        out_sum.row(src) += tau.row(dst);
        in_sum.row(dst) += tau.row(src);
    }
    // Compensator part shared by all pairs: -sum_l M_kl out(i,l) - sum_l M_lk in(i,l).
    Eigen::MatrixXd evidence = -(out_sum * baseline_mass.transpose()) - (in_sum * baseline_mass);
    for (std::size_t s = 0; s < tables.size(); ++s) {
        const auto& [src, dst] = edges.pair(tables.pair(s));
        const auto x = tables.table(s);
        evidence.row(src) += (x * tau.row(dst).transpose()).transpose();
        evidence.row(dst) += tau.row(src) * x;
    }
    return evidence;
}

Eigen::VectorXd node_evidence(const EdgeList& edges, const Eigen::MatrixXd& tau,
                              const Eigen::MatrixXd& baseline_mass, const ActiveTables& tables, NodeId node) {
    const Index kk = tau.cols();
    Eigen::VectorXd evidence = Eigen::VectorXd::Zero(kk);
    for (const auto p : edges.outbound(node)) {
        const NodeId j = edges.pair(p).dst;
        evidence -= baseline_mass * tau.row(j).transpose();
        const auto slot = tables.slot_of(p);
        if (slot >= 0) {
            evidence += tables.table(static_cast<std::size_t>(slot)) * tau.row(j).transpose();
        }
    }
    for (const auto p : edges.inbound(node)) {
        const NodeId j = edges.pair(p).src;
        evidence -= baseline_mass.transpose() * tau.row(j).transpose();
        const auto slot = tables.slot_of(p);
        if (slot >= 0) {
            evidence += tables.table(static_cast<std::size_t>(slot)).transpose() * tau.row(j).transpose();
        }
    }
    return evidence;
}

double expected_loglik(const EdgeList& edges, const Eigen::MatrixXd& tau, const Eigen::MatrixXd& baseline_mass,
                       const ActiveTables& tables) {
    double total = -(baseline_mass.array() * pair_weight_total(edges, tau).array()).sum();
    for (std::size_t s = 0; s < tables.size(); ++s) {
        const auto& [src, dst] = edges.pair(tables.pair(s));
        total += tau.row(src) * tables.table(s) * tau.row(dst).transpose();
    }
    return total;
}

double assigned_loglik(const EdgeList& edges, std::span<const int> z, const Eigen::MatrixXd& baseline_mass,
                       const ActiveTables& tables) {
    double total = 0.0;
    for (const auto& [src, dst] : edges.pairs()) {
        total -= baseline_mass(z[static_cast<std::size_t>(src)], z[static_cast<std::size_t>(dst)]);
    }
    for (std::size_t s = 0; s < tables.size(); ++s) {
        const auto& [src, dst] = edges.pair(tables.pair(s));
        total += tables.table(s)(z[static_cast<std::size_t>(src)], z[static_cast<std::size_t>(dst)]);
    }
    return total;
}

Eigen::VectorXd expected_gradient(const ModelParams& params, const TimeWindow& window, const EdgeList& edges,
                                  const Eigen::MatrixXd& tau, std::span<const ActivePair> active) {
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(static_cast<Index>(params.num_values()));
    const Eigen::MatrixXd total = pair_weight_total(edges, tau);
    const std::size_t kk = params.num_classes();
    for (std::size_t h = 0; h < params.num_basis(); ++h) {
        const double mass = params.num_basis() == 1 ? std::max(0.0, window.length())
                                                    : params.basis.mass(h, window.start, window.end);
        for (std::size_t k = 0; k < kk; ++k) {
            for (std::size_t l = 0; l < kk; ++l) {
                gradient(static_cast<Index>(params.baseline_index(h, k, l))) -=
                    total(static_cast<Index>(k), static_cast<Index>(l)) * mass;
            }
        }
    }
    Eigen::MatrixXd weights(static_cast<Index>(kk), static_cast<Index>(kk));
    for (const auto& a : active) {
        const auto& [src, dst] = edges.pair(a.pair);
        weights.noalias() = tau.row(src).transpose() * tau.row(dst);
        add_pair_gradient(params, a.times, window, weights, gradient);
    }
    return gradient;
}

PairTimeline::PairTimeline(std::span<const Event> events, const EdgeList& edges, const TimeWindow& upto) {
    std::vector<std::uint32_t> pair_of;
    pair_of.reserve(events.size());
    std::vector<std::size_t> counts(edges.size() + 1, 0);
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto& ev = events[e];
        if (!upto.reaches(ev.t)) {
            break;
        }
        const auto p = edges.find(ev.src, ev.dst);
        if (!p) {
            throw InputError("event on pair (" + std::to_string(ev.src) + "," + std::to_string(ev.dst) +
                                 ") which is not in the edge list",
                             e);
        }
        pair_of.push_back(static_cast<std::uint32_t>(*p));
        ++counts[*p + 1];
    }
    for (std::size_t p = 1; p < counts.size(); ++p) {
        counts[p] += counts[p - 1];
    }
    times_.resize(pair_of.size());
    std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
    for (std::size_t e = 0; e < pair_of.size(); ++e) {
        times_[fill[pair_of[e]]++] = events[e].t;
    }
    for (std::size_t p = 0; p < edges.size(); ++p) {
        if (counts[p + 1] > counts[p]) {
            active_.push_back({static_cast<std::uint32_t>(p),
                               std::span<const double>(times_).subspan(counts[p], counts[p + 1] - counts[p])});
        }
    }
}

double window_loglik(const ModelParams& params, std::span<const int> z, std::span<const Event> events,
                     const EdgeList& edges, const TimeWindow& window) {
    if (z.size() != static_cast<std::size_t>(edges.num_nodes())) {
        throw InputError("class vector length differs from the node count");
    }
    for (const int c : z) {
        if (c < 0 || static_cast<std::size_t>(c) >= params.num_classes()) {
            throw InputError("class label outside [0, K)");
        }
    }
    const PairTimeline timeline(events, edges, window);
    ActiveTables tables;
    tables.evaluate(params, window, timeline.active(), edges.size());
    return assigned_loglik(edges, z, window_integrals(params, window).baseline_mass, tables);
}

}  // namespace streamsbm
