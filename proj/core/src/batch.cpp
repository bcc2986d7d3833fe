#include "streamsbm/batch.hpp"

#include "streamsbm/likelihood.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace streamsbm {

using Index = Eigen::Index;

namespace {

double entropy_term(const Eigen::MatrixXd& tau, std::span<const double> pi) {
    double total = 0.0;
    for (Index i = 0; i < tau.rows(); ++i) {
        for (Index k = 0; k < tau.cols(); ++k) {
            const double t = tau(i, k);
            if (t > 0.0) {
                total += t * (std::log(pi[static_cast<std::size_t>(k)]) - std::log(t));
            }
        }
    }
    return total;
}

void check_shapes(const ModelParams& params, const Eigen::MatrixXd& tau, std::span<const double> pi,
                  const EdgeList& edges) {
    const auto kk = static_cast<Index>(params.num_classes());
    if (tau.rows() != static_cast<Index>(edges.num_nodes()) || tau.cols() != kk ||
        pi.size() != params.num_classes()) {
        throw InputError("tau must be m x K and pi of length K");
    }
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Full-horizon evaluation context: grouped events plus tables at the current parameters.
struct Horizon {
    TimeWindow window;
    PairTimeline timeline;
    ActiveTables tables;
    Eigen::MatrixXd mass;

    Horizon(std::span<const Event> events, const EdgeList& edges, double horizon)
        : window{0.0, horizon, true}, timeline(events, edges, window) {}

    void evaluate(const ModelParams& params, const EdgeList& edges) {
        tables.evaluate(params, window, timeline.active(), edges.size());
        mass = window_integrals(params, window).baseline_mass;
    }
    [[nodiscard]] double expected(const EdgeList& edges, const Eigen::MatrixXd& tau) const {
        return expected_loglik(edges, tau, mass, tables);
    }
};

void require_horizon(std::span<const Event> events, double horizon) {
    if (!(horizon > 0.0)) {
        throw InputError("horizon must be positive");
    }
    require_sorted(events);
    if (!events.empty() && (events.front().t < 0.0 || events.back().t > horizon)) {
        throw InputError("events must lie in [0, T]");
    }
}

}  // namespace

double elbo(const ModelParams& params, const Eigen::MatrixXd& tau, std::span<const double> pi,
            std::span<const Event> events, const EdgeList& edges, double horizon) {
    check_shapes(params, tau, pi, edges);
    require_horizon(events, horizon);
    Horizon h(events, edges, horizon);
    h.evaluate(params, edges);
    return h.expected(edges, tau) + entropy_term(tau, pi);
}

double marginal_loglik_bruteforce(const ModelParams& params, std::span<const double> pi,
                                  std::span<const Event> events, const EdgeList& edges, double horizon) {
    const std::size_t kk = params.num_classes();
    const auto m = static_cast<std::size_t>(edges.num_nodes());
    if (pi.size() != kk) {
        throw InputError("pi length differs from K");
    }
    if (std::pow(static_cast<double>(kk), static_cast<double>(m)) > kMaxEnumeration) {
        throw InputError("K^m = " + std::to_string(kk) + "^" + std::to_string(m) + " exceeds the enumeration bound " +
                         std::to_string(static_cast<long long>(kMaxEnumeration)));
    }
    require_horizon(events, horizon);
    Horizon h(events, edges, horizon);
    h.evaluate(params, edges);

    // Per-pair full log-likelihood tables L_p = X_p - M (quiet pairs: -M).
    const auto cells = static_cast<Index>(kk * kk);
    Eigen::MatrixXd pair_tables(cells, static_cast<Index>(edges.size()));
    for (std::size_t p = 0; p < edges.size(); ++p) {
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> out(
            pair_tables.col(static_cast<Index>(p)).data(), static_cast<Index>(kk), static_cast<Index>(kk));
        out = -h.mass;
        const auto slot = h.tables.slot_of(static_cast<std::uint32_t>(p));
        if (slot >= 0) {
            out += h.tables.table(static_cast<std::size_t>(slot));
        }
    }
    std::vector<double> log_pi(kk);
    for (std::size_t k = 0; k < kk; ++k) {
        log_pi[k] = pi[k] > 0.0 ? std::log(pi[k]) : -std::numeric_limits<double>::infinity();
    }

    std::vector<int> z(m, 0);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(std::pow(static_cast<double>(kk), static_cast<double>(m))));
    while (true) {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            v += log_pi[static_cast<std::size_t>(z[i])];
        }
        for (std::size_t p = 0; p < edges.size(); ++p) {
            const auto& [src, dst] = edges.pair(p);
            v += pair_tables(static_cast<Index>(z[static_cast<std::size_t>(src)] * static_cast<int>(kk) +
                                                z[static_cast<std::size_t>(dst)]),
                             static_cast<Index>(p));
        }
        values.push_back(v);
        std::size_t i = 0;
        while (i < m && ++z[i] == static_cast<int>(kk)) {
            z[i++] = 0;
        }
        if (i == m) {
            break;
        }
    }
    const double top = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(top)) {
        return top;
    }
    long double total = 0.0L;
    for (const double v : values) {
        total += std::exp(static_cast<long double>(v - top));
    }
    return top + static_cast<double>(std::log(total));
}

namespace {

/// Closed-form M-step for the Poisson families: a_kl(h) = weighted counts / (pair weight * basis mass).
void poisson_m_step(ModelParams& params, const EdgeList& edges, const Eigen::MatrixXd& tau,
                    const PairTimeline& timeline, const TimeWindow& window, double floor) {
    const std::size_t kk = params.num_classes();
    const std::size_t hh = params.num_basis();
    const Eigen::MatrixXd total = pair_weight_total(edges, tau);
    std::vector<Eigen::MatrixXd> counts(hh, Eigen::MatrixXd::Zero(static_cast<Index>(kk), static_cast<Index>(kk)));
    std::vector<double> per_basis(hh);
    for (const auto& a : timeline.active()) {
        std::fill(per_basis.begin(), per_basis.end(), 0.0);
        for (const double t : a.times) {
            per_basis[hh == 1 ? 0 : params.basis.active(t)] += 1.0;
        }
        const auto& [src, dst] = edges.pair(a.pair);
        const Eigen::MatrixXd w = tau.row(src).transpose() * tau.row(dst);
        for (std::size_t h = 0; h < hh; ++h) {
            if (per_basis[h] > 0.0) {
                counts[h] += per_basis[h] * w;
            }
        }
    }
    for (std::size_t h = 0; h < hh; ++h) {
        const double mass = hh == 1 ? window.length() : params.basis.mass(h, window.start, window.end);
        for (Index k = 0; k < static_cast<Index>(kk); ++k) {
            for (Index l = 0; l < static_cast<Index>(kk); ++l) {
                const double exposure = total(k, l) * mass;
                // Unidentified coefficients (no exposure) keep their value.
                if (exposure > 0.0) {
                    params.baseline[h](k, l) = std::max(counts[h](k, l) / exposure, floor);
                }
            }
        }
    }
}

/// Projected gradient ascent with diagonal scaling theta^2 and backtracking; a step is kept
/// only if it increases the expected log-likelihood.
void gradient_m_step(ModelParams& params, const EdgeList& edges, const Eigen::MatrixXd& tau, Horizon& h,
                     const BatchOptions& options) {
    double current = h.expected(edges, tau);
    for (std::size_t step = 0; step < options.gradient_steps; ++step) {
        const Eigen::VectorXd gradient = expected_gradient(params, h.window, edges, tau, h.timeline.active());
        const Eigen::VectorXd theta = params.values();
        const Eigen::VectorXd direction = theta.array().square() * gradient.array();
        const double relative = (direction.array() / theta.array()).abs().maxCoeff();
        if (!(relative > 0.0) || !std::isfinite(relative)) {
            break;
        }
        double scale = 0.5 / relative;
        bool improved = false;
        for (int attempt = 0; attempt < 40; ++attempt, scale *= 0.5) {
            ModelParams trial = params;
            apply_step(trial, scale * direction, options.rate_floor, options.max_excitation, Projection::Clip);
            h.evaluate(trial, edges);
            const double value = h.expected(edges, tau);
            if (value > current) {
                params = std::move(trial);
                current = value;
                improved = true;
                break;
            }
        }
        if (!improved) {
            h.evaluate(params, edges);
            break;
        }
    }
}

}  // namespace

BatchFitReport batch_fit(std::span<const Event> events, const EdgeList& edges, const BatchOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    require_horizon(events, options.horizon);
    if (options.num_classes == 0) {
        throw InputError("number of classes must be positive");
    }
    BatchFitReport report;
    LatentState state = init_state(edges.num_nodes(), options.num_classes, options.seed, options.init);
    report.params = init_params(options.model, options.num_classes,
                                BasisFamily(options.basis_count, options.basis_period), options.ranges, options.seed,
                                empirical_pair_rate(events.size(), edges.size(), options.horizon));
    report.tau = std::move(state.tau);
    report.pi = std::move(state.pi);

    const std::size_t kk = options.num_classes;
    Horizon h(events, edges, options.horizon);
    h.evaluate(report.params, edges);
    double previous = h.expected(edges, report.tau) + entropy_term(report.tau, as_span(report.pi));
    report.elbo_trace.push_back(previous);

    Eigen::VectorXd row(static_cast<Index>(kk));
    Eigen::VectorXd log_pi(static_cast<Index>(kk));
    for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
        // M-step.
        if (report.params.hawkes()) {
            gradient_m_step(report.params, edges, report.tau, h, options);
        } else {
            poisson_m_step(report.params, edges, report.tau, h.timeline, h.window, options.rate_floor);
            h.evaluate(report.params, edges);
        }

        // E-step: one sequential sweep; each node update maximizes the ELBO in tau_i.
        for (Index k = 0; k < static_cast<Index>(kk); ++k) {
            log_pi(k) = report.pi(k) > 0.0 ? std::log(report.pi(k)) : -std::numeric_limits<double>::infinity();
        }
        for (NodeId i = 0; i < edges.num_nodes(); ++i) {
            row = node_evidence(edges, report.tau, h.mass, h.tables, i) + log_pi;
            const double top = row.maxCoeff();
            if (!std::isfinite(top)) {
                throw NumericError("node " + std::to_string(i) + " has no finite class log-weight");
            }
            row = (row.array() - top).exp();
            report.tau.row(i) = row.transpose() / row.sum();
        }
        if (!options.freeze_pi) {
            report.pi = report.tau.colwise().mean().transpose();
        }

        const double value = h.expected(edges, report.tau) + entropy_term(report.tau, as_span(report.pi));
        report.elbo_trace.push_back(value);
        report.iterations = iter;
        if (std::abs(value - previous) < options.tolerance) {
            report.converged = true;
            break;
        }
        previous = value;
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace streamsbm
