#pragma once

#include "streamsbm/model.hpp"
#include "streamsbm/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace streamsbm::testing {

/// Adaptive Simpson quadrature of f over [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
    const auto step = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi, double whole,
                          double eps, int level) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (level <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
            return left + right + (left + right - whole) / 15.0;
        }
        return self(self, lo, mid, flo, flm, fmid, left, eps / 2.0, level - 1) +
               self(self, mid, hi, fmid, frm, fhi, right, eps / 2.0, level - 1);
    };
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return step(step, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Integral of a piecewise-smooth intensity, split at the given breakpoints.
inline double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> breaks, double tol = 1e-12) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = std::max(a, breaks[i]);
        const double hi = std::min(b, breaks[i + 1]);
        if (hi > lo) {
            total += simpson(f, lo, hi, tol);
        }
    }
    return total;
}

/// Direct intensity from the model definition: baseline via the step basis plus the
/// exponential kernel summed over earlier timestamps (no recursion).
inline double direct_intensity(const ModelParams& p, std::size_t k, std::size_t l, double t,
                               std::span<const double> history) {
    double value = p.baseline[p.num_basis() == 1 ? 0 : p.basis.active(t)](static_cast<Eigen::Index>(k),
                                                                          static_cast<Eigen::Index>(l));
    if (p.hawkes()) {
        for (const double s : history) {
            if (s < t) {
                value += p.excitation(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * p.decay *
                         std::exp(-p.decay * (t - s));
            }
        }
    }
    return value;
}

/// Random parameters of a family with rates in [0.2, 1.5], excitation in [0.1, 0.6], decay in [0.5, 2].
inline ModelParams random_params(ModelKind kind, std::size_t kk, std::size_t hh, double period, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> rate(0.2, 1.5);
    std::uniform_real_distribution<double> excite(0.1, 0.6);
    std::uniform_real_distribution<double> decay(0.5, 2.0);
    const auto k = static_cast<Eigen::Index>(kk);
    const auto draw = [&](auto& dist) {
        Eigen::MatrixXd m(k, k);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = dist(rng);
        }
        return m;
    };
    std::vector<Eigen::MatrixXd> coefficients;
    for (std::size_t h = 0; h < hh; ++h) {
        coefficients.push_back(draw(rate));
    }
    switch (kind) {
        case ModelKind::HomPoisson:
            return ModelParams::hom_poisson(coefficients.front());
        case ModelKind::InhomPoisson:
            return ModelParams::inhom_poisson(coefficients, BasisFamily(hh, period));
        case ModelKind::HomHawkes:
            return ModelParams::hom_hawkes(coefficients.front(), draw(excite), decay(rng));
        case ModelKind::InhomHawkes:
            break;
    }
    return ModelParams::inhom_hawkes(coefficients, BasisFamily(hh, period), draw(excite), decay(rng));
}

/// Sorted uniform event stream on the pairs of `edges` over [0, horizon].
inline std::vector<Event> random_stream(const EdgeList& edges, std::size_t count, double horizon,
                                        std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    std::uniform_real_distribution<double> time(0.0, horizon);
    std::vector<Event> events(count);
    for (auto& e : events) {
        const auto& p = edges.pair(pick(rng));
        e = {p.src, p.dst, time(rng)};
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    return events;
}

/// Complete directed edge list on m nodes.
inline EdgeList complete_edges(NodeId m) {
    std::vector<NodePair> pairs;
    for (NodeId i = 0; i < m; ++i) {
        for (NodeId j = 0; j < m; ++j) {
            if (i != j) {
                pairs.push_back({i, j});
            }
        }
    }
    return EdgeList(m, std::move(pairs));
}

inline constexpr ModelKind kAllKinds[] = {ModelKind::HomPoisson, ModelKind::InhomPoisson, ModelKind::HomHawkes,
                                          ModelKind::InhomHawkes};

}  // namespace streamsbm::testing
