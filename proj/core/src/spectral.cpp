#include "streamsbm/metrics.hpp"
#include "streamsbm/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>

namespace streamsbm {

using Index = Eigen::Index;

namespace {

struct Clustering {
    std::vector<int> labels;
    double sse{std::numeric_limits<double>::infinity()};
};

/// Lloyd iterations from a k-means++ seeding.
Clustering kmeans_once(const Eigen::MatrixXd& points, Index k, Rng& rng) {
    const Index n = points.rows();
    Eigen::MatrixXd centers(k, points.cols());
    Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    centers.row(0) = points.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    for (Index c = 1; c < k; ++c) {
        for (Index i = 0; i < n; ++i) {
            nearest(i) = std::min(nearest(i), (points.row(i) - centers.row(c - 1)).squaredNorm());
        }
        const double total = nearest.sum();
        Index pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (Index i = 0; i < n; ++i) {
                u -= nearest(i);
                if (u < 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = points.row(pick);
    }

    Clustering out;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        double sse = 0.0;
        for (Index i = 0; i < n; ++i) {
            Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Index c = 0; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            sse += best_d;
            if (out.labels[static_cast<std::size_t>(i)] != best) {
                changed = true;
                out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
            }
        }
        out.sse = sse;
        if (!changed && iter > 0) {
            break;
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        Eigen::VectorXd sizes = Eigen::VectorXd::Zero(k);
        for (Index i = 0; i < n; ++i) {
            sums.row(out.labels[static_cast<std::size_t>(i)]) += points.row(i);
            sizes(out.labels[static_cast<std::size_t>(i)]) += 1.0;
        }
        for (Index c = 0; c < k; ++c) {
            if (sizes(c) > 0.0) {
                centers.row(c) = sums.row(c) / sizes(c);
                continue;
            }
            // Empty cluster: move its center to the point farthest from its own center.
            Index far = 0;
            double far_d = -1.0;
            for (Index i = 0; i < n; ++i) {
                const double d = (points.row(i) - centers.row(out.labels[static_cast<std::size_t>(i)])).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            centers.row(c) = points.row(far);
        }
    }
    return out;
}

}  // namespace

SpectralResult spectral_count_baseline(std::span<const Event> events, NodeId num_nodes, std::size_t num_classes,
                                       std::uint64_t seed) {
    if (num_nodes < 1 || num_classes == 0 || num_classes > static_cast<std::size_t>(num_nodes)) {
        throw InputError("spectral clustering needs 1 <= K <= m");
    }
    const auto m = static_cast<Index>(num_nodes);
    const auto kk = static_cast<Index>(num_classes);
    SpectralResult result;
    result.classes.assign(static_cast<std::size_t>(m), 0);
    if (kk == 1) {
        return result;
    }
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto& ev = events[e];
        if (ev.src < 0 || ev.dst < 0 || ev.src >= num_nodes || ev.dst >= num_nodes) {
            throw InputError("event node id outside [0, m)", e);
        }
        counts(ev.src, ev.dst) += 1.0;
    }
    Rng rng = Rng::substream(seed, 0x73706563);
    if (counts.isZero()) {
        for (auto& c : result.classes) {
            c = static_cast<int>(rng.below(num_classes));
        }
        result.degenerate = true;
        return result;
    }
    const Eigen::MatrixXd symmetric = counts + counts.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    const auto& values = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(values(a)) > std::abs(values(b)); });
    Eigen::MatrixXd embedding(m, kk);
    for (Index c = 0; c < kk; ++c) {
        embedding.col(c) = solver.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    }
    Clustering best;
    for (int restart = 0; restart < 20; ++restart) {
        Clustering trial = kmeans_once(embedding, kk, rng);
        if (trial.sse < best.sse) {
            best = std::move(trial);
        }
    }
    result.classes = std::move(best.labels);
    return result;
}

}  // namespace streamsbm
