#pragma once

#include "streamsbm/model.hpp"
#include "streamsbm/online.hpp"
#include "streamsbm/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace streamsbm {

/// sum_p sum_kl tau_ik tau_jl L_p(k,l) over [0, T] plus sum_ik tau_ik log(pi_k / tau_ik),
/// with 0 log(pi / 0) = 0.
[[nodiscard]] double elbo(const ModelParams& params, const Eigen::MatrixXd& tau, std::span<const double> pi,
                          std::span<const Event> events, const EdgeList& edges, double horizon);

/// log sum_z prod_i pi_{z_i} L(theta | z) by enumerating all K^m assignments.
/// Rejects instances with K^m > kMaxEnumeration.
inline constexpr double kMaxEnumeration = 1e6;
[[nodiscard]] double marginal_loglik_bruteforce(const ModelParams& params, std::span<const double> pi,
                                                std::span<const Event> events, const EdgeList& edges,
                                                double horizon);

struct BatchOptions {
    ModelKind model{ModelKind::HomPoisson};
    std::size_t num_classes{3};
    std::size_t basis_count{1};
    double basis_period{1.0};
    double horizon{0.0};
    std::size_t max_iterations{100};
    double tolerance{1e-3};        // absolute change of the ELBO
    InitMode init{InitMode::OneHot};
    InitRanges ranges{};
    std::uint64_t seed{0};
    double rate_floor{kDefaultRateFloor};
    double max_excitation{0.999};
    std::size_t gradient_steps{5};  // projected-gradient steps per M-step (non-closed-form families)
    bool freeze_pi{false};
};

struct BatchFitReport {
    ModelParams params;
    Eigen::MatrixXd tau;
    Eigen::VectorXd pi;
    std::vector<double> elbo_trace;  // ELBO at the start and after every iteration
    std::size_t iterations{0};
    bool converged{false};
    double seconds{0.0};
};

/// Variational EM over the whole stream on [0, T]. Each iteration runs the M-step (closed
/// form for the Poisson families, projected gradient ascent with backtracking for the Hawkes
/// families), then one sequential sweep of per-node tau updates and the pi update. Every
/// step is an ascent step on the ELBO.
[[nodiscard]] BatchFitReport batch_fit(std::span<const Event> events, const EdgeList& edges,
                                       const BatchOptions& options);

}  // namespace streamsbm
