#include "oracles.hpp"

#include "streamsbm/batch.hpp"
#include "streamsbm/likelihood.hpp"
#include "streamsbm/metrics.hpp"
#include "streamsbm/online.hpp"
#include "streamsbm/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace streamsbm;

namespace {

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::MatrixXd random_tau(Eigen::Index m, Eigen::Index kk, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Eigen::MatrixXd tau(m, kk);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index k = 0; k < kk; ++k) {
            tau(i, k) = u(rng);
        }
        tau.row(i) /= tau.row(i).sum();
    }
    return tau;
}

/// log sum_z exp(...) accumulated in plain lexicographic order with a running maximum.
double enumerated_marginal(const ModelParams& params, std::span<const double> pi, std::span<const Event> events,
                           const EdgeList& edges, double horizon) {
    const auto m = static_cast<std::size_t>(edges.num_nodes());
    const std::size_t kk = params.num_classes();
    std::size_t configs = 1;
    for (std::size_t i = 0; i < m; ++i) {
        configs *= kk;
    }
    double running_max = -std::numeric_limits<double>::infinity();
    double scaled_sum = 0.0;
    std::vector<int> z(m);
    for (std::size_t c = 0; c < configs; ++c) {
        std::size_t code = c;
        for (std::size_t i = 0; i < m; ++i) {
            z[m - 1 - i] = static_cast<int>(code % kk);
            code /= kk;
        }
        const double v = complete_loglik(params, pi, z, events, edges, horizon);
        if (v > running_max) {
            scaled_sum = scaled_sum * std::exp(running_max - v) + 1.0;
            running_max = v;
        } else {
            scaled_sum += std::exp(v - running_max);
        }
    }
    return running_max + std::log(scaled_sum);
}

}  // namespace

TEST_CASE("ELBO never decreases across iterations") {
    for (const auto kind : testing::kAllKinds) {
        const auto params = reference::default_params(kind, 3, 2, 5.0, 1);
        const auto truth =
            simulate_ground_truth(params, reference::class_proportions(), 30, DegreeScenario::even(6), 20.0, 4);
        BatchOptions options;
        options.model = kind;
        options.basis_count = is_inhomogeneous(kind) ? 2 : 1;
        options.basis_period = 5.0;
        options.horizon = 20.0;
        options.max_iterations = 8;
        options.tolerance = 0.0;
        options.init = InitMode::SoftJitter;
        const auto report = batch_fit(truth.events, truth.edges, options);
        REQUIRE(report.elbo_trace.size() == report.iterations + 1);
        for (std::size_t n = 1; n < report.elbo_trace.size(); ++n) {
            CHECK(report.elbo_trace[n] >= report.elbo_trace[n - 1] - 1e-8);
        }
        const double direct =
            elbo(report.params, report.tau, as_vector(report.pi), truth.events, truth.edges, options.horizon);
        CHECK(direct == doctest::Approx(report.elbo_trace.back()).epsilon(1e-10));
    }
}

TEST_CASE("one class recovers the pooled rate in one iteration") {
    const auto params = ModelParams::hom_poisson(Eigen::MatrixXd::Constant(1, 1, 0.4));
    const auto truth = simulate_ground_truth(params, std::vector<double>{1.0}, 20, DegreeScenario::even(5), 50.0, 9);
    BatchOptions options;
    options.num_classes = 1;
    options.horizon = 50.0;
    options.max_iterations = 1;
    const auto report = batch_fit(truth.events, truth.edges, options);
    const double mle = static_cast<double>(truth.events.size()) / (static_cast<double>(truth.edges.size()) * 50.0);
    CHECK(report.params.baseline[0](0, 0) == doctest::Approx(mle).epsilon(1e-12));
}

TEST_CASE("Poisson M-step zeroes the expected-loglik gradient") {
    const auto params = reference::default_params(ModelKind::InhomPoisson, 3, 2, 4.0, 2);
    const auto truth =
        simulate_ground_truth(params, reference::class_proportions(), 25, DegreeScenario::even(8), 16.0, 6);
    BatchOptions options;
    options.model = ModelKind::InhomPoisson;
    options.basis_count = 2;
    options.basis_period = 4.0;
    options.horizon = 16.0;
    options.max_iterations = 1;
    options.init = InitMode::SoftJitter;
    options.seed = 12;
    options.freeze_pi = true;
    const auto report = batch_fit(truth.events, truth.edges, options);
    // The M-step of the first iteration used the initial tau.
    const auto start = init_state(25, 3, options.seed, options.init);
    const auto pi = as_vector(start.pi);
    const auto objective = [&](const ModelParams& p) {
        return elbo(p, start.tau, pi, truth.events, truth.edges, options.horizon);
    };
    for (std::size_t h = 0; h < 2; ++h) {
        for (Eigen::Index k = 0; k < 3; ++k) {
            for (Eigen::Index l = 0; l < 3; ++l) {
                const double step = 1e-6 * report.params.baseline[h](k, l);
                ModelParams up = report.params;
                ModelParams down = report.params;
                up.baseline[h](k, l) += step;
                down.baseline[h](k, l) -= step;
                const double slope = (objective(up) - objective(down)) / (2.0 * step);
                CHECK(std::abs(slope * report.params.baseline[h](k, l)) <= 1e-6 * std::abs(objective(report.params)));
            }
        }
    }
}

TEST_CASE("Hawkes M-step does not lower the objective it optimizes") {
    const auto params = reference::default_params(ModelKind::HomHawkes, 2, 1, 1.0, 0);
    const auto truth = simulate_ground_truth(params, std::vector<double>{0.5, 0.5}, 20, DegreeScenario::even(6),
                                             20.0, 3);
    BatchOptions options;
    options.model = ModelKind::HomHawkes;
    options.num_classes = 2;
    options.horizon = 20.0;
    options.max_iterations = 1;
    options.freeze_pi = true;
    options.seed = 4;
    const auto report = batch_fit(truth.events, truth.edges, options);
    const auto start = init_state(20, 2, options.seed, options.init);
    const auto initial = init_params(ModelKind::HomHawkes, 2, BasisFamily(1, 1.0), options.ranges, options.seed,
                                     empirical_pair_rate(truth.events.size(), truth.edges.size(), 20.0));
    const auto pi = as_vector(start.pi);
    CHECK(elbo(report.params, start.tau, pi, truth.events, truth.edges, 20.0) >=
          elbo(initial, start.tau, pi, truth.events, truth.edges, 20.0));
}

TEST_CASE("ELBO is a lower bound on the enumerated marginal") {
    std::mt19937_64 rng(17);
    for (const auto kind : testing::kAllKinds) {
        for (int trial = 0; trial < 4; ++trial) {
            const EdgeList edges = testing::complete_edges(4);
            const auto params = testing::random_params(kind, 2, 2, 1.5, rng);
            const auto events = testing::random_stream(edges, 25, 3.0, rng);
            const std::vector<double> pi{0.3, 0.7};
            const double marginal = marginal_loglik_bruteforce(params, pi, events, edges, 3.0);
            CHECK(marginal == doctest::Approx(enumerated_marginal(params, pi, events, edges, 3.0)).epsilon(1e-10));
            for (int draw = 0; draw < 5; ++draw) {
                CHECK(elbo(params, random_tau(4, 2, rng), pi, events, edges, 3.0) <= marginal + 1e-9);
            }
        }
    }
}

TEST_CASE("one-class marginal is the plain log-likelihood") {
    std::mt19937_64 rng(23);
    for (const auto kind : testing::kAllKinds) {
        const EdgeList edges = testing::complete_edges(3);
        const auto params = testing::random_params(kind, 1, 2, 1.0, rng);
        const auto events = testing::random_stream(edges, 20, 2.0, rng);
        const std::vector<int> z(3, 0);
        const double direct = window_loglik(params, z, events, edges, TimeWindow{0.0, 2.0, true});
        CHECK(marginal_loglik_bruteforce(params, std::vector<double>{1.0}, events, edges, 2.0) ==
              doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("one-hot ELBO equals the complete-data log-likelihood") {
    std::mt19937_64 rng(29);
    for (const auto kind : testing::kAllKinds) {
        const EdgeList edges = testing::complete_edges(5);
        const auto params = testing::random_params(kind, 3, 2, 1.0, rng);
        const auto events = testing::random_stream(edges, 40, 4.0, rng);
        const std::vector<int> z{0, 2, 1, 2, 0};
        Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(5, 3);
        for (std::size_t i = 0; i < z.size(); ++i) {
            tau(static_cast<Eigen::Index>(i), z[i]) = 1.0;
        }
        const std::vector<double> pi{0.2, 0.5, 0.3};
        CHECK(elbo(params, tau, pi, events, edges, 4.0) ==
              doctest::Approx(complete_loglik(params, pi, z, events, edges, 4.0)).epsilon(1e-12));
    }
}

TEST_CASE("enumeration refuses oversized instances") {
    const EdgeList edges(21, {{0, 1}});
    const auto params = ModelParams::hom_poisson(Eigen::MatrixXd::Constant(2, 2, 1.0));
    CHECK_THROWS_AS(
        (void)marginal_loglik_bruteforce(params, std::vector<double>{0.5, 0.5}, std::vector<Event>{}, edges, 1.0),
        InputError);
    const EdgeList small(19, {{0, 1}});
    CHECK_NOTHROW((void)marginal_loglik_bruteforce(params, std::vector<double>{0.5, 0.5}, std::vector<Event>{},
                                                   small, 1.0));
}

TEST_CASE("batch rejects events past the horizon") {
    const EdgeList edges(2, {{0, 1}});
    BatchOptions options;
    options.num_classes = 1;
    options.horizon = 1.0;
    CHECK_THROWS_AS((void)batch_fit(std::vector<Event>{{0, 1, 2.0}}, edges, options), InputError);
}

TEST_CASE("closed-form Poisson M-step agrees with a line search on the ELBO") {
    const auto truth = simulate_ground_truth(ModelParams::hom_poisson(reference::poisson_rates()),
                                             reference::class_proportions(), 20, DegreeScenario::even(6), 30.0, 2);
    BatchOptions options;
    options.horizon = 30.0;
    options.max_iterations = 1;
    options.init = InitMode::SoftJitter;
    options.seed = 5;
    options.freeze_pi = true;
    const auto report = batch_fit(truth.events, truth.edges, options);
    const auto start = init_state(20, 3, options.seed, options.init);
    const auto pi = as_vector(start.pi);
    // The ELBO is separable and concave in each rate: golden-section search per entry.
    for (Eigen::Index k = 0; k < 3; ++k) {
        for (Eigen::Index l = 0; l < 3; ++l) {
            const auto objective = [&](double rate) {
                ModelParams p = report.params;
                p.baseline[0](k, l) = rate;
                return elbo(p, start.tau, pi, truth.events, truth.edges, 30.0);
            };
            const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
            double lo = 1e-4;
            double hi = 5.0;
            while (hi - lo > 1e-10) {
                const double a = hi - golden * (hi - lo);
                const double b = lo + golden * (hi - lo);
                if (objective(a) < objective(b)) {
                    lo = a;
                } else {
                    hi = b;
                }
            }
            CHECK(std::abs(report.params.baseline[0](k, l) - 0.5 * (lo + hi)) <= 1e-6);
        }
    }
}

TEST_CASE("no pairs: the marginal reduces to the class prior") {
    const EdgeList edges(1, {});
    const auto params = ModelParams::hom_poisson(Eigen::MatrixXd::Constant(2, 2, 0.3));
    CHECK(std::abs(marginal_loglik_bruteforce(params, std::vector<double>{0.4, 0.6}, std::vector<Event>{}, edges,
                                              5.0)) <= 1e-15);
}

TEST_CASE("batch recovers communities about as well as the online pass") {
    double online = 0.0;
    double batch = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto truth = simulate_ground_truth(ModelParams::hom_poisson(reference::poisson_rates()),
                                                 reference::class_proportions(), 100, DegreeScenario::even(40),
                                                 500.0, seed);
        OnlineOptions online_options;
        online_options.seed = seed + 100;
        online_options.record_params = false;
        const auto fit = run_online(truth.events, truth.edges, WindowConfig(5.0, 500.0), online_options);
        BatchOptions options;
        options.horizon = 500.0;
        options.seed = seed + 100;
        const auto report = batch_fit(truth.events, truth.edges, options);
        LatentState state;
        state.tau = report.tau;
        online += nmi(fit.state.assignments(), truth.classes) / 10.0;
        batch += nmi(state.assignments(), truth.classes) / 10.0;
    }
    CHECK(batch >= online - 0.05);
}
