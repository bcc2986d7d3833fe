#include "oracles.hpp"

#include "streamsbm/likelihood.hpp"
#include "streamsbm/online.hpp"
#include "streamsbm/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace streamsbm;

namespace {

/// E_{q(z_-i)}[window log-lik | z_i = k] by enumerating the other nodes' classes.
Eigen::VectorXd enumerated_evidence(const ModelParams& params, const Eigen::MatrixXd& tau, NodeId node,
                                    std::span<const Event> events, const EdgeList& edges, const TimeWindow& window) {
    const auto m = static_cast<std::size_t>(tau.rows());
    const auto kk = static_cast<std::size_t>(tau.cols());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kk));
    std::vector<int> z(m, 0);
    std::size_t configs = 1;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        configs *= kk;
    }
    for (std::size_t k = 0; k < kk; ++k) {
        for (std::size_t c = 0; c < configs; ++c) {
            std::size_t code = c;
            double weight = 1.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (static_cast<NodeId>(i) == node) {
                    z[i] = static_cast<int>(k);
                    continue;
                }
                z[i] = static_cast<int>(code % kk);
                code /= kk;
                weight *= tau(static_cast<Eigen::Index>(i), z[i]);
            }
            out(static_cast<Eigen::Index>(k)) += weight * window_loglik(params, z, events, edges, window);
        }
    }
    return out;
}

/// argmax over a 1e-4 grid of x*a1 + (1-x)*a0 + H(x): the two-class variational objective.
double grid_argmax(double a0, double a1) {
    double best = -1.0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int g = 0; g <= 10000; ++g) {
        const double x = g / 10000.0;
        double value = x * a1 + (1.0 - x) * a0;
        if (x > 0.0) {
            value -= x * std::log(x);
        }
        if (x < 1.0) {
            value -= (1.0 - x) * std::log(1.0 - x);
        }
        if (value > best_value) {
            best_value = value;
            best = x;
        }
    }
    return best;
}

bool on_simplex(const Eigen::MatrixXd& tau) {
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
        if (std::abs(tau.row(i).sum() - 1.0) > 1e-12 || tau.row(i).minCoeff() < 0.0) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("step schedules") {
    CHECK(StepSchedule::algorithm_default().eta(4, 10, 3, 100.0, 50) == doctest::Approx(9.0 / (2.0 * 10.0)));
    CHECK(StepSchedule::algorithm_default().eta(4, 0, 3, 100.0, 50) == doctest::Approx(9.0 / 2.0));
    CHECK(StepSchedule::power_law(0.75, 2.0).eta(16, 5, 3, 100.0, 50) == doctest::Approx(2.0 / 8.0 / 50.0));
    CHECK(StepSchedule::flat_sqrt_t(3.0).eta(7, 5, 3, 100.0, 50) == doctest::Approx(3.0 / 10.0 / 50.0));
    for (std::size_t n = 1; n < 100; ++n) {
        CHECK(std::isfinite(StepSchedule::algorithm_default().eta(n, 0, 3, 1.0, 1)));
    }
}

TEST_CASE("initial state") {
    const auto single = init_state(5, 1, 3, InitMode::OneHot);
    CHECK(single.tau.isApprox(Eigen::MatrixXd::Ones(5, 1)));
    CHECK(single.pi(0) == 1.0);

    const auto soft = init_state(50, 3, 3, InitMode::SoftJitter);
    CHECK(on_simplex(soft.tau));
    CHECK((soft.tau.array() - 1.0 / 3.0).abs().maxCoeff() <= 2.0 * 0.01 / 3.0);
    CHECK(soft.log_evidence.isApproxToConstant(-std::log(3.0)));
    CHECK(soft.pi.isApproxToConstant(1.0 / 3.0));

    const auto a = init_state(50, 3, 4, InitMode::OneHot);
    const auto b = init_state(50, 3, 4, InitMode::OneHot);
    CHECK(a.tau == b.tau);
    for (Eigen::Index i = 0; i < a.tau.rows(); ++i) {
        CHECK(a.tau.row(i).maxCoeff() == 1.0);
        CHECK(a.tau.row(i).sum() == 1.0);
    }
}

TEST_CASE("argmax ties go to the lowest class") {
    LatentState state;
    state.tau = Eigen::MatrixXd::Constant(2, 3, 1.0 / 3.0);
    state.tau(1, 2) = 0.5;
    state.tau(1, 0) = 0.25;
    state.tau(1, 1) = 0.25;
    CHECK(state.assignments() == std::vector<int>{0, 2});
}

TEST_CASE("windows must arrive in order with their own events") {
    const EdgeList edges(3, {{0, 1}, {1, 2}});
    const WindowConfig windows(1.0, 3.0);
    OnlineEstimator estimator(edges, windows, {});
    CHECK_THROWS_AS(estimator.process_window(2, {}), InputError);
    const std::vector<Event> outside{{0, 1, 1.5}};
    CHECK_THROWS_AS(estimator.process_window(1, outside), InputError);
    const std::vector<Event> unknown{{2, 0, 0.5}};
    CHECK_THROWS_AS(estimator.process_window(1, unknown), InputError);
    const std::vector<Event> fine{{0, 1, 0.5}};
    CHECK_NOTHROW(estimator.process_window(1, fine));
    CHECK(estimator.next_window() == 2);
}

TEST_CASE("an empty Poisson window shrinks every rate down to the floor") {
    const EdgeList edges = testing::complete_edges(4);
    const WindowConfig windows(1.0, 5.0);
    OnlineOptions options;
    options.num_classes = 2;
    options.ranges.data_relative = false;
    OnlineEstimator estimator(edges, windows, options);
    Eigen::MatrixXd before = estimator.params().baseline[0];
    for (std::size_t n = 1; n <= 5; ++n) {
        estimator.process_window(n, {});
        const Eigen::MatrixXd after = estimator.params().baseline[0];
        CHECK(((after.array() < before.array()) || (after.array() == options.rate_floor)).all());
        CHECK((after.array() >= options.rate_floor).all());
        before = after;
    }
}

TEST_CASE("single-class Poisson fit approaches the closed-form rate") {
    const auto params = ModelParams::hom_poisson(Eigen::MatrixXd::Constant(1, 1, 0.7));
    const auto truth = simulate_ground_truth(params, std::vector<double>{1.0}, 30, DegreeScenario::even(5), 200.0, 3);
    OnlineOptions options;
    options.num_classes = 1;
    const auto result = run_online(truth.events, truth.edges, WindowConfig(2.0, 200.0), options);
    const double mle = static_cast<double>(truth.events.size()) / (static_cast<double>(truth.edges.size()) * 200.0);
    CHECK(result.params.baseline[0](0, 0) == doctest::Approx(mle).epsilon(0.02));
}

TEST_CASE("state stays feasible after every window") {
    for (const auto kind : testing::kAllKinds) {
        const auto params = reference::default_params(kind, 3, 2, 2.0, 1);
        const auto truth =
            simulate_ground_truth(params, reference::class_proportions(), 40, DegreeScenario::even(6), 30.0, 2);
        OnlineOptions options;
        options.model = kind;
        options.basis_count = is_inhomogeneous(kind) ? 2 : 1;
        options.basis_period = 2.0;
        options.max_backtracks = 0;
        OnlineEstimator estimator(truth.edges, WindowConfig(1.5, 30.0), options);
        for (const auto& slice : partition_windows(truth.events, estimator.windows())) {
            estimator.process_window(slice.index, slice.events);
            const auto& state = estimator.state();
            CHECK(on_simplex(state.tau));
            CHECK(std::abs(state.pi.sum() - 1.0) <= 1e-12);
            CHECK(state.log_evidence.allFinite());
            for (const auto& a : estimator.params().baseline) {
                CHECK(a.minCoeff() >= options.rate_floor);
            }
            if (estimator.params().hawkes()) {
                CHECK(estimator.params().excitation.maxCoeff() <= options.max_excitation);
                CHECK(estimator.params().decay >= options.rate_floor);
            }
        }
    }
}

TEST_CASE("recursive tau maximizes the windowed variational objective") {
    std::mt19937_64 rng(41);
    const EdgeList edges = testing::complete_edges(4);
    for (const auto kind : {ModelKind::HomPoisson, ModelKind::HomHawkes}) {
        for (int trial = 0; trial < 3; ++trial) {
            const auto theta0 = testing::random_params(kind, 2, 1, 1.0, rng);
            const auto events = testing::random_stream(edges, 60, 4.0, rng);
            const WindowConfig windows(2.0, 4.0);
            OnlineOptions options;
            options.model = kind;
            options.num_classes = 2;
            LatentState start = init_state(4, 2, static_cast<std::uint64_t>(trial), InitMode::SoftJitter);
            OnlineEstimator estimator(edges, windows, options, start, theta0);

            Eigen::MatrixXd tau = start.tau;
            Eigen::MatrixXd log_s = start.log_evidence;
            Eigen::VectorXd pi = start.pi;
            ModelParams theta = theta0;
            for (const auto& slice : partition_windows(events, windows)) {
                const TimeWindow window{slice.start, slice.end, slice.index == windows.count()};
                const std::vector<Event> upto(events.begin(), events.begin() + (slice.events.data() - events.data()) +
                                                                   static_cast<std::ptrdiff_t>(slice.events.size()));
                for (NodeId i = 0; i < 4; ++i) {
                    log_s.row(i) += enumerated_evidence(theta, tau, i, upto, edges, window).transpose();
                }
                estimator.process_window(slice.index, slice.events);
                for (NodeId i = 0; i < 4; ++i) {
                    const double x = grid_argmax(std::log(pi(0)) + log_s(i, 0), std::log(pi(1)) + log_s(i, 1));
                    CHECK(std::abs(estimator.state().tau(i, 1) - x) <= 1e-3);
                }
                tau = estimator.state().tau;
                pi = estimator.state().pi;
                theta = estimator.params();
            }
        }
    }
}

TEST_CASE("relabeling the initialization permutes the outputs") {
    const auto params = reference::default_params(ModelKind::HomHawkes, 3, 1, 1.0, 0);
    const auto truth =
        simulate_ground_truth(params, reference::class_proportions(), 30, DegreeScenario::even(8), 20.0, 5);
    OnlineOptions options;
    options.model = ModelKind::HomHawkes;
    const LatentState state = init_state(30, 3, 7, InitMode::SoftJitter);
    const ModelParams theta = init_params(ModelKind::HomHawkes, 3, BasisFamily(1, 1.0), {.data_relative = false}, 7);
    const std::vector<int> map{2, 0, 1};
    LatentState moved = state;
    for (int k = 0; k < 3; ++k) {
        moved.tau.col(map[static_cast<std::size_t>(k)]) = state.tau.col(k);
        moved.log_evidence.col(map[static_cast<std::size_t>(k)]) = state.log_evidence.col(k);
        moved.pi(map[static_cast<std::size_t>(k)]) = state.pi(k);
    }
    OnlineEstimator a(truth.edges, WindowConfig(2.0, 20.0), options, state, theta);
    OnlineEstimator b(truth.edges, WindowConfig(2.0, 20.0), options, moved, theta.relabeled(map));
    for (const auto& slice : partition_windows(truth.events, a.windows())) {
        a.process_window(slice.index, slice.events);
        b.process_window(slice.index, slice.events);
    }
    CHECK(b.params().values().isApprox(a.params().relabeled(map).values(), 1e-9));
    const auto za = a.state().assignments();
    const auto zb = b.state().assignments();
    for (std::size_t i = 0; i < za.size(); ++i) {
        CHECK(zb[i] == map[static_cast<std::size_t>(za[i])]);
        for (int k = 0; k < 3; ++k) {
            CHECK(b.state().tau(static_cast<Eigen::Index>(i), map[static_cast<std::size_t>(k)]) ==
                  doctest::Approx(a.state().tau(static_cast<Eigen::Index>(i), k)).epsilon(1e-9));
        }
    }
}

TEST_CASE("Poisson state size does not depend on the window") {
    const auto truth = simulate_ground_truth(ModelParams::hom_poisson(reference::poisson_rates()),
                                             reference::class_proportions(), 50, DegreeScenario::even(10), 50.0, 1);
    OnlineOptions options;
    options.record_params = false;
    OnlineEstimator estimator(truth.edges, WindowConfig(1.0, 50.0), options);
    std::size_t bytes = estimator.state_bytes();
    for (const auto& slice : partition_windows(truth.events, estimator.windows())) {
        estimator.process_window(slice.index, slice.events);
        CHECK(estimator.state_bytes() == bytes);
    }
}

TEST_CASE("Hawkes history holds only events within reach of the window") {
    const auto params = reference::default_params(ModelKind::HomHawkes, 3, 1, 1.0, 0);
    const auto truth =
        simulate_ground_truth(params, reference::class_proportions(), 30, DegreeScenario::even(5), 60.0, 2);
    OnlineOptions options;
    options.model = ModelKind::HomHawkes;
    options.history_radius = 4.0;
    OnlineEstimator estimator(truth.edges, WindowConfig(2.0, 60.0), options);
    for (const auto& slice : partition_windows(truth.events, estimator.windows())) {
        estimator.process_window(slice.index, slice.events);
        std::size_t within = 0;
        for (const auto& e : truth.events) {
            within += (e.t <= slice.end && slice.end - e.t <= 4.0 + 2.0) ? 1 : 0;
        }
        CHECK(estimator.history().stored_timestamps() == within);
    }
}

TEST_CASE("trace keeps one record per window unless told otherwise") {
    const auto truth = simulate_ground_truth(ModelParams::hom_poisson(reference::poisson_rates()),
                                             reference::class_proportions(), 20, DegreeScenario::even(4), 10.0, 1);
    OnlineOptions options;
    options.tau_every = 5;
    const auto result = run_online(truth.events, truth.edges, WindowConfig(1.0, 10.0), options);
    REQUIRE(result.trace.size() == 10);
    for (std::size_t n = 0; n < 10; ++n) {
        CHECK(result.trace[n].window == n + 1);
        CHECK(result.trace[n].params.has_value());
        CHECK(result.trace[n].tau.has_value() == ((n + 1) % 5 == 0));
    }
    options.keep_trace = false;
    OnlineEstimator estimator(truth.edges, WindowConfig(1.0, 10.0), options);
    for (const auto& slice : partition_windows(truth.events, estimator.windows())) {
        estimator.process_window(slice.index, slice.events);
    }
    CHECK(estimator.trace().size() == 1);
    CHECK(estimator.trace().back().window == 10);
}

TEST_CASE("frozen pi stays at its initial value") {
    const auto truth = simulate_ground_truth(ModelParams::hom_poisson(reference::poisson_rates()),
                                             reference::class_proportions(), 20, DegreeScenario::even(4), 10.0, 1);
    OnlineOptions options;
    options.freeze_pi = true;
    const auto result = run_online(truth.events, truth.edges, WindowConfig(1.0, 10.0), options);
    CHECK(result.state.pi.isApproxToConstant(1.0 / 3.0));
}

TEST_CASE("normalized ELBO settles in the second half of the horizon") {
    const auto truth = simulate_ground_truth(ModelParams::hom_poisson(reference::poisson_rates()),
                                             reference::class_proportions(), 100, DegreeScenario::even(40), 500.0, 3);
    OnlineOptions options;
    options.seed = 103;
    options.record_params = false;
    const auto result = run_online(truth.events, truth.edges, WindowConfig(5.0, 500.0), options);
    const auto spread = [&](std::size_t from, std::size_t to) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t n = from; n < to; ++n) {
            lo = std::min(lo, result.trace[n].elbo_norm);
            hi = std::max(hi, result.trace[n].elbo_norm);
        }
        return hi - lo;
    };
    CHECK(spread(50, 100) < 0.25 * spread(0, 50));
}
