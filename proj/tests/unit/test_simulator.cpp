#include "oracles.hpp"

#include "streamsbm/rng.hpp"
#include "streamsbm/simulator.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace streamsbm;

TEST_CASE("memberships follow pi") {
    const std::vector<double> pi{0.4, 0.3, 0.3};
    const auto z = sample_memberships(100, pi, 3);
    for (int k = 0; k < 3; ++k) {
        const double p = pi[static_cast<std::size_t>(k)];
        const double count = static_cast<double>(std::count(z.begin(), z.end(), k));
        CHECK(std::abs(count - 100.0 * p) <= 3.0 * std::sqrt(100.0 * p * (1.0 - p)));
    }
    const std::vector<double> point{1.0, 0.0, 0.0};
    const auto all = sample_memberships(50, point, 3);
    CHECK(std::all_of(all.begin(), all.end(), [](int k) { return k == 0; }));
    CHECK(sample_memberships(100, pi, 3) == z);
}

TEST_CASE("memberships pass a chi-square goodness-of-fit test") {
    const std::vector<double> pi{0.5, 0.5};
    const auto z = sample_memberships(10000, pi, 17);
    const double ones = static_cast<double>(std::count(z.begin(), z.end(), 1));
    const double chi2 = 2.0 * std::pow(ones - 5000.0, 2) / 5000.0;
    CHECK(chi2 < 10.828);  // p > 0.001 with one degree of freedom
}

TEST_CASE("memberships reject proportions off the simplex") {
    const std::vector<double> bad{0.5, 0.6};
    CHECK_THROWS_AS((void)sample_memberships(10, bad, 0), InputError);
    const std::vector<double> negative{1.5, -0.5};
    CHECK_THROWS_AS((void)sample_memberships(10, negative, 0), InputError);
}

TEST_CASE("even layout gives every node the same out-degree") {
    const auto sampled = sample_edge_list(100, DegreeScenario::even(40), 1);
    CHECK(sampled.edges.size() == 4000);
    for (NodeId i = 0; i < 100; ++i) {
        CHECK(sampled.edges.out_degree(i) == 40);
    }
    const auto forced = sample_edge_list(2, DegreeScenario::even(1), 9);
    REQUIRE(forced.edges.size() == 2);
    CHECK(forced.edges.pair(0) == NodePair{0, 1});
    CHECK(forced.edges.pair(1) == NodePair{1, 0});
    CHECK_THROWS_AS((void)sample_edge_list(10, DegreeScenario::even(10), 1), InputError);
}

TEST_CASE("uneven layout has exactly the requested dense nodes") {
    const auto scenario = DegreeScenario::uneven_default(1000, 100);
    CHECK(scenario.dense_degree == static_cast<NodeId>(std::ceil(std::pow(1000.0, 0.7))));
    CHECK(scenario.sparse_degree == 3);
    const auto sampled = sample_edge_list(1000, scenario, 2);
    REQUIRE(sampled.dense_nodes.size() == 100);
    std::size_t above = 0;
    for (NodeId i = 0; i < 1000; ++i) {
        above += sampled.edges.out_degree(i) > 3 ? 1 : 0;
    }
    CHECK(above == 100);
    for (const NodeId i : sampled.dense_nodes) {
        CHECK(sampled.edges.out_degree(i) == scenario.dense_degree);
    }
}

TEST_CASE("Poisson pair counts stay within four standard deviations") {
    const auto params = ModelParams::hom_poisson(Eigen::MatrixXd::Constant(1, 1, 0.6));
    const EdgeList edges(2, {{0, 1}});
    const std::vector<int> z{0, 0};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto events = simulate(params, edges, z, 500.0, seed);
        CHECK(std::abs(static_cast<double>(events.size()) - 300.0) <= 4.0 * std::sqrt(300.0));
    }
}

TEST_CASE("zero horizon gives an empty stream") {
    for (const auto kind : testing::kAllKinds) {
        const auto params = reference::default_params(kind, 3, 2, 1.0, 0);
        const auto sampled = sample_edge_list(10, DegreeScenario::even(3), 0);
        const std::vector<int> z(10, 1);
        CHECK(simulate(params, sampled.edges, z, 0.0, 4).empty());
    }
}

TEST_CASE("Hawkes long-run rate is mu / (1 - b)") {
    const auto params =
        ModelParams::hom_hawkes(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Constant(1, 1, 0.5), 1.0);
    const EdgeList edges(2, {{0, 1}});
    const std::vector<int> z{0, 0};
    const auto events = simulate(params, edges, z, 1e4, 12);
    CHECK(static_cast<double>(events.size()) / 1e4 == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("inhomogeneous Poisson thinning matches per-bin means") {
    const auto params = ModelParams::inhom_poisson(
        {Eigen::MatrixXd::Constant(1, 1, 0.2), Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 2.5)},
        BasisFamily(3, 1.0));
    const EdgeList edges(2, {{0, 1}});
    const std::vector<int> z{0, 0};
    const auto events = simulate(params, edges, z, 3000.0, 5);
    std::vector<double> bins(3, 0.0);
    for (const auto& e : events) {
        bins[params.basis.active(e.t)] += 1.0;
    }
    for (std::size_t h = 0; h < 3; ++h) {
        const double mean = params.baseline[h](0, 0) * 1000.0;
        CHECK(std::abs(bins[h] - mean) <= 4.0 * std::sqrt(mean));
    }
}

TEST_CASE("simulation is sorted, on A and reproducible") {
    for (const auto kind : testing::kAllKinds) {
        const auto params = reference::default_params(kind, 3, 4, 0.5, 1);
        const auto a = simulate_ground_truth(params, reference::class_proportions(), 30, DegreeScenario::even(5), 20.0, 8);
        const auto b = simulate_ground_truth(params, reference::class_proportions(), 30, DegreeScenario::even(5), 20.0, 8);
        CHECK(a.events == b.events);
        CHECK(a.classes == b.classes);
        CHECK_NOTHROW(require_sorted(a.events));
        for (const auto& e : a.events) {
            CHECK(a.edges.contains(e.src, e.dst));
            CHECK(e.t >= 0.0);
            CHECK(e.t <= 20.0);
        }
        const auto c = simulate_ground_truth(params, reference::class_proportions(), 30, DegreeScenario::even(5), 20.0, 9);
        CHECK_FALSE(a.events == c.events);
    }
}

TEST_CASE("pair streams do not depend on the rest of the edge list") {
    const auto params = reference::default_params(ModelKind::HomHawkes, 3, 1, 1.0, 0);
    const std::vector<int> z{0, 1, 2, 0};
    const EdgeList small(4, {{0, 1}});
    const EdgeList large = testing::complete_edges(4);
    const auto only = simulate(params, small, z, 50.0, 3);
    const auto all = simulate(params, large, z, 50.0, 3);
    std::vector<Event> filtered;
    std::copy_if(all.begin(), all.end(), std::back_inserter(filtered),
                 [](const Event& e) { return e.src == 0 && e.dst == 1; });
    CHECK(only == filtered);
}

TEST_CASE("supercritical Hawkes parameters are rejected") {
    const auto params =
        ModelParams::hom_hawkes(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Constant(1, 1, 1.0), 1.0);
    const EdgeList edges(2, {{0, 1}});
    const std::vector<int> z{0, 0};
    CHECK_THROWS_AS((void)simulate(params, edges, z, 10.0, 0), NumericError);
}

TEST_CASE("rng helpers") {
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(a.below(7) < 7);
        (void)b.below(7);
    }
    CHECK(Rng::substream(1, 2, 3).uniform() != Rng::substream(1, 3, 2).uniform());
}
