#include "oracles.hpp"

#include "streamsbm/model.hpp"
#include "streamsbm/types.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace streamsbm;

TEST_CASE("model kinds round-trip through their names") {
    for (const auto kind : testing::kAllKinds) {
        CHECK(parse_model_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS((void)parse_model_kind("poisson"), InputError);
}

TEST_CASE("step basis has exactly one active function") {
    const BasisFamily basis(7, 1.0);
    for (double t = 0.0; t < 30.0; t += 0.37) {
        double sum = 0.0;
        for (std::size_t h = 0; h < 7; ++h) {
            sum += basis.value(h, t);
        }
        CHECK(sum == 1.0);
        CHECK(basis.active(t) == static_cast<std::size_t>(std::floor(t)) % 7);
    }
}

TEST_CASE("basis masses partition an interval") {
    const BasisFamily basis(3, 2.0);
    double total = 0.0;
    for (std::size_t h = 0; h < 3; ++h) {
        total += basis.mass(h, 0.5, 13.25);
    }
    CHECK(total == doctest::Approx(12.75).epsilon(1e-12));
    CHECK(basis.mass(0, 0.0, 2.0) == doctest::Approx(2.0));
    CHECK(basis.mass(1, 0.0, 2.0) == doctest::Approx(0.0));
    CHECK(basis.mass(1, 1.0, 7.0) == doctest::Approx(2.0));
}

TEST_CASE("Poisson intensity is the rate entry") {
    Eigen::MatrixXd b(3, 3);
    b << 0.6, 0.2, 0.3, 0.1, 1.0, 0.4, 0.5, 0.2, 0.75;
    const auto params = ModelParams::hom_poisson(b);
    CHECK(intensity(params, 0, 0, 3.7, {}) == 0.6);
    CHECK(intensity(params, 0, 0, 123.0, {}) == 0.6);
}

TEST_CASE("Hawkes intensity adds the exponential kernel") {
    const auto params =
        ModelParams::hom_hawkes(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Constant(1, 1, 0.5), 1.0);
    CHECK(intensity(params, 0, 0, 2.0, {}) == 0.5);
    const double t = 3.0;
    const std::vector<double> history{t - std::log(2.0)};
    CHECK(intensity(params, 0, 0, t, history) == doctest::Approx(0.75).epsilon(1e-14));
    const std::vector<double> same{t};
    CHECK(intensity(params, 0, 0, t, same) == 0.5);
    const std::vector<double> late{t + 0.1};
    CHECK_THROWS_AS((void)intensity(params, 0, 0, t, late), NumericError);
}

TEST_CASE("Hawkes intensity decays between events and never drops when history grows") {
    std::mt19937_64 rng(5);
    const auto params = testing::random_params(ModelKind::HomHawkes, 2, 1, 1.0, rng);
    const std::vector<double> history{0.3, 1.1, 1.7};
    double previous = intensity(params, 0, 1, 1.7 + 1e-9, history);
    for (double t = 1.8; t < 6.0; t += 0.1) {
        const double now = intensity(params, 0, 1, t, history);
        CHECK(now < previous);
        CHECK(now > params.baseline[0](0, 1));
        previous = now;
    }
    const std::vector<double> more{0.3, 1.1, 1.5, 1.7};
    CHECK(intensity(params, 0, 1, 2.5, more) >= intensity(params, 0, 1, 2.5, history));
}

TEST_CASE("intensity matches the direct definition for every family") {
    std::mt19937_64 rng(8);
    for (const auto kind : testing::kAllKinds) {
        const auto params = testing::random_params(kind, 3, is_inhomogeneous(kind) ? 4 : 1, 0.7, rng);
        const std::vector<double> history{0.1, 0.5, 2.2};
        for (double t = 2.3; t < 5.0; t += 0.31) {
            CHECK(intensity(params, 2, 1, t, history) ==
                  doctest::Approx(testing::direct_intensity(params, 2, 1, t, history)).epsilon(1e-12));
        }
    }
}

TEST_CASE("parameter vector layout round-trips") {
    std::mt19937_64 rng(9);
    for (const auto kind : testing::kAllKinds) {
        auto params = testing::random_params(kind, 3, is_inhomogeneous(kind) ? 2 : 1, 1.0, rng);
        const Eigen::VectorXd v = params.values();
        CHECK(static_cast<std::size_t>(v.size()) == params.num_values());
        CHECK(v(static_cast<Eigen::Index>(params.baseline_index(params.num_basis() - 1, 2, 1))) ==
              params.baseline.back()(2, 1));
        if (params.hawkes()) {
            CHECK(v(static_cast<Eigen::Index>(params.excitation_index(1, 2))) == params.excitation(1, 2));
            CHECK(v(static_cast<Eigen::Index>(params.decay_index())) == params.decay);
        }
        auto copy = params;
        copy.set_values(v * 2.0);
        CHECK(copy.values().isApprox(v * 2.0));
    }
}

TEST_CASE("validation and projection") {
    CHECK_THROWS_AS((void)ModelParams::hom_poisson(Eigen::MatrixXd::Constant(2, 2, -1.0)), InputError);
    CHECK_THROWS_AS((void)ModelParams::hom_hawkes(Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2), 0.0),
                    InputError);
    auto params = ModelParams::hom_hawkes(Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Constant(2, 2, 1.2), 1.0);
    CHECK_THROWS_AS(params.require_stationary(), NumericError);
    params.baseline[0](0, 0) = 0.0;
    params.project(1e-6, 0.999);
    CHECK(params.baseline[0](0, 0) == 1e-6);
    CHECK(params.excitation.maxCoeff() == 0.999);
    CHECK_NOTHROW(params.require_stationary());
}

TEST_CASE("relabeling permutes rows and columns together") {
    std::mt19937_64 rng(10);
    const auto params = testing::random_params(ModelKind::InhomHawkes, 3, 2, 1.0, rng);
    const std::vector<int> map{2, 0, 1};
    const auto moved = params.relabeled(map);
    for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
            CHECK(moved.baseline[1](map[k], map[l]) == params.baseline[1](k, l));
            CHECK(moved.excitation(map[k], map[l]) == params.excitation(k, l));
        }
    }
    const std::vector<int> inverse{1, 2, 0};
    CHECK(moved.relabeled(inverse).values().isApprox(params.values()));
    const std::vector<int> bad{0, 0, 1};
    CHECK_THROWS_AS((void)params.relabeled(bad), InputError);
}

TEST_CASE("kernel mass is the integral of the unit kernel") {
    for (const double s : {0.0, 1.0, 2.5}) {
        const double closed = kernel_mass(s, 1.5, 4.0, 1.3);
        const double quad = testing::integrate_pieces(
            [&](double t) { return t > s ? 1.3 * std::exp(-1.3 * (t - s)) : 0.0; }, 1.5, 4.0, {s});
        CHECK(closed == doctest::Approx(quad).epsilon(1e-9));
    }
}
