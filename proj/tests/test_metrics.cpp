#include "odt/metrics.hpp"
#include "odt/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace odt;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const double x : values) v[i++] = x;
    return v;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("accuracy_pdt counts inclusive 10 s hits") {
    CHECK(accuracy_pdt(vec({30, 50, 70}), vec({30, 50, 70})) == 1.0);

    // |40 - 30| = 10 exactly is a hit
    CHECK(accuracy_pdt(vec({40}), vec({30})) == 1.0);
    CHECK(accuracy_pdt(vec({40.0001}), vec({30})) == 0.0);

    CHECK(accuracy_pdt(vec({30, 65, 70}), vec({30, 50, 70})) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("accuracy_pdt rejects bad input") {
    CHECK_THROWS_AS(accuracy_pdt(vec({}), vec({})), ValidationError);
    CHECK_THROWS_AS(accuracy_pdt(vec({1, 2}), vec({1})), ValidationError);
    CHECK_THROWS_AS(accuracy_pdt(vec({1}), vec({1}), 0.0), ValidationError);
}

TEST_CASE("accuracy_pdt is permutation-invariant and monotone in tolerance") {
    std::mt19937_64 rng(17);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    const Eigen::Index n = 50;
    Eigen::VectorXd p(n), t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p[i] = 100.0 * unit();
        t[i] = 100.0 * unit();
    }

    const double base = accuracy_pdt(p, t);

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::VectorXd p2(n), t2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p2[i] = p[perm[static_cast<std::size_t>(i)]];
        t2[i] = t[perm[static_cast<std::size_t>(i)]];
    }
    CHECK(accuracy_pdt(p2, t2) == base);

    double previous = 0.0;
    for (double tolerance : {1.0, 5.0, 10.0, 25.0, 60.0, 120.0}) {
        const double acc = accuracy_pdt(p, t, tolerance);
        CHECK(acc >= previous);
        previous = acc;
    }
    CHECK(previous == 1.0);
}

TEST_CASE("accuracy_pdt equals the naive loop on random vectors") {
    std::mt19937_64 rng(23);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 200;
        Eigen::VectorXd p(static_cast<Eigen::Index>(n)), t(static_cast<Eigen::Index>(n));
        std::vector<double> pv(n), tv(n);
        for (std::size_t i = 0; i < n; ++i) {
            pv[i] = p[static_cast<Eigen::Index>(i)] = 100.0 * unit();
            // engineer some exact-boundary pairs
            tv[i] = t[static_cast<Eigen::Index>(i)] = (i % 7 == 0) ? pv[i] - 10.0 : 100.0 * unit();
        }
        CHECK(accuracy_pdt(p, t) == oracle::naive_accuracy(pv, tv, 10.0));
    }
}

TEST_CASE("evaluate_predictions assembles the error table") {
    SUBCASE("perfect single row") {
        const auto r = evaluate_predictions(vec({42}), vec({42}));
        CHECK(r.accuracy_pdt == 1.0);
        CHECK(r.mae == 0.0);
        CHECK(r.rmse == 0.0);
        CHECK(r.n == 1);
        REQUIRE(r.samples.size() == 1);
        CHECK(r.samples[0].hit);
    }

    SUBCASE("errors 0 and 20 seconds") {
        const auto r = evaluate_predictions(vec({30, 70}), vec({30, 50}));
        CHECK(r.accuracy_pdt == 0.5);
        CHECK(r.mae == 10.0);
        CHECK(r.rmse == doctest::Approx(14.142135623730951));
        CHECK(r.samples[0].hit);
        CHECK_FALSE(r.samples[1].hit);
        CHECK(r.samples[1].abs_error_sec == 20.0);
    }

    SUBCASE("rmse dominates mae") {
        std::mt19937_64 rng(3);
        auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        Eigen::VectorXd p(30), t(30);
        for (Eigen::Index i = 0; i < 30; ++i) {
            p[i] = 100.0 * unit();
            t[i] = 100.0 * unit();
        }
        const auto r = evaluate_predictions(p, t);
        CHECK(r.rmse >= r.mae);
        CHECK(r.mae >= 0.0);
    }
}

TEST_CASE("evaluate runs the model per row in seconds") {
    // zero-weight net: every prediction is sigmoid(bias), scaled by 100
    NetworkConfig config;
    config.input_dim = 3;
    config.epochs = 1;
    Network net = init_network(config);
    net.layers[0].weight.setZero();
    net.layers[0].bias[0] = 0.0; // predicts 50 s everywhere

    Normalizer norm;
    norm.feature_min = Eigen::VectorXd::Zero(3);
    norm.feature_max = Eigen::VectorXd::Ones(3);
    norm.impute_value = Eigen::VectorXd::Zero(3);
    norm.feature_names = {"a", "b", "c"};

    Eigen::MatrixXd rows = Eigen::MatrixXd::Constant(4, 3, 0.5);
    const auto r = evaluate(net, norm, rows, vec({50, 45, 55, 80}));
    CHECK(r.n == 4);
    CHECK(r.accuracy_pdt == 0.75); // 80 s misses by 30
    CHECK(r.samples[3].prediction_sec == 50.0);
    CHECK(r.samples[3].abs_error_sec == 30.0);

    Eigen::MatrixXd none(0, 3);
    CHECK_THROWS_AS(evaluate(net, norm, none, vec({})), ValidationError);
}

} // TEST_SUITE
