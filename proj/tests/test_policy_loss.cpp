#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "grpo/policy_loss.hpp"
#include "test_util.hpp"

using namespace grpo;
using grpo::test::random_dataset;
using grpo::test::random_vector;
using grpo::test::sample;
using grpo::test::vec;

TEST_CASE("softplus and sigmoid are stable") {
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(softplus(800.0) == doctest::Approx(800.0));
    CHECK(softplus(-800.0) >= 0.0);
    CHECK(softplus(-800.0) < 1e-300);
    CHECK(std::isfinite(softplus(1e6)));
    CHECK(softplus(2.0) == doctest::Approx(std::log1p(std::exp(2.0))).epsilon(1e-15));
    CHECK(softplus(35.0) == doctest::Approx(35.0 + std::exp(-35.0)).epsilon(1e-15));

    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(-3.0) == doctest::Approx(1.0 / (1.0 + std::exp(3.0))).epsilon(1e-15));
}

TEST_CASE("loss values at known points") {
    const auto s = sample(0, vec({1.0, -2.0}), 0.5);
    const Vector theta = vec({2.0, 1.0});
    CHECK(margin(theta, s) == doctest::Approx(0.5));
    CHECK(dpo_loss(Vector::Zero(2), sample(0, vec({1, 1})), 1.0) == doctest::Approx(std::log(2.0)));
    CHECK(dpo_loss(theta, s, 2.0) == doctest::Approx(std::log1p(std::exp(-1.0))));
    // (h - 1/(2 beta))^2 with h = 0.5, beta = 0.1
    CHECK(ipo_loss(theta, s, 0.1) == doctest::Approx(20.25));
    CHECK(ipo_loss(theta, sample(0, vec({1.0, 0.0}), 0.0), 0.5) == doctest::Approx(1.0));
}

TEST_CASE("gradients match central differences") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = sample(0, random_vector(rng, 5, 2.0), 2.0 * rng.uniform() - 1.0);
        const Vector theta = random_vector(rng, 5, 2.0);
        for (const auto kind : {LossKind::dpo(0.7), LossKind::ipo(0.3)}) {
            const Vector g = sample_grad(theta, s, kind);
            for (Eigen::Index i = 0; i < 5; ++i) {
                Vector up = theta;
                Vector down = theta;
                up[i] += 1e-5;
                down[i] -= 1e-5;
                const double fd = (sample_loss(up, s, kind) - sample_loss(down, s, kind)) / 2e-5;
                CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
            }
        }
    }
}

TEST_CASE("losses are convex along random segments") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = sample(0, random_vector(rng, 3, 3.0));
        const Vector a = random_vector(rng, 3, 5.0);
        const Vector b = random_vector(rng, 3, 5.0);
        const double t = rng.uniform();
        for (const auto kind : {LossKind::dpo(1.0), LossKind::ipo(0.1)}) {
            const double mid = sample_loss(t * a + (1 - t) * b, s, kind);
            const double chord = t * sample_loss(a, s, kind) + (1 - t) * sample_loss(b, s, kind);
            CHECK(mid <= chord + 1e-9);
        }
    }
}

TEST_CASE("DPO loss is positive and beta-Lipschitz in the margin") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = sample(0, random_vector(rng, 4, 3.0));
        const Vector theta = random_vector(rng, 4, 20.0);
        const double beta = 0.1 + 2.0 * rng.uniform();
        CHECK(dpo_loss(theta, s, beta) > 0.0);
        CHECK(dpo_grad(theta, s, beta).norm() <= beta * s.delta().norm() + 1e-12);
        CHECK(ipo_loss(theta, s, beta) >= 0.0);
    }
}

TEST_CASE("group losses, extremes and the trade-off objective") {
    std::vector<PreferenceSample> s = {sample(0, vec({1, 0})), sample(1, vec({0, 1})), sample(0, vec({-1, 0})),
                                       sample(1, vec({0, 3}))};
    const auto data = build_dataset(s, 2);
    const Vector theta = vec({0.5, -0.25});
    const auto kind = LossKind::dpo(1.0);
    const auto losses = group_losses(theta, data, kind);
    REQUIRE(losses.size() == 2);
    CHECK(losses[0] == doctest::Approx((softplus(-0.5) + softplus(0.5)) / 2));
    CHECK(losses[1] == doctest::Approx((softplus(0.25) + softplus(0.75)) / 2));

    const auto worst = worst_group_loss(theta, data, kind);
    CHECK(worst.group == 1);
    CHECK(worst.value == losses[1]);

    const auto mu = GroupWeights::from_probabilities(vec({0.25, 0.75}));
    CHECK(tradeoff_loss(theta, data, kind, 1.0, mu) == doctest::Approx(worst.value));
    CHECK(tradeoff_loss(theta, data, kind, 0.0, mu) == doctest::Approx(0.25 * losses[0] + 0.75 * losses[1]));
    CHECK(tradeoff_loss(theta, data, kind, 0.5, mu) ==
          doctest::Approx(0.5 * (0.25 * losses[0] + 0.75 * losses[1]) + 0.5 * worst.value));

    const std::vector<double> tied = {1.0, 3.0, 3.0, -1.0, -1.0};
    CHECK(arg_max(tied).group == 1);
    CHECK(arg_min(tied).group == 3);
}

TEST_CASE("worst-group loss equals the simplex maximum on a grid") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = random_dataset({4, 7, 5}, 3, seed);
        Rng rng(seed + 100);
        const Vector theta = random_vector(rng, 3, 2.0);
        const auto losses = group_losses(theta, data, LossKind::ipo(0.5));
        double grid_max = -std::numeric_limits<double>::infinity();
        const int n = 200;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; i + j <= n; ++j) {
                const double a = double(i) / n, b = double(j) / n, c = 1.0 - a - b;
                grid_max = std::max(grid_max, a * losses[0] + b * losses[1] + c * losses[2]);
            }
        }
        CHECK(grid_max == doctest::Approx(worst_group_loss(theta, data, LossKind::ipo(0.5)).value).epsilon(1e-12));
    }
}

TEST_CASE("LossKind validation") {
    CHECK_NOTHROW(LossKind::dpo(0.1).validate());
    CHECK_THROWS_AS(LossKind::dpo(0.0).validate(), Error);
    CHECK_THROWS_AS(LossKind::ipo(-1.0).validate(), Error);
    CHECK_THROWS_AS(LossKind::ipo(std::numeric_limits<double>::infinity()).validate(), Error);
}
