#include <doctest.h>

#include "credence/constraints.hpp"

#include <cmath>
#include <numbers>

using namespace credence;

TEST_CASE("effect presets") {
    const Eigen::VectorXd x = (Eigen::VectorXd(4) << 2, 3, 1, 7).finished();
    CHECK(eval_effect(EffectSpec{effect::Zero{}, 4}, x) == 0.0);
    CHECK(eval_effect(EffectSpec{effect::Constant{1.5}, 4}, x) == 1.5);
    CHECK(eval_effect(EffectSpec{effect::Linear{Eigen::VectorXd::Unit(4, 0), 0.0}, 4}, x) == 2.0);

    effect::Quadratic q;
    q.a = 2.0;
    q.w = Eigen::VectorXd::Ones(4);
    q.b = 1.0;
    // a (1'x)^2 + w'x + b with 1'x = 13
    CHECK(eval_effect(EffectSpec{q, 4}, x) == doctest::Approx(2.0 * 169.0 + 13.0 + 1.0));
    q.direction = Eigen::VectorXd::Unit(4, 0);
    CHECK(eval_effect(EffectSpec{q, 4}, x) == doctest::Approx(2.0 * 4.0 + 13.0 + 1.0));

    const Eigen::VectorXd f = (Eigen::VectorXd(4) << 0.5, 0.5, 1.0, 0.0).finished();
    CHECK(eval_effect(EffectSpec{effect::FriedmanCosine{}, 4}, f) == doctest::Approx(std::cos(std::numbers::pi / 4.0)));
    CHECK(eval_effect(EffectSpec{effect::FriedmanCosine{}, 4}, f) == doctest::Approx(0.7071).epsilon(1e-4));
}

TEST_CASE("bias presets") {
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
    const BiasSpec step{bias::TreatmentStep{0.15}, 3};
    CHECK(eval_bias(step, x, 1.0) == doctest::Approx(0.15));
    CHECK(eval_bias(step, x, 0.0) == doctest::Approx(-0.15));
    CHECK(eval_bias(step, x, 1.0) == -eval_bias(step, x, 0.0));
    CHECK(eval_bias(BiasSpec{bias::Zero{}, 3}, x, 1.0) == 0.0);
    CHECK(eval_bias(BiasSpec{bias::Zero{}, 3}, x, 0.0) == 0.0);
    CHECK(eval_bias(BiasSpec{bias::Linear{Eigen::VectorXd::Constant(3, 2.0), -1.0}, 3}, x, 0.0) == 5.0);
}

TEST_CASE("dimension and domain errors") {
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(eval_effect(EffectSpec{effect::Zero{}, 4}, x), std::invalid_argument);
    CHECK_THROWS_AS(eval_effect(EffectSpec{effect::Linear{Eigen::VectorXd::Ones(2), 0.0}, 3}, x), std::invalid_argument);
    CHECK_THROWS_AS(eval_bias(BiasSpec{bias::TreatmentStep{1.0}, 3}, x, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(EffectSpec({effect::FriedmanCosine{}, 2}).validate(), std::invalid_argument);
}
