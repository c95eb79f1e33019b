#pragma once

#include <Eigen/Dense>

#include <string>
#include <variant>

namespace credence {

/// Treatment effect presets f(x) = E[Y(1) - Y(0) | X = x].
namespace effect {
struct Zero {};
struct Constant {
    double c = 0.0;
};
struct Linear {
    Eigen::VectorXd w;
    double b = 0.0;
};
/// a * (v'x)^2 + w'x + b. `direction` defaults to the all-ones vector when
/// left empty, giving the (1'x)^2 form; setting it to beta gives (beta'x)^2.
struct Quadratic {
    double a = 1.0;
    Eigen::VectorXd direction;
    Eigen::VectorXd w;
    double b = 0.0;
};
/// x[2] * cos(pi * x[0] * x[1]) (zero-indexed).
struct FriedmanCosine {};
} // namespace effect

/// Confounding bias presets g(x, z).
namespace bias {
struct Zero {};
/// kappa * (2z - 1)
struct TreatmentStep {
    double kappa = 0.0;
};
struct Linear {
    Eigen::VectorXd w;
    double b = 0.0;
};
} // namespace bias

struct EffectSpec {
    std::variant<effect::Zero, effect::Constant, effect::Linear, effect::Quadratic, effect::FriedmanCosine> form;
    Eigen::Index p = 0;

    /// Throws std::invalid_argument when vector lengths disagree with p or a
    /// friedman_cosine spec has p < 3.
    void validate() const;
    std::string name() const;
};

struct BiasSpec {
    std::variant<bias::Zero, bias::TreatmentStep, bias::Linear> form;
    Eigen::Index p = 0;

    void validate() const;
    std::string name() const;
};

double eval_effect(const EffectSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);
double eval_bias(const BiasSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x, double z);

} // namespace credence
