#include "credence/constraints.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace credence {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_length(const Eigen::VectorXd& v, Eigen::Index p, const char* what) {
    if (v.size() != p) {
        throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(p) + ", got " +
                                    std::to_string(v.size()));
    }
}

void check_input(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index p) {
    if (x.size() != p) {
        throw std::invalid_argument("covariate dimension " + std::to_string(x.size()) + " does not match spec p=" +
                                    std::to_string(p));
    }
}

} // namespace

void EffectSpec::validate() const {
    std::visit(overloaded{
                   [](const effect::Zero&) {},
                   [](const effect::Constant&) {},
                   [&](const effect::Linear& f) { check_length(f.w, p, "linear effect weights"); },
                   [&](const effect::Quadratic& f) {
                       check_length(f.w, p, "quadratic effect weights");
                       if (f.direction.size() != 0) check_length(f.direction, p, "quadratic effect direction");
                   },
                   [&](const effect::FriedmanCosine&) {
                       if (p < 3) throw std::invalid_argument("friedman_cosine effect needs p >= 3");
                   },
               },
               form);
}

std::string EffectSpec::name() const {
    return std::visit(overloaded{
                          [](const effect::Zero&) { return std::string("zero"); },
                          [](const effect::Constant&) { return std::string("constant"); },
                          [](const effect::Linear&) { return std::string("linear"); },
                          [](const effect::Quadratic&) { return std::string("quadratic"); },
                          [](const effect::FriedmanCosine&) { return std::string("friedman_cosine"); },
                      },
                      form);
}

void BiasSpec::validate() const {
    if (const auto* g = std::get_if<bias::Linear>(&form)) check_length(g->w, p, "linear bias weights");
}

std::string BiasSpec::name() const {
    return std::visit(overloaded{
                          [](const bias::Zero&) { return std::string("zero"); },
                          [](const bias::TreatmentStep&) { return std::string("treatment_step"); },
                          [](const bias::Linear&) { return std::string("linear"); },
                      },
                      form);
}

double eval_effect(const EffectSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
    check_input(x, spec.p);
    spec.validate();
    return std::visit(overloaded{
                          [](const effect::Zero&) { return 0.0; },
                          [](const effect::Constant& f) { return f.c; },
                          [&](const effect::Linear& f) { return f.w.dot(x) + f.b; },
                          [&](const effect::Quadratic& f) {
                              const double s = f.direction.size() == 0 ? x.sum() : f.direction.dot(x);
                              return f.a * s * s + f.w.dot(x) + f.b;
                          },
                          [&](const effect::FriedmanCosine&) {
                              return x[2] * std::cos(std::numbers::pi * x[0] * x[1]);
                          },
                      },
                      spec.form);
}

double eval_bias(const BiasSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x, double z) {
    check_input(x, spec.p);
    spec.validate();
    if (z != 0.0 && z != 1.0) throw std::invalid_argument("eval_bias: z must be 0 or 1");
    return std::visit(overloaded{
                          [](const bias::Zero&) { return 0.0; },
                          [&](const bias::TreatmentStep& g) { return g.kappa * (2.0 * z - 1.0); },
                          [&](const bias::Linear& g) { return g.w.dot(x) + g.b; },
                      },
                      spec.form);
}

} // namespace credence
