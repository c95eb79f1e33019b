#pragma once

#include <cstdint>
#include <string>

#include "credence/tabular.hpp"

namespace credence::dgp {

/// Normal covariates with a quadratic treated outcome:
///   X ~ N(mu, sigma), Y(0) = beta'X + e0, Y(1) = Y(0)^2 + alpha'X + e1,
///   Z ~ Bernoulli(expit(gamma * 1'X)), e0, e1 ~ N(0, 1).
/// With `effect_enabled == false` the treated outcome equals Y(0).
struct QuadraticParams {
    Eigen::Index p = 10;
    Vector mu;
    Matrix sigma;
    Vector beta;
    Vector alpha;
    double gamma = 0.1;
    bool effect_enabled = true;

    /// mu = 0, sigma = I, beta = e1, alpha = 0, gamma = 0.1.
    static QuadraticParams defaults(Eigen::Index p = 10);
    void validate() const;
    /// E[Y(1) - Y(0)] = (beta'mu)^2 + beta'sigma beta + 1 + (alpha - beta)'mu.
    double closed_form_ate() const;
};

GeneratedSample gen_quadratic(const QuadraticParams& params, std::size_t n, std::uint64_t seed);

/// Friedman's regression function as the control outcome over ten U(0,1)
/// covariates, with effect x2 * cos(pi x0 x1) and selection
/// expit(x0 + x1 - 0.5). Columns 0..4 play the roles of the formula's
/// X1..X5, so selection and outcome share covariates 0 and 1.
GeneratedSample gen_friedman(std::size_t n, std::uint64_t seed);

struct DgpSpec {
    std::string name = "quadratic";  // "quadratic" or "friedman"
    QuadraticParams quadratic = QuadraticParams::defaults();
};

GeneratedSample generate(const DgpSpec& spec, std::size_t n, std::uint64_t seed);

struct OracleAte {
    double ate = 0.0;
    double standard_error = 0.0;
    std::size_t n_mc = 0;
};

/// Monte Carlo mean of y1 - y0 over n_mc draws (n_mc >= 10^4), generated in
/// chunks so memory stays bounded.
OracleAte oracle_ate(const DgpSpec& spec, std::size_t n_mc, std::uint64_t seed);

} // namespace credence::dgp
