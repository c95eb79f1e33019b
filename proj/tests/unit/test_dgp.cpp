#include <doctest.h>

#include "credence/dgp.hpp"
#include "credence/estimators.hpp"
#include "credence/random.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace credence;
using namespace credence::dgp;

namespace {

double expit(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Control-outcome mean of the Friedman process, written out independently.
double friedman_mu0(const Eigen::RowVectorXd& x) {
    const double pi = std::numbers::pi;
    return 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * std::pow(x[2] - 0.5, 2) + 10.0 * x[3] + 5.0 * x[4];
}

double mean(const Vector& v) { return v.mean(); }
double sd(const Vector& v) { return std::sqrt((v.array() - v.mean()).square().sum() / (v.size() - 1.0)); }

} // namespace

TEST_CASE("quadratic process: randomized selection") {
    auto params = QuadraticParams::defaults(10);
    params.gamma = 0.0;
    const auto s = gen_quadratic(params, 100000, 1);
    CHECK(std::abs(s.z.mean() - 0.5) < 3.0 * std::sqrt(0.25 / 100000.0));
    CHECK(s.is_consistent());
}

TEST_CASE("quadratic process: default ATE matches the closed form") {
    const auto params = QuadraticParams::defaults(10);
    // (beta'mu)^2 + beta' sigma beta + 1 with mu = 0, beta = e1
    const double closed = std::pow(params.beta.dot(params.mu), 2) + params.beta.dot(params.sigma * params.beta) + 1.0;
    CHECK(closed == 2.0);
    const auto oracle = oracle_ate(DgpSpec{}, 1000000, 2);
    CHECK(std::abs(oracle.ate - closed) < 0.02);
    CHECK(std::abs(oracle.ate - closed) < 3.0 * oracle.standard_error);
}

TEST_CASE("quadratic process: zero coefficients leave the noise effect") {
    auto params = QuadraticParams::defaults(4);
    params.beta.setZero();
    params.alpha.setZero();
    DgpSpec spec;
    spec.quadratic = params;
    // y1 - y0 = e0^2 + e1 - e0 has mean 1 and variance 2 + 1 + 1 = 4
    const auto oracle = oracle_ate(spec, 1000000, 3);
    CHECK(std::abs(oracle.ate - 1.0) < 3.0 * std::sqrt(4.0 / 1e6));

    spec.quadratic.effect_enabled = false;
    CHECK(oracle_ate(spec, 10000, 4).ate == 0.0);
}

TEST_CASE("quadratic process: row formulas") {
    auto params = QuadraticParams::defaults(3);
    params.alpha = (Vector(3) << 0.5, -1.0, 2.0).finished();
    params.mu = (Vector(3) << 1.0, 0.0, -1.0).finished();
    const auto s = gen_quadratic(params, 5000, 5);
    // y1 - y0^2 - alpha'x is pure N(0, 1) noise
    const Vector resid = s.y1 - s.y0.cwiseProduct(s.y0) - s.x * params.alpha;
    CHECK(std::abs(mean(resid)) < 4.0 / std::sqrt(5000.0));
    CHECK(std::abs(sd(resid) - 1.0) < 0.05);
    CHECK(std::abs(s.x.col(0).mean() - 1.0) < 0.06);
}

TEST_CASE("quadratic process: invalid covariance") {
    auto params = QuadraticParams::defaults(2);
    params.sigma << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(gen_quadratic(params, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_quadratic(QuadraticParams::defaults(2), 0, 1), std::invalid_argument);
}

TEST_CASE("friedman process: closed-form points") {
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(10, 0.5);
    CHECK(friedman_mu0(x) == doctest::Approx(14.571).epsilon(1e-4));
    CHECK(expit(0.5) == doctest::Approx(0.6225).epsilon(1e-4));

    const auto s = gen_friedman(20000, 6);
    CHECK(s.is_consistent());
    Vector resid(s.x.rows());
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
        const Eigen::RowVectorXd xi = s.x.row(i);
        resid[i] = s.y0[i] - friedman_mu0(xi);
        const double effect = xi[2] * std::cos(std::numbers::pi * xi[0] * xi[1]);
        REQUIRE(s.y1[i] - s.y0[i] == doctest::Approx(effect));
    }
    CHECK(std::abs(mean(resid)) < 4.0 / std::sqrt(20000.0));
    CHECK(std::abs(sd(resid) - 1.0) < 0.03);

    double expected_treated = 0.0;
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) expected_treated += expit(s.x(i, 0) + s.x(i, 1) - 0.5);
    expected_treated /= static_cast<double>(s.x.rows());
    CHECK(std::abs(s.z.mean() - expected_treated) < 3.0 * std::sqrt(0.25 / 20000.0));
}

TEST_CASE("friedman process: oracle ATE") {
    const double quadrature = testing::friedman_effect_quadrature();
    CHECK(quadrature == doctest::Approx(0.2947).epsilon(2e-4));
    DgpSpec spec;
    spec.name = "friedman";
    const auto oracle = oracle_ate(spec, 1000000, 7);
    CHECK(std::abs(oracle.ate - quadrature) < 0.003);
    CHECK(std::abs(oracle.ate - quadrature) < 3.0 * oracle.standard_error);
}

TEST_CASE("friedman covariates are uniform") {
    const auto s = gen_friedman(10000, 8);
    const double critical = 1.628 / std::sqrt(10000.0);
    for (Eigen::Index j = 0; j < 10; ++j) {
        std::vector<double> v(s.x.col(j).data(), s.x.col(j).data() + s.x.rows());
        std::sort(v.begin(), v.end());
        double d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double n = static_cast<double>(v.size());
            d = std::max({d, (i + 1.0) / n - v[i], v[i] - i / n});
        }
        CHECK(d < critical);
    }
}

TEST_CASE("randomized quadratic trial: difference of means is unbiased") {
    DgpSpec spec;
    spec.quadratic.gamma = 0.0;
    std::vector<double> errors;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto g = generate(spec, 2500, derive_seed(9, "trial", r));
        errors.push_back(estimators::diff_means(observe(g)).ate - (g.y1 - g.y0).mean());
    }
    const Eigen::Map<const Vector> e(errors.data(), 100);
    CHECK(std::abs(e.mean()) < 3.0 * sd(e) / 10.0);
}

TEST_CASE("determinism and identifiers") {
    const auto a = gen_friedman(50, 10);
    const auto b = gen_friedman(50, 10);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    DgpSpec bad;
    bad.name = "ihdp";
    CHECK_THROWS_AS(generate(bad, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(oracle_ate(bad, 10000, 1), std::invalid_argument);
    CHECK_THROWS_AS(oracle_ate(DgpSpec{}, 100, 1), std::invalid_argument);
}
