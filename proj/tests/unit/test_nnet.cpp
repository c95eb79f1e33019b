#include <doctest.h>

#include "credence/errors.hpp"
#include "credence/nnet.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace credence;
using namespace credence::nnet;

namespace {

Layer layer(Matrix w, Vector b, Activation a) {
    Layer l;
    l.weight = std::move(w);
    l.bias = std::move(b);
    l.activation = a;
    return l;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

} // namespace

TEST_CASE("forward pass of hand-set networks") {
    Mlp identity;
    identity.layers.push_back(layer(Matrix::Identity(3, 3), Vector::Zero(3), Activation::identity));
    const Matrix x = (Matrix(1, 3) << 1, -2, 3).finished();
    CHECK(mlp_forward(identity, x) == x);

    Mlp affine;
    affine.layers.push_back(layer(scalar(2), Vector::Constant(1, 1), Activation::identity));
    CHECK(mlp_forward(affine, scalar(3))(0, 0) == 7.0);

    // tanh(1.5 * 0.5 - 0.25) * -2 + 0.3
    Mlp two;
    two.layers.push_back(layer(scalar(1.5), Vector::Constant(1, -0.25), Activation::tanh));
    two.layers.push_back(layer(scalar(-2), Vector::Constant(1, 0.3), Activation::identity));
    CHECK(mlp_forward(two, scalar(0.5))(0, 0) == doctest::Approx(-2.0 * std::tanh(0.5) + 0.3));

    CHECK_THROWS_AS(mlp_forward(identity, Matrix::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("backward pass") {
    Mlp lin;
    lin.layers.push_back(layer(scalar(2), Vector::Constant(1, 1), Activation::identity));
    const auto g = mlp_backward(lin, scalar(3), scalar(1));
    CHECK(g.params.layers[0].weight(0, 0) == 3.0);
    CHECK(g.params.layers[0].bias[0] == 1.0);
    CHECK(g.input(0, 0) == 2.0);

    Rng rng = make_rng(3, "unit_nnet");
    const std::vector<int> hidden = {4, 3};
    auto net = make_mlp(2, hidden, 2, rng);
    const Matrix input = standard_normal(5, 2, rng);
    const auto zero = mlp_backward(net, input, Matrix::Zero(5, 2));
    for (const auto& l : zero.params.layers) {
        CHECK(l.weight.isZero(0));
        CHECK(l.bias.isZero(0));
    }

    const Matrix upstream = standard_normal(5, 2, rng);
    const auto analytic = mlp_backward(net, input, upstream);
    Matrix in = input;
    auto f = [&] { return mlp_forward(net, in).cwiseProduct(upstream).sum(); };
    CHECK(testing::relative_error(testing::flatten(analytic.params), testing::numeric_gradient(f, testing::parameters(net))) <
          1e-5);
    CHECK(testing::relative_error(testing::flatten(analytic.input), testing::numeric_gradient(f, testing::entries(in))) < 1e-5);
}

TEST_CASE("initialization bounds") {
    Rng rng = make_rng(4, "init");
    const std::vector<int> hidden = {8};
    const auto net = make_mlp(4, hidden, 2, rng);
    CHECK(net.layers.size() == 2);
    CHECK(net.layers[0].activation == Activation::tanh);
    CHECK(net.layers[1].activation == Activation::identity);
    CHECK(net.layers[0].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 12.0));
    CHECK(net.layers[0].bias.isZero(0));
}

TEST_CASE("kl divergence closed forms") {
    const auto zero = kl_diag_gaussian({Matrix::Zero(1, 3), Matrix::Zero(1, 3)});
    CHECK(zero.value == 0.0);
    CHECK(kl_diag_gaussian({scalar(1), scalar(0)}).value == doctest::Approx(0.5));
    CHECK(kl_diag_gaussian({scalar(0), scalar(std::log(4.0))}).value == doctest::Approx(0.5 * (4.0 - std::log(4.0) - 1.0)));
    CHECK(kl_diag_gaussian({scalar(0), scalar(std::log(4.0))}).value == doctest::Approx(0.8069).epsilon(1e-4));

    Rng rng = make_rng(5, "kl");
    for (int i = 0; i < 100; ++i) CHECK(kl_diag_gaussian({standard_normal(2, 2, rng), standard_normal(2, 2, rng)}).value >= 0.0);
}

TEST_CASE("reparameterization") {
    const GaussianLatent latent{(Matrix(1, 2) << 1, -2).finished(), (Matrix(1, 2) << 0, 0).finished()};
    CHECK(reparameterize(latent, Matrix::Zero(1, 2)) == latent.mu);
    const Matrix n = (Matrix(1, 2) << 0.3, -0.7).finished();
    CHECK(reparameterize(latent, n).isApprox(latent.mu + n));

    // Monte Carlo moments of mu + exp(lv/2) * noise for mu = 0.7, variance 2.25
    const int draws = 100000;
    Rng rng = make_rng(6, "reparam");
    const Matrix noise = standard_normal(draws, 1, rng);
    const GaussianLatent one{Matrix::Constant(draws, 1, 0.7), Matrix::Constant(draws, 1, std::log(2.25))};
    const Eigen::ArrayXd s = reparameterize(one, noise).col(0).array();
    const double mean = s.mean();
    const double var = (s - mean).square().sum() / (draws - 1);
    CHECK(std::abs(mean - 0.7) < 3.0 * std::sqrt(2.25 / draws));
    CHECK(std::abs(var - 2.25) < 3.0 * 2.25 * std::sqrt(2.0 / (draws - 1)));
}

TEST_CASE("adam") {
    Mlp net;
    net.layers.push_back(layer(scalar(1.0), Vector::Constant(1, 0.5), Activation::identity));
    auto state = AdamState::for_network(net);

    auto zero = MlpGradient::zeros_like(net);
    adam_step(state, net, zero);
    CHECK(state.step == 1);
    CHECK(net.layers[0].weight(0, 0) == 1.0);
    CHECK(net.layers[0].bias[0] == 0.5);

    Mlp fresh;
    fresh.layers.push_back(layer(scalar(1.0), Vector::Constant(1, 0.5), Activation::identity));
    auto s1 = AdamState::for_network(fresh);
    auto g = MlpGradient::zeros_like(fresh);
    g.layers[0].weight(0, 0) = 0.5;
    Mlp copy = fresh;
    auto s2 = s1;
    adam_step(s1, fresh, g);
    adam_step(s2, copy, g);
    // first step: m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps)
    CHECK(fresh.layers[0].weight(0, 0) == doctest::Approx(1.0 - 1e-3 * 0.5 / (0.5 + 1e-8)));
    CHECK(fresh.layers[0].weight(0, 0) == copy.layers[0].weight(0, 0));
    CHECK(s1.first_moment.layers[0].weight == s2.first_moment.layers[0].weight);

    g.layers[0].bias[0] = std::nan("");
    const double before = fresh.layers[0].bias[0];
    CHECK_THROWS_AS(adam_step(s1, fresh, g), NumericalError);
    CHECK(fresh.layers[0].bias[0] == before);
    CHECK(s1.step == 1);
}
