#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "credence/random.hpp"

namespace credence::nnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { identity, tanh };

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::identity;

    Eigen::Index fan_in() const { return weight.cols(); }
    Eigen::Index fan_out() const { return weight.rows(); }
};

/// Fully connected network. Batches are row-major in the sense that each row
/// of an input matrix is one example.
struct Mlp {
    std::vector<Layer> layers;

    Eigen::Index input_dim() const { return layers.front().fan_in(); }
    Eigen::Index output_dim() const { return layers.back().fan_out(); }
    std::size_t parameter_count() const;
    bool all_finite() const;
};

/// Gradient with the same shapes as an Mlp.
struct LayerGradient {
    Matrix weight;
    Vector bias;
};

struct MlpGradient {
    std::vector<LayerGradient> layers;

    static MlpGradient zeros_like(const Mlp& net);
    MlpGradient& operator+=(const MlpGradient& other);
    bool all_finite() const;
};

/// Builds a network with tanh hidden layers and a linear output layer.
/// Weights are uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
Mlp make_mlp(Eigen::Index input_dim, std::span<const int> hidden, Eigen::Index output_dim, Rng& rng);

/// Activations recorded by a forward pass; `inputs[k]` feeds layer k and
/// `inputs.back()` is the network output.
struct ForwardTrace {
    std::vector<Matrix> inputs;

    const Matrix& output() const { return inputs.back(); }
};

Matrix mlp_forward(const Mlp& net, const Matrix& input);
ForwardTrace mlp_forward_trace(const Mlp& net, const Matrix& input);

struct BackwardResult {
    MlpGradient params;
    Matrix input;
};

/// Reverse-mode gradients of sum(output .* output_gradient).
BackwardResult mlp_backward(const Mlp& net, const ForwardTrace& trace, const Matrix& output_gradient);
BackwardResult mlp_backward(const Mlp& net, const Matrix& input, const Matrix& output_gradient);

/// Diagonal Gaussian in log-variance parameterization, one row per example.
struct GaussianLatent {
    Matrix mu;
    Matrix log_var;
};

/// Splits an encoder output of width 2k into (mu, log_var).
GaussianLatent split_latent(const Matrix& encoder_output);

struct KlResult {
    double value = 0.0;  // summed over rows and latent dims
    Matrix grad_mu;
    Matrix grad_log_var;
};

/// KL(N(mu, diag(exp(log_var))) || N(0, I)) = 0.5 * sum(mu^2 + exp(lv) - lv - 1).
KlResult kl_diag_gaussian(const GaussianLatent& latent);

/// mu + exp(0.5 * log_var) .* noise.
Matrix reparameterize(const GaussianLatent& latent, const Matrix& noise);

/// Chain rule through `reparameterize`: returns (d/dmu, d/dlog_var).
std::pair<Matrix, Matrix> reparameterize_backward(const GaussianLatent& latent, const Matrix& noise,
                                                  const Matrix& sample_gradient);

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    MlpGradient first_moment;
    MlpGradient second_moment;
    std::int64_t step = 0;

    static AdamState for_network(const Mlp& net, AdamConfig config = {});
};

/// One bias-corrected Adam update. Throws NumericalError on non-finite
/// gradients, leaving parameters and state untouched.
void adam_step(AdamState& state, Mlp& net, const MlpGradient& gradient);

} // namespace credence::nnet
