#include "credence/nnet.hpp"

#include "credence/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace credence::nnet {

std::size_t Mlp::parameter_count() const {
    std::size_t count = 0;
    for (const auto& l : layers) count += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return count;
}

bool Mlp::all_finite() const {
    for (const auto& l : layers)
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

MlpGradient MlpGradient::zeros_like(const Mlp& net) {
    MlpGradient g;
    g.layers.reserve(net.layers.size());
    for (const auto& l : net.layers)
        g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    return g;
}

MlpGradient& MlpGradient::operator+=(const MlpGradient& other) {
    if (other.layers.size() != layers.size()) throw std::invalid_argument("gradient shape mismatch");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        layers[k].weight += other.layers[k].weight;
        layers[k].bias += other.layers[k].bias;
    }
    return *this;
}

bool MlpGradient::all_finite() const {
    for (const auto& l : layers)
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

Mlp make_mlp(Eigen::Index input_dim, std::span<const int> hidden, Eigen::Index output_dim, Rng& rng) {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("make_mlp: dimensions must be positive");
    Mlp net;
    Eigen::Index fan_in = input_dim;
    auto add_layer = [&](Eigen::Index fan_out, Activation act) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        Layer layer;
        layer.weight.resize(fan_out, fan_in);
        for (Eigen::Index i = 0; i < fan_out; ++i)
            for (Eigen::Index j = 0; j < fan_in; ++j) layer.weight(i, j) = u(rng);
        layer.bias = Vector::Zero(fan_out);
        layer.activation = act;
        net.layers.push_back(std::move(layer));
        fan_in = fan_out;
    };
    for (int width : hidden) {
        if (width < 1) throw std::invalid_argument("make_mlp: hidden width must be positive");
        add_layer(width, Activation::tanh);
    }
    add_layer(output_dim, Activation::identity);
    return net;
}

ForwardTrace mlp_forward_trace(const Mlp& net, const Matrix& input) {
    if (net.layers.empty()) throw std::invalid_argument("mlp_forward: empty network");
    if (input.cols() != net.input_dim()) {
        throw std::invalid_argument("mlp_forward: input width " + std::to_string(input.cols()) + " != " +
                                    std::to_string(net.input_dim()));
    }
    if (!input.allFinite()) throw NumericalError("mlp_forward: non-finite input");
    ForwardTrace trace;
    trace.inputs.reserve(net.layers.size() + 1);
    trace.inputs.push_back(input);
    for (const auto& layer : net.layers) {
        Matrix out = trace.inputs.back() * layer.weight.transpose();
        out.rowwise() += layer.bias.transpose();
        if (layer.activation == Activation::tanh) out = out.array().tanh().matrix();
        trace.inputs.push_back(std::move(out));
    }
    return trace;
}

Matrix mlp_forward(const Mlp& net, const Matrix& input) {
    return std::move(mlp_forward_trace(net, input).inputs.back());
}

BackwardResult mlp_backward(const Mlp& net, const ForwardTrace& trace, const Matrix& output_gradient) {
    if (trace.inputs.size() != net.layers.size() + 1) throw std::invalid_argument("mlp_backward: trace mismatch");
    if (output_gradient.rows() != trace.output().rows() || output_gradient.cols() != trace.output().cols())
        throw std::invalid_argument("mlp_backward: output gradient shape mismatch");
    BackwardResult result;
    result.params.layers.resize(net.layers.size());
    Matrix delta = output_gradient;
    for (std::size_t k = net.layers.size(); k-- > 0;) {
        const auto& layer = net.layers[k];
        if (layer.activation == Activation::tanh) {
            // d tanh(a) / da = 1 - tanh(a)^2, and trace.inputs[k+1] holds tanh(a)
            delta = (delta.array() * (1.0 - trace.inputs[k + 1].array().square())).matrix();
        }
        result.params.layers[k].weight = delta.transpose() * trace.inputs[k];
        result.params.layers[k].bias = delta.colwise().sum().transpose();
        delta = delta * layer.weight;
    }
    result.input = std::move(delta);
    return result;
}

BackwardResult mlp_backward(const Mlp& net, const Matrix& input, const Matrix& output_gradient) {
    return mlp_backward(net, mlp_forward_trace(net, input), output_gradient);
}

GaussianLatent split_latent(const Matrix& encoder_output) {
    if (encoder_output.cols() % 2 != 0) throw std::invalid_argument("split_latent: width must be even");
    const auto k = encoder_output.cols() / 2;
    return {encoder_output.leftCols(k), encoder_output.rightCols(k)};
}

KlResult kl_diag_gaussian(const GaussianLatent& latent) {
    KlResult r;
    const Eigen::ArrayXXd var = latent.log_var.array().exp();
    r.value = 0.5 * (latent.mu.array().square() + var - latent.log_var.array() - 1.0).sum();
    r.grad_mu = latent.mu;
    r.grad_log_var = (0.5 * (var - 1.0)).matrix();
    return r;
}

Matrix reparameterize(const GaussianLatent& latent, const Matrix& noise) {
    if (noise.rows() != latent.mu.rows() || noise.cols() != latent.mu.cols() ||
        latent.log_var.rows() != latent.mu.rows() || latent.log_var.cols() != latent.mu.cols())
        throw std::invalid_argument("reparameterize: shape mismatch");
    return (latent.mu.array() + (0.5 * latent.log_var.array()).exp() * noise.array()).matrix();
}

std::pair<Matrix, Matrix> reparameterize_backward(const GaussianLatent& latent, const Matrix& noise,
                                                  const Matrix& sample_gradient) {
    Matrix d_log_var =
        (sample_gradient.array() * noise.array() * 0.5 * (0.5 * latent.log_var.array()).exp()).matrix();
    return {sample_gradient, std::move(d_log_var)};
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

AdamState AdamState::for_network(const Mlp& net, AdamConfig config) {
    if (!(config.learning_rate > 0.0)) throw std::invalid_argument("Adam learning rate must be positive");
    AdamState s;
    s.config = config;
    s.first_moment = MlpGradient::zeros_like(net);
    s.second_moment = MlpGradient::zeros_like(net);
    return s;
}

void adam_step(AdamState& state, Mlp& net, const MlpGradient& gradient) {
    if (gradient.layers.size() != net.layers.size() || state.first_moment.layers.size() != net.layers.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& g = gradient.layers[k];
        const auto& layer = net.layers[k];
        if (g.weight.rows() != layer.weight.rows() || g.weight.cols() != layer.weight.cols() ||
            g.bias.size() != layer.bias.size())
            throw std::invalid_argument("adam_step: gradient shape mismatch at layer " + std::to_string(k));
    }
    if (!gradient.all_finite())
        throw NumericalError("adam_step: non-finite gradient at step " + std::to_string(state.step + 1));

    const auto& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);

    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = (c.beta2 * v.array() + (1.0 - c.beta2) * g.array().square()).matrix();
        param.array() -= c.learning_rate * (m.array() / correction1) /
                         ((v.array() / correction2).sqrt() + c.epsilon);
    };
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        auto& layer = net.layers[k];
        const auto& g = gradient.layers[k];
        update(layer.weight, state.first_moment.layers[k].weight, state.second_moment.layers[k].weight, g.weight);
        update(layer.bias, state.first_moment.layers[k].bias, state.second_moment.layers[k].bias, g.bias);
    }
}

} // namespace credence::nnet
