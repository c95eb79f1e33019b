#include "credence/credence.hpp"

#include "credence/errors.hpp"
#include "credence/random.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>
#include <string>

namespace credence {

using nnet::GaussianLatent;
using nnet::Mlp;
using nnet::MlpGradient;

void TrainingConfig::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("alpha and beta must be >= 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (bootstrap_replicates < 1) throw ConfigError("bootstrap_replicates must be >= 1");
    if (latent_dim_x < 0 || latent_dim_y < 1) throw ConfigError("latent dimensions must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    for (int h : hidden)
        if (h < 1) throw ConfigError("hidden widths must be positive");
}

int TrainingConfig::resolved_latent_dim_x(Eigen::Index p) const {
    if (latent_dim_x > 0) return latent_dim_x;
    return std::max(2, static_cast<int>((p + 1) / 2));
}

void CredenceModel::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid model: " + what); };
    if (!(p_z >= 0.0 && p_z <= 1.0)) fail("p_z outside [0,1]");
    if (p < 1) fail("covariate dimension must be positive");
    const auto kx = x_given_z.latent_dim;
    const auto ky = y_given_xz.latent_dim;
    const auto check = [&](const Mlp& net, Eigen::Index in, Eigen::Index out, const char* name) {
        if (net.layers.empty()) fail(std::string(name) + " has no layers");
        for (std::size_t k = 0; k + 1 < net.layers.size(); ++k)
            if (net.layers[k].fan_out() != net.layers[k + 1].fan_in()) fail(std::string(name) + " layer mismatch");
        for (const auto& l : net.layers)
            if (l.bias.size() != l.fan_out()) fail(std::string(name) + " bias mismatch");
        if (net.input_dim() != in || net.output_dim() != out) fail(std::string(name) + " has wrong shape");
        if (!net.all_finite()) fail(std::string(name) + " has non-finite parameters");
    };
    check(x_given_z.encoder, p + 1, 2 * kx, "x encoder");
    check(x_given_z.decoder, kx + 1, p, "x decoder");
    check(y_given_xz.encoder, p + 2, 2 * ky, "y encoder");
    check(y_given_xz.decoder, ky + p + 1, 2, "y decoder");
    if (stats.x_mean.size() != p || stats.x_scale.size() != p) fail("standardization stats dimension");
    if ((stats.x_scale.array() <= 0.0).any() || !(stats.y_scale > 0.0)) fail("non-positive scale");
    if (!column_names.empty() && static_cast<Eigen::Index>(column_names.size()) != p) fail("column names");
    for (auto b : binary_columns)
        if (static_cast<Eigen::Index>(b) >= p) fail("binary column out of range");
}

double estimate_pz(const ObservationalSample& sample) {
    if (sample.z.size() == 0) throw DataError("estimate_pz: empty sample");
    return sample.z.sum() / static_cast<double>(sample.z.size());
}

double true_ate(const GeneratedSample& generated) {
    if (generated.y0.size() == 0) throw std::invalid_argument("true_ate: empty sample");
    return (generated.y1 - generated.y0).mean();
}

ConditionalVae make_x_vae(Eigen::Index p, int latent_dim, std::span<const int> hidden, Rng& rng) {
    ConditionalVae vae;
    vae.latent_dim = latent_dim;
    vae.encoder = nnet::make_mlp(p + 1, hidden, 2 * latent_dim, rng);
    vae.decoder = nnet::make_mlp(latent_dim + 1, hidden, p, rng);
    return vae;
}

ConditionalVae make_y_vae(Eigen::Index p, int latent_dim, std::span<const int> hidden, Rng& rng) {
    ConditionalVae vae;
    vae.latent_dim = latent_dim;
    vae.encoder = nnet::make_mlp(p + 2, hidden, 2 * latent_dim, rng);
    vae.decoder = nnet::make_mlp(latent_dim + p + 1, hidden, 2, rng);
    return vae;
}

namespace {

Matrix hcat(std::initializer_list<const Matrix*> blocks) {
    Eigen::Index cols = 0;
    const Eigen::Index rows = (*blocks.begin())->rows();
    for (const auto* b : blocks) cols += b->cols();
    Matrix out(rows, cols);
    Eigen::Index at = 0;
    for (const auto* b : blocks) {
        out.middleCols(at, b->cols()) = *b;
        at += b->cols();
    }
    return out;
}

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw NumericalError(std::string(what) + ": non-finite loss");
}

} // namespace

XLossResult loss_x_given_z(const ConditionalVae& vae, const Matrix& x, const Vector& z, const Matrix& noise) {
    const auto m = x.rows();
    if (m == 0) throw std::invalid_argument("loss_x_given_z: empty batch");
    if (z.size() != m || noise.rows() != m || noise.cols() != vae.latent_dim)
        throw std::invalid_argument("loss_x_given_z: shape mismatch");
    const double inv_m = 1.0 / static_cast<double>(m);
    const Matrix zc = z;

    const auto enc = nnet::mlp_forward_trace(vae.encoder, hcat({&x, &zc}));
    const GaussianLatent latent = nnet::split_latent(enc.output());
    const Matrix r = nnet::reparameterize(latent, noise);
    const auto dec = nnet::mlp_forward_trace(vae.decoder, hcat({&r, &zc}));

    const Matrix residual = dec.output() - x;
    const auto kl = nnet::kl_diag_gaussian(latent);

    XLossResult out;
    out.reconstruction = residual.squaredNorm() * inv_m;
    out.kl = kl.value * inv_m;
    out.loss = out.reconstruction + out.kl;
    require_finite(out.loss, "loss_x_given_z");

    auto dec_back = nnet::mlp_backward(vae.decoder, dec, (2.0 * inv_m) * residual);
    const Matrix d_r = dec_back.input.leftCols(vae.latent_dim);
    auto [d_mu, d_lv] = nnet::reparameterize_backward(latent, noise, d_r);
    d_mu += inv_m * kl.grad_mu;
    d_lv += inv_m * kl.grad_log_var;
    auto enc_back = nnet::mlp_backward(vae.encoder, enc, hcat({&d_mu, &d_lv}));

    out.encoder_grad = std::move(enc_back.params);
    out.decoder_grad = std::move(dec_back.params);
    return out;
}

YLossResult loss_y_given_xz(const ConditionalVae& vae, const Vector& y, const Matrix& x, const Vector& z,
                            const Vector& f, const Vector& g, const Matrix& noise, double alpha, double beta) {
    const auto m = x.rows();
    if (m == 0) throw std::invalid_argument("loss_y_given_xz: empty batch");
    if (y.size() != m || z.size() != m || f.size() != m || g.size() != m || noise.rows() != m ||
        noise.cols() != vae.latent_dim)
        throw std::invalid_argument("loss_y_given_xz: shape mismatch");
    const double inv_m = 1.0 / static_cast<double>(m);
    const Matrix yc = y;
    const Matrix zc = z;
    const Matrix flipped = (1.0 - z.array()).matrix();

    const auto enc = nnet::mlp_forward_trace(vae.encoder, hcat({&yc, &x, &zc}));
    const GaussianLatent latent = nnet::split_latent(enc.output());
    const Matrix r = nnet::reparameterize(latent, noise);
    // column 0 is the treated outcome, column 1 the control outcome
    const auto factual = nnet::mlp_forward_trace(vae.decoder, hcat({&r, &x, &zc}));
    const auto swapped = nnet::mlp_forward_trace(vae.decoder, hcat({&r, &x, &flipped}));
    const Matrix& o1 = factual.output();
    const Matrix& o2 = swapped.output();

    Matrix g1 = Matrix::Zero(m, 2);
    Matrix g2 = Matrix::Zero(m, 2);
    double recon = 0.0, eff = 0.0, bia = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double zi = z[i];
        const double fitted = zi * o1(i, 0) + (1.0 - zi) * o1(i, 1);
        const double rr = fitted - y[i];
        recon += rr * rr;
        g1(i, 0) += 2.0 * rr * zi;
        g1(i, 1) += 2.0 * rr * (1.0 - zi);

        const double er = o1(i, 0) - o1(i, 1) - f[i];
        eff += er * er;
        g1(i, 0) += 2.0 * alpha * er;
        g1(i, 1) -= 2.0 * alpha * er;

        // counterfactual arm 1-z lives in column z (arm 1 -> col 0, arm 0 -> col 1)
        const Eigen::Index cf = zi > 0.5 ? 1 : 0;
        const double br = o1(i, cf) - o2(i, cf) - g[i];
        bia += br * br;
        g1(i, cf) += 2.0 * beta * br;
        g2(i, cf) -= 2.0 * beta * br;
    }
    const auto kl = nnet::kl_diag_gaussian(latent);

    YLossResult out;
    out.reconstruction = recon * inv_m;
    out.kl = kl.value * inv_m;
    out.effect = eff * inv_m;
    out.bias = bia * inv_m;
    out.loss = out.reconstruction + out.kl + alpha * out.effect + beta * out.bias;
    require_finite(out.loss, "loss_y_given_xz");

    g1 *= inv_m;
    g2 *= inv_m;
    auto back1 = nnet::mlp_backward(vae.decoder, factual, g1);
    auto back2 = nnet::mlp_backward(vae.decoder, swapped, g2);
    back1.params += back2.params;
    const Matrix d_r = back1.input.leftCols(vae.latent_dim) + back2.input.leftCols(vae.latent_dim);
    auto [d_mu, d_lv] = nnet::reparameterize_backward(latent, noise, d_r);
    d_mu += inv_m * kl.grad_mu;
    d_lv += inv_m * kl.grad_log_var;
    auto enc_back = nnet::mlp_backward(vae.encoder, enc, hcat({&d_mu, &d_lv}));

    out.encoder_grad = std::move(enc_back.params);
    out.decoder_grad = std::move(back1.params);
    return out;
}

namespace {

struct PreparedData {
    Matrix x;  // standardized
    Vector z;
    Vector y;  // standardized
    Vector f;  // effect targets in standardized outcome units
    Vector g;  // bias targets in standardized outcome units
};

struct Optimizer {
    nnet::AdamState encoder;
    nnet::AdamState decoder;
};

std::vector<std::size_t> epoch_order(std::size_t n, const TrainingConfig& config, int epoch, std::string_view stream) {
    const auto replicate = static_cast<std::uint64_t>(epoch % config.bootstrap_replicates);
    auto rows = bootstrap_indices(n, derive_seed(config.seed, "universe", replicate));
    Rng shuffle = make_rng(config.seed, stream, static_cast<std::uint64_t>(epoch));
    std::shuffle(rows.begin(), rows.end(), shuffle);
    return rows;
}

template <class Fn>
void for_each_batch(const std::vector<std::size_t>& rows, int batch_size, Fn&& fn) {
    const auto b = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < rows.size(); start += b) {
        const auto end = std::min(rows.size(), start + b);
        fn(std::span<const std::size_t>(rows.data() + start, end - start));
    }
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Vector gather(const Vector& v, std::span<const std::size_t> rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
    return out;
}

void fit_x(ConditionalVae& vae, const PreparedData& data, const TrainingConfig& config, std::vector<EpochLoss>& history) {
    nnet::AdamConfig adam{config.learning_rate};
    Optimizer opt{nnet::AdamState::for_network(vae.encoder, adam), nnet::AdamState::for_network(vae.decoder, adam)};
    const auto n = static_cast<std::size_t>(data.x.rows());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto rows = epoch_order(n, config, epoch, "shuffle_x");
        Rng noise_rng = make_rng(config.seed, "noise_x", static_cast<std::uint64_t>(epoch));
        double total = 0.0;
        for_each_batch(rows, config.batch_size, [&](std::span<const std::size_t> batch) {
            const auto m = static_cast<Eigen::Index>(batch.size());
            const Matrix noise = nnet::standard_normal(m, vae.latent_dim, noise_rng);
            XLossResult res;
            try {
                res = loss_x_given_z(vae, gather_rows(data.x, batch), gather(data.z, batch), noise);
                nnet::adam_step(opt.encoder, vae.encoder, res.encoder_grad);
                nnet::adam_step(opt.decoder, vae.decoder, res.decoder_grad);
            } catch (const NumericalError& e) {
                throw NumericalError("X|Z training diverged at epoch " + std::to_string(epoch + 1) + ": " + e.what());
            }
            total += res.loss * static_cast<double>(m);
        });
        history[static_cast<std::size_t>(epoch)].loss_x = total / static_cast<double>(n);
    }
}

void fit_y(ConditionalVae& vae, const PreparedData& data, const TrainingConfig& config, std::vector<EpochLoss>& history) {
    nnet::AdamConfig adam{config.learning_rate};
    Optimizer opt{nnet::AdamState::for_network(vae.encoder, adam), nnet::AdamState::for_network(vae.decoder, adam)};
    const auto n = static_cast<std::size_t>(data.x.rows());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto rows = epoch_order(n, config, epoch, "shuffle_y");
        Rng noise_rng = make_rng(config.seed, "noise_y", static_cast<std::uint64_t>(epoch));
        EpochLoss sums;
        for_each_batch(rows, config.batch_size, [&](std::span<const std::size_t> batch) {
            const auto m = static_cast<Eigen::Index>(batch.size());
            const Matrix noise = nnet::standard_normal(m, vae.latent_dim, noise_rng);
            YLossResult res;
            try {
                res = loss_y_given_xz(vae, gather(data.y, batch), gather_rows(data.x, batch), gather(data.z, batch),
                                      gather(data.f, batch), gather(data.g, batch), noise, config.alpha, config.beta);
                nnet::adam_step(opt.encoder, vae.encoder, res.encoder_grad);
                nnet::adam_step(opt.decoder, vae.decoder, res.decoder_grad);
            } catch (const NumericalError& e) {
                throw NumericalError("Y|X,Z training diverged at epoch " + std::to_string(epoch + 1) + ": " + e.what());
            }
            const double w = static_cast<double>(m);
            sums.loss_y += res.loss * w;
            sums.y_reconstruction += res.reconstruction * w;
            sums.y_kl += res.kl * w;
            sums.y_effect += res.effect * w;
            sums.y_bias += res.bias * w;
        });
        auto& h = history[static_cast<std::size_t>(epoch)];
        const double dn = static_cast<double>(n);
        h.loss_y = sums.loss_y / dn;
        h.y_reconstruction = sums.y_reconstruction / dn;
        h.y_kl = sums.y_kl / dn;
        h.y_effect = sums.y_effect / dn;
        h.y_bias = sums.y_bias / dn;
    }
}

EffectSpec bind_dimension(EffectSpec spec, Eigen::Index p) {
    if (spec.p == 0) spec.p = p;
    if (spec.p != p) throw ConfigError("effect spec dimension " + std::to_string(spec.p) + " != data p=" + std::to_string(p));
    spec.validate();
    return spec;
}

BiasSpec bind_dimension(BiasSpec spec, Eigen::Index p) {
    if (spec.p == 0) spec.p = p;
    if (spec.p != p) throw ConfigError("bias spec dimension " + std::to_string(spec.p) + " != data p=" + std::to_string(p));
    spec.validate();
    return spec;
}

} // namespace

TrainingRun train(const ObservationalSample& sample, const TrainingConfig& input_config) {
    input_config.validate();
    sample.validate();
    if (sample.treated_count() == 0 || sample.control_count() == 0)
        throw DataError("training requires both treatment arms to be non-empty");

    TrainingConfig config = input_config;
    const auto p = static_cast<Eigen::Index>(sample.cols());
    if (p < 1) throw DataError("training requires at least one covariate");
    try {
        config.effect = bind_dimension(config.effect, p);
        config.bias = bind_dimension(config.bias, p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    config.latent_dim_x = config.resolved_latent_dim_x(p);

    auto [scaled, stats] = standardize(sample);
    PreparedData data;
    data.x = scaled.x;
    data.z = scaled.z;
    data.y = scaled.y;
    const auto n = scaled.x.rows();
    data.f.resize(n);
    data.g.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector xi = sample.x.row(i).transpose();
        data.f[i] = eval_effect(config.effect, xi) / stats.y_scale;
        data.g[i] = eval_bias(config.bias, xi, sample.z[i]) / stats.y_scale;
    }

    TrainingRun run;
    auto& model = run.model;
    model.p = p;
    model.p_z = estimate_pz(sample);
    model.stats = stats;
    model.config = config;
    model.column_names = sample.column_names;
    model.binary_columns = sample.binary_columns;

    Rng init_x = make_rng(config.seed, "init_x");
    Rng init_y = make_rng(config.seed, "init_y");
    model.x_given_z = make_x_vae(p, config.latent_dim_x, config.hidden, init_x);
    model.y_given_xz = make_y_vae(p, config.latent_dim_y, config.hidden, init_y);

    run.history.resize(static_cast<std::size_t>(config.epochs));
    for (int e = 0; e < config.epochs; ++e) run.history[static_cast<std::size_t>(e)].epoch = e + 1;

    // the two networks share nothing mutable; each thread writes disjoint history fields
    auto x_job = std::async(std::launch::async, [&] { fit_x(model.x_given_z, data, config, run.history); });
    fit_y(model.y_given_xz, data, config, run.history);
    x_job.get();
    return run;
}

GeneratedSample generate(const CredenceModel& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("generate: n must be >= 1");
    model.validate();
    const auto rows = static_cast<Eigen::Index>(n);

    Rng z_rng = make_rng(seed, "generate_z");
    Rng rx_rng = make_rng(seed, "generate_rx");
    Rng ry_rng = make_rng(seed, "generate_ry");
    std::bernoulli_distribution treat(model.p_z);
    Matrix z(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) z(i, 0) = treat(z_rng) ? 1.0 : 0.0;
    const Matrix rx = nnet::standard_normal(rows, model.x_given_z.latent_dim, rx_rng);
    const Matrix ry = nnet::standard_normal(rows, model.y_given_xz.latent_dim, ry_rng);

    Matrix x_std = nnet::mlp_forward(model.x_given_z.decoder, hcat({&rx, &z}));

    std::vector<std::size_t> rounded;
    if (model.config.round_binary) rounded = model.binary_columns;
    // round in original units, then feed the rounded covariates to the outcome decoder
    for (auto c : rounded) {
        const auto j = static_cast<Eigen::Index>(c);
        const double mean = model.stats.x_mean[j];
        const double scale = model.stats.x_scale[j];
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double original = x_std(i, j) * scale + mean;
            x_std(i, j) = ((original >= 0.5 ? 1.0 : 0.0) - mean) / scale;
        }
    }
    const Matrix outcomes = nnet::mlp_forward(model.y_given_xz.decoder, hcat({&ry, &x_std, &z}));

    GeneratedSample scaled;
    scaled.x = x_std;
    scaled.z = z.col(0);
    scaled.y1 = outcomes.col(0);
    scaled.y0 = outcomes.col(1);
    scaled.enforce_consistency();
    scaled.column_names = model.column_names;
    return destandardize(scaled, model.stats, rounded);
}

namespace {

GaussianLatent encode(const ConditionalVae& vae, const Matrix& input) {
    return nnet::split_latent(nnet::mlp_forward(vae.encoder, input));
}

} // namespace

nnet::GaussianLatent encode_y(const CredenceModel& model, const ObservationalSample& sample) {
    const auto scaled = apply_standardization(sample, model.stats);
    const Matrix y = scaled.y;
    const Matrix z = scaled.z;
    return encode(model.y_given_xz, hcat({&y, &scaled.x, &z}));
}

nnet::GaussianLatent encode_x(const CredenceModel& model, const ObservationalSample& sample) {
    const auto scaled = apply_standardization(sample, model.stats);
    const Matrix z = scaled.z;
    return encode(model.x_given_z, hcat({&scaled.x, &z}));
}

} // namespace credence
