#pragma once

#include <cstdint>
#include <vector>

#include "credence/constraints.hpp"
#include "credence/nnet.hpp"
#include "credence/tabular.hpp"

namespace credence {

/// Hyperparameters for fitting the constrained generator.
///
/// `alpha` and `beta` are the rigidness weights pulling the learned
/// individual effects toward `effect` and the learned confounding toward
/// `bias`. Both specs are evaluated on covariates in original units and their
/// values are read in original outcome units.
struct TrainingConfig {
    double alpha = 0.0;
    double beta = 0.0;
    EffectSpec effect{effect::Zero{}, 0};
    BiasSpec bias{bias::Zero{}, 0};

    int latent_dim_x = 0;  // 0 selects max(2, ceil(p/2))
    int latent_dim_y = 2;
    std::vector<int> hidden = {64, 64};
    int epochs = 500;
    int batch_size = 128;
    double learning_rate = 1e-3;
    int bootstrap_replicates = 100;
    bool round_binary = true;
    std::uint64_t seed = 0;

    void validate() const;
    int resolved_latent_dim_x(Eigen::Index p) const;
};

/// Conditional VAE: encoder(target, condition) -> (mu, log_var),
/// decoder(latent, condition) -> reconstruction.
struct ConditionalVae {
    nnet::Mlp encoder;
    nnet::Mlp decoder;
    int latent_dim = 0;
};

struct CredenceModel {
    double p_z = 0.0;
    ConditionalVae x_given_z;   // target x, condition z
    ConditionalVae y_given_xz;  // target y, condition (x, z); decoder emits (y1, y0)
    StandardizationStats stats;
    TrainingConfig config;
    Eigen::Index p = 0;
    std::vector<std::string> column_names;
    std::vector<std::size_t> binary_columns;
    std::string treatment_name = "z";
    std::string outcome_name = "y";

    /// Throws std::invalid_argument when shapes or values are inconsistent.
    void validate() const;
};

double estimate_pz(const ObservationalSample& sample);
double true_ate(const GeneratedSample& generated);

ConditionalVae make_x_vae(Eigen::Index p, int latent_dim, std::span<const int> hidden, Rng& rng);
ConditionalVae make_y_vae(Eigen::Index p, int latent_dim, std::span<const int> hidden, Rng& rng);

struct XLossResult {
    double loss = 0.0;
    double reconstruction = 0.0;
    double kl = 0.0;
    nnet::MlpGradient encoder_grad;
    nnet::MlpGradient decoder_grad;
};

/// Mean over the batch of ||x - x'||^2 + KL, with x' decoded from a
/// reparameterized latent draw and z. `x` is n x p, `z` length n,
/// `noise` n x latent_dim.
XLossResult loss_x_given_z(const ConditionalVae& vae, const Matrix& x, const Vector& z, const Matrix& noise);

struct YLossResult {
    double loss = 0.0;
    double reconstruction = 0.0;
    double kl = 0.0;
    double effect = 0.0;  // unweighted mean (y1' - y0' - f)^2
    double bias = 0.0;    // unweighted mean (y'(1-z) - y''(1-z) - g)^2
    nnet::MlpGradient encoder_grad;
    nnet::MlpGradient decoder_grad;
};

/// Mean over the batch of
///   (y - y'(z))^2 + KL + alpha (y'(1) - y'(0) - f)^2 + beta (y'(1-z) - y''(1-z) - g)^2
/// where (y'(1), y'(0)) decodes (R, x, z) and (y''(1), y''(0)) decodes
/// (R, x, 1-z) with the same latent draw R. `f` and `g` hold per-row target
/// values already in the units of `y`.
YLossResult loss_y_given_xz(const ConditionalVae& vae, const Vector& y, const Matrix& x, const Vector& z,
                            const Vector& f, const Vector& g, const Matrix& noise, double alpha, double beta);

struct EpochLoss {
    int epoch = 0;
    double loss_x = 0.0;
    double loss_y = 0.0;
    double y_reconstruction = 0.0;
    double y_kl = 0.0;
    double y_effect = 0.0;
    double y_bias = 0.0;
};

struct TrainingRun {
    CredenceModel model;
    std::vector<EpochLoss> history;
};

/// Fits both conditional VAEs on standardized data. Every epoch trains on a
/// bootstrap replicate of the sample (replicate index epoch mod B). The two
/// networks are independent and are fitted on separate threads.
TrainingRun train(const ObservationalSample& sample, const TrainingConfig& config);

/// Draws z ~ Bernoulli(p_z), x from the X|Z decoder, and both potential
/// outcomes from the Y|X,Z decoder, then maps back to original units.
GeneratedSample generate(const CredenceModel& model, std::size_t n, std::uint64_t seed);

/// Encoder means and variances of the outcome VAE on standardized training
/// rows; used for latent sanity checks.
nnet::GaussianLatent encode_y(const CredenceModel& model, const ObservationalSample& sample);
nnet::GaussianLatent encode_x(const CredenceModel& model, const ObservationalSample& sample);

} // namespace credence
