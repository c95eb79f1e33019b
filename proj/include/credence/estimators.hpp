#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "credence/learners.hpp"
#include "credence/tabular.hpp"

namespace credence::estimators {

enum class BaseLearner { ridge, gbt };
enum class MetaKind { S, T, X };

struct EstimatorConfig {
    BaseLearner base = BaseLearner::ridge;
    double ridge_lambda = 1.0;  // applied on standardized features
    GbtConfig gbt;
    int folds = 2;
    double clip = 0.01;  // propensities are clipped to [clip, 1 - clip]
    double propensity_lambda = 1e-4;
    int bootstrap_se = 0;  // metalearner SE replicates; 0 reports no SE
    std::uint64_t seed = 0;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

struct AteEstimate {
    std::string method;
    double ate = 0.0;
    std::optional<double> se;
    std::map<std::string, double> diagnostics;
    std::vector<std::string> warnings;
};

using Predictor = std::function<Vector(const Matrix&)>;

/// Fits the configured base learner and returns its prediction function.
/// Ridge standardizes features internally.
Predictor fit_regressor(const Matrix& x, const Vector& y, BaseLearner base, const EstimatorConfig& config);

/// In-sample fitted propensities from a penalized logistic model on
/// standardized covariates. Not clipped.
Vector fit_propensity(const Matrix& x, const Vector& z, const EstimatorConfig& config);

struct ClippedPropensity {
    Vector e;
    double clip_fraction = 0.0;
};
ClippedPropensity clip_propensity(const Vector& e, double eta);

AteEstimate diff_means(const ObservationalSample& sample);

/// 1-nearest-neighbour matching on the propensity, with replacement, both
/// directions; imputes the missing potential outcome for every unit.
AteEstimate psm_ate(const ObservationalSample& sample, const EstimatorConfig& config);
AteEstimate psm_with_propensity(const ObservationalSample& sample, const Vector& e);

/// Self-normalized inverse propensity weighting.
AteEstimate ipw_ate(const ObservationalSample& sample, const EstimatorConfig& config);
AteEstimate ipw_with_propensity(const ObservationalSample& sample, const Vector& e, double eta);

AteEstimate aipw_ate(const ObservationalSample& sample, BaseLearner base, const EstimatorConfig& config);
AteEstimate aipw_with_nuisances(const ObservationalSample& sample, const Vector& m1, const Vector& m0,
                                const Vector& e, double eta);

AteEstimate metalearner_ate(const ObservationalSample& sample, MetaKind kind, BaseLearner base,
                            const EstimatorConfig& config);

/// Partialling-out estimator with K-fold cross-fitting. Folds are assigned
/// from a seeded hash of each row's contents, so the estimate does not
/// depend on row order.
AteEstimate dml_ate(const ObservationalSample& sample, BaseLearner base, const EstimatorConfig& config);

/// Targeted MLE on the min-max rescaled outcome with a single logistic
/// fluctuation along H = z/e - (1-z)/(1-e).
AteEstimate tmle_ate(const ObservationalSample& sample, BaseLearner base, const EstimatorConfig& config);
AteEstimate tmle_with_nuisances(const ObservationalSample& sample, const Vector& m1, const Vector& m0,
                                const Vector& e, double eta);

/// Registered method ids: diff_means, ipw, psm, and {s,t,x,dml,aipw,tmle}
/// with an optional _linear or _gbt suffix (no suffix uses config.base).
std::vector<std::string> method_ids();
bool is_known_method(const std::string& id);

/// Candidate set used by benchmarks by default.
std::vector<std::string> default_suite();

/// Dispatches by method id. Throws std::invalid_argument for unknown ids.
AteEstimate estimate(const std::string& method, const ObservationalSample& sample, const EstimatorConfig& config);

} // namespace credence::estimators
