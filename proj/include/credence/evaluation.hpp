#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/credence.hpp"
#include "credence/dgp.hpp"
#include "credence/estimators.hpp"
#include "credence/tabular.hpp"

namespace credence::evaluation {

/// Draws a sample of n rows with both potential outcomes from a seed.
using Generator = std::function<GeneratedSample(std::size_t n, std::uint64_t seed)>;

Generator dgp_generator(const dgp::DgpSpec& spec);
Generator model_generator(const CredenceModel& model);

struct BenchmarkOptions {
    std::vector<std::string> methods = estimators::default_suite();
    int replicates = 50;
    std::size_t n = 2500;
    std::uint64_t seed = 0;
    // Every replicate reuses the seed of replicate 0 (determinism checks).
    bool fixed_seed = false;
    estimators::EstimatorConfig estimator;
    std::string generator_description;
};

struct ReplicateFailure {
    std::string method;
    int replicate = 0;
    std::string message;
};

/// Errors are est - true ATE of the replicate. `sd` is the sample SD of the
/// errors, so rmse^2 = mean_bias^2 + (R-1)/R * sd^2.
struct MethodScore {
    std::string method;
    double mean_bias = 0.0;
    double sd = 0.0;
    double rmse = 0.0;
    double mean_estimate = 0.0;
    int replicates = 0;  // successful replicates
    int failures = 0;
    std::vector<double> estimates;
};

struct BenchmarkReport {
    std::vector<MethodScore> scores;
    std::vector<std::string> excluded;  // methods that failed on every replicate
    std::vector<ReplicateFailure> failures;
    std::vector<double> true_ates;
    double true_ate = 0.0;  // mean over replicates
    std::vector<std::string> rank_abs_bias;
    std::vector<std::string> rank_rmse;
    std::string generator;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> replicate_seeds;
    int replicates = 0;
    std::size_t n = 0;

    const MethodScore* find(const std::string& method) const;
};

BenchmarkReport run_benchmark(const Generator& generator, const BenchmarkOptions& options);

enum class RankCriterion { abs_bias, rmse };

RankCriterion parse_criterion(const std::string& name);

/// Ascending by criterion, ties broken alphabetically.
std::vector<std::string> rank_methods(const BenchmarkReport& report, RankCriterion criterion);

/// Kendall tau-a between two orderings of the same set.
double rank_agreement(const std::vector<std::string>& r1, const std::vector<std::string>& r2);

/// SD of a statistic over B bootstrap resamples. Throws NumericalError when
/// more than half of the resamples fail.
double bootstrap_se(const ObservationalSample& sample, const std::function<double(const ObservationalSample&)>& statistic,
                    int replicates, std::uint64_t seed);
double bootstrap_se(const ObservationalSample& sample, const std::string& method,
                    const estimators::EstimatorConfig& config, int replicates = 50);

struct CorrelationDiscrepancy {
    Matrix real;
    Matrix synth;
    double frobenius = 0.0;
    std::vector<std::string> flags;
};

/// Pearson correlations over the covariates with the outcome appended as the
/// last row and column. Correlations with a constant column are set to 0.
CorrelationDiscrepancy correlation_discrepancy(const ObservationalSample& real, const ObservationalSample& synth);

/// 2 E|A-B| - E|A-A'| - E|B-B'| over all pairs (diagonals included), with a
/// seeded subsample of `max_rows` per side for larger inputs.
double energy_distance(const Matrix& a, const Matrix& b, std::uint64_t seed = 0, std::size_t max_rows = 2000);

/// Rows [x, z, y] as a matrix.
Matrix joint_rows(const ObservationalSample& sample);

struct OvbEntry {
    std::size_t column = 0;
    std::string name;
    std::optional<double> ate;
    std::optional<double> delta;
    std::string error;
};

struct OvbReport {
    std::string method;
    double full_ate = 0.0;
    std::vector<OvbEntry> entries;
    double max_abs_delta = 0.0;  // suggested scale for the bias constraint
};

/// Re-estimates the ATE with each covariate omitted in turn.
OvbReport ovb_scan(const ObservationalSample& sample, const std::string& method,
                   const estimators::EstimatorConfig& config);

/// One row per method: method, mean_bias, sd, rmse, mean_estimate,
/// replicates, failures.
std::string report_csv(const BenchmarkReport& report);
nlohmann::json report_json(const BenchmarkReport& report);

} // namespace credence::evaluation
