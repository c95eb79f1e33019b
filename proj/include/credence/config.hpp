#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "credence/credence.hpp"
#include "credence/dgp.hpp"
#include "credence/estimators.hpp"

namespace credence::config {

using nlohmann::json;

struct DataSection {
    std::string path;
    std::string treatment = "z";
    std::string outcome = "y";
    std::vector<std::string> binary;
    std::vector<std::string> ignore = {"y0", "y1"};

    CsvOptions csv_options() const;
};

struct DgpSection {
    std::string name;  // empty until set by file or flag
    std::size_t n = 2500;
    dgp::QuadraticParams quadratic = dgp::QuadraticParams::defaults();
    std::size_t oracle_draws = 1000000;

    dgp::DgpSpec spec() const;
};

struct EstimatorSection {
    std::vector<std::string> methods = estimators::default_suite();
    estimators::EstimatorConfig config;
};

struct BenchmarkSection {
    int replicates = 50;
    std::size_t n = 2500;
    std::string criterion = "rmse";
    std::string generator = "dgp:quadratic";
};

struct RunConfig {
    DataSection data;
    TrainingConfig credence;  // includes the effect and bias constraints
    DgpSection dgp;
    EstimatorSection estimators;
    BenchmarkSection benchmark;
    std::string output_dir = ".";
    std::uint64_t seed = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Unknown keys and wrongly typed values raise ConfigError with the field path.
RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::filesystem::path& path);
json to_json(const RunConfig& config);

EffectSpec parse_effect(const json& j, const std::string& path = "constraints.effect");
BiasSpec parse_bias(const json& j, const std::string& path = "constraints.bias");
json to_json(const EffectSpec& spec);
json to_json(const BiasSpec& spec);

TrainingConfig parse_training(const json& j, const std::string& path = "credence");
json to_json(const TrainingConfig& config);

estimators::BaseLearner parse_base(const std::string& name, const std::string& path);
std::string to_string(estimators::BaseLearner base);

json vector_to_json(const Eigen::VectorXd& v);
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const json& j, const std::string& path);
Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path);

} // namespace credence::config
