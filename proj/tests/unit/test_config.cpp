#include <doctest.h>

#include "credence/config.hpp"
#include "credence/dgp.hpp"
#include "credence/errors.hpp"
#include "credence/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace credence;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

CredenceModel tiny_model() {
    const auto s = observe(dgp::gen_quadratic(dgp::QuadraticParams::defaults(3), 200, 1));
    TrainingConfig c;
    c.hidden = {8};
    c.epochs = 3;
    c.batch_size = 50;
    c.alpha = 2.0;
    c.effect = EffectSpec{effect::Constant{0.5}, 0};
    c.bias = BiasSpec{bias::TreatmentStep{0.15}, 0};
    return train(s, c).model;
}

} // namespace

TEST_CASE("run config parsing") {
    const fs::path data = fs::temp_directory_path() / "credence_config_data.csv";
    std::ofstream(data) << "a,treat,re78\n1,1,2\n2,0,3\n";
    auto text = json::parse(R"({
        "seed": 7, "output_dir": "out",
        "data": {"path": "", "treatment": "treat", "outcome": "re78", "binary": ["black"]},
        "credence": {"alpha": 1000, "beta": 5, "epochs": 20, "hidden": [32, 16]},
        "constraints": {"effect": {"type": "linear", "w": [1, 0], "b": 0.5}, "bias": {"type": "treatment_step", "kappa": 0.15}},
        "dgp": {"name": "quadratic", "p": 4, "gamma": 0.3},
        "estimators": {"methods": ["diff_means", "dml_gbt"], "base": "gbt", "trees": 50, "clip": 0.05},
        "benchmark": {"replicates": 10, "n": 500, "criterion": "abs_bias", "generator": "dgp:friedman"}
    })");
    text["data"]["path"] = data.string();
    const auto c = config::parse_run_config(text);
    CHECK(c.seed == 7);
    CHECK(c.output_dir == "out");
    CHECK(c.data.treatment == "treat");
    CHECK(c.data.binary == std::vector<std::string>{"black"});
    CHECK(c.credence.alpha == 1000.0);
    CHECK(c.credence.hidden == std::vector<int>{32, 16});
    CHECK(c.credence.effect.name() == "linear");
    CHECK(c.credence.effect.p == 2);
    CHECK(eval_bias(c.credence.bias, Eigen::VectorXd::Zero(0), 1.0) == doctest::Approx(0.15));
    CHECK(c.dgp.quadratic.p == 4);
    CHECK(c.dgp.quadratic.gamma == 0.3);
    CHECK(c.estimators.config.base == estimators::BaseLearner::gbt);
    CHECK(c.estimators.config.gbt.trees == 50);
    CHECK(c.benchmark.generator == "dgp:friedman");

    const auto again = config::parse_run_config(config::to_json(c));
    CHECK(config::to_json(again).dump() == config::to_json(c).dump());
}

TEST_CASE("configuration errors name the field") {
    CHECK_THROWS_WITH_AS(config::parse_run_config(json::parse(R"({"credence": {"alpah": 1}})")),
                         doctest::Contains("credence.alpah"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse_run_config(json::parse(R"({"credence": {"alpha": -1}})")),
                         doctest::Contains("alpha"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse_run_config(json::parse(R"({"estimators": {"methods": ["bart"]}})")),
                         doctest::Contains("estimators.methods[0]"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse_run_config(json::parse(R"({"constraints": {"effect": {"type": "cubic"}}})")),
                         doctest::Contains("constraints.effect.type"), ConfigError);
    CHECK_THROWS_AS(config::parse_run_config(json::parse(R"({"seed": "seven"})")), ConfigError);
    CHECK_THROWS_AS(config::parse_run_config(json::parse(R"({"estimators": {"base": "forest"}})")), ConfigError);
    CHECK_THROWS_AS(config::load_run_config("/nonexistent/config.json"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse_run_config(json::parse(R"({"data": {"path": "/nonexistent/data.csv"}})")),
                         doctest::Contains("data.path"), ConfigError);
}

TEST_CASE("constraint specs round-trip through json") {
    const auto e = config::parse_effect(json::parse(R"({"type": "quadratic", "a": 1, "direction": [1, 0, 0], "w": [-1, 0, 0], "b": 1})"));
    CHECK(e.p == 3);
    const Eigen::VectorXd x = (Eigen::VectorXd(3) << 2, 5, 5).finished();
    CHECK(eval_effect(e, x) == doctest::Approx(4.0 - 2.0 + 1.0));
    CHECK(config::to_json(config::parse_effect(config::to_json(e))) == config::to_json(e));
    const auto b = config::parse_bias(json::parse(R"({"type": "linear", "w": [0.5, 0.5], "b": 0})"));
    CHECK(config::to_json(config::parse_bias(config::to_json(b))) == config::to_json(b));
}

TEST_CASE("model file round trip") {
    const auto model = tiny_model();
    const fs::path dir = fs::temp_directory_path() / "credence_model_io";
    fs::create_directories(dir);
    save_model(dir / "a.json", model);
    const auto loaded = load_model(dir / "a.json");
    save_model(dir / "b.json", loaded);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(loaded.p_z == model.p_z);
    CHECK(loaded.stats.x_scale == model.stats.x_scale);
    for (std::size_t k = 0; k < model.y_given_xz.decoder.layers.size(); ++k) {
        CHECK(loaded.y_given_xz.decoder.layers[k].weight == model.y_given_xz.decoder.layers[k].weight);
        CHECK(loaded.y_given_xz.decoder.layers[k].bias == model.y_given_xz.decoder.layers[k].bias);
    }
    CHECK(loaded.config.alpha == 2.0);
    CHECK(loaded.config.effect.name() == "constant");

    const auto a = generate(model, 50, 4);
    const auto b = generate(loaded, 50, 4);
    CHECK(a.y == b.y);

    auto j = model_to_json(model);
    j["format_version"] = 99;
    CHECK_THROWS_WITH_AS(model_from_json(j), doctest::Contains("format_version"), DataError);
    j = model_to_json(model);
    j["y_given_xz"]["decoder"][0]["bias"] = json::array({1.0});
    CHECK_THROWS_AS(model_from_json(j), DataError);
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK_THROWS_AS(load_model(dir / "bad.json"), DataError);
    fs::remove_all(dir);
}
