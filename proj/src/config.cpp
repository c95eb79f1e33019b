#include "credence/config.hpp"

#include "credence/errors.hpp"

#include <fstream>
#include <set>

namespace credence::config {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    require_object(j, path);
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) fail(join(path, it.key()), "unknown key");
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long long get_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long long>();
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
        fail(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<std::string> get_strings(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <class F>
void with(const json& j, const char* key, const std::string& path, F&& f) {
    if (j.contains(key)) f(j.at(key), join(path, key));
}

} // namespace

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = get_number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    const auto first = vector_from_json(j[0], path + "[0]");
    Eigen::MatrixXd m(rows, first.size());
    for (Eigen::Index i = 0; i < rows; ++i) {
        const std::string row_path = path + "[" + std::to_string(i) + "]";
        const auto row = vector_from_json(j[static_cast<std::size_t>(i)], row_path);
        if (row.size() != first.size()) fail(row_path, "ragged matrix row");
        m.row(i) = row.transpose();
    }
    return m;
}

EffectSpec parse_effect(const json& j, const std::string& path) {
    require_object(j, path);
    if (!j.contains("type")) fail(join(path, "type"), "missing");
    const std::string type = get_string(j.at("type"), join(path, "type"));
    EffectSpec spec;
    with(j, "p", path, [&](const json& v, const std::string& p) { spec.p = get_integer(v, p); });
    if (type == "zero") {
        check_keys(j, path, {"type", "p"});
        spec.form = effect::Zero{};
    } else if (type == "constant") {
        check_keys(j, path, {"type", "p", "c"});
        effect::Constant f;
        with(j, "c", path, [&](const json& v, const std::string& p) { f.c = get_number(v, p); });
        spec.form = f;
    } else if (type == "linear") {
        check_keys(j, path, {"type", "p", "w", "b"});
        effect::Linear f;
        if (!j.contains("w")) fail(join(path, "w"), "missing");
        f.w = vector_from_json(j.at("w"), join(path, "w"));
        with(j, "b", path, [&](const json& v, const std::string& p) { f.b = get_number(v, p); });
        if (spec.p == 0) spec.p = f.w.size();
        spec.form = f;
    } else if (type == "quadratic") {
        check_keys(j, path, {"type", "p", "a", "direction", "w", "b"});
        effect::Quadratic f;
        with(j, "a", path, [&](const json& v, const std::string& p) { f.a = get_number(v, p); });
        with(j, "direction", path, [&](const json& v, const std::string& p) { f.direction = vector_from_json(v, p); });
        with(j, "w", path, [&](const json& v, const std::string& p) { f.w = vector_from_json(v, p); });
        with(j, "b", path, [&](const json& v, const std::string& p) { f.b = get_number(v, p); });
        if (spec.p == 0) spec.p = std::max(f.w.size(), f.direction.size());
        if (spec.p == 0) fail(path, "quadratic effect needs p, w or direction");
        if (f.w.size() == 0) f.w = Eigen::VectorXd::Zero(spec.p);
        spec.form = f;
    } else if (type == "friedman_cosine") {
        check_keys(j, path, {"type", "p"});
        spec.form = effect::FriedmanCosine{};
    } else {
        fail(join(path, "type"), "unknown effect type '" + type + "' (zero, constant, linear, quadratic, friedman_cosine)");
    }
    if (spec.p < 0) fail(join(path, "p"), "must be >= 0");
    if (spec.p > 0) {
        try {
            spec.validate();
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
    }
    return spec;
}

BiasSpec parse_bias(const json& j, const std::string& path) {
    require_object(j, path);
    if (!j.contains("type")) fail(join(path, "type"), "missing");
    const std::string type = get_string(j.at("type"), join(path, "type"));
    BiasSpec spec;
    with(j, "p", path, [&](const json& v, const std::string& p) { spec.p = get_integer(v, p); });
    if (type == "zero") {
        check_keys(j, path, {"type", "p"});
        spec.form = bias::Zero{};
    } else if (type == "treatment_step") {
        check_keys(j, path, {"type", "p", "kappa"});
        bias::TreatmentStep f;
        with(j, "kappa", path, [&](const json& v, const std::string& p) { f.kappa = get_number(v, p); });
        spec.form = f;
    } else if (type == "linear") {
        check_keys(j, path, {"type", "p", "w", "b"});
        bias::Linear f;
        if (!j.contains("w")) fail(join(path, "w"), "missing");
        f.w = vector_from_json(j.at("w"), join(path, "w"));
        with(j, "b", path, [&](const json& v, const std::string& p) { f.b = get_number(v, p); });
        if (spec.p == 0) spec.p = f.w.size();
        spec.form = f;
    } else {
        fail(join(path, "type"), "unknown bias type '" + type + "' (zero, treatment_step, linear)");
    }
    if (spec.p < 0) fail(join(path, "p"), "must be >= 0");
    if (spec.p > 0) {
        try {
            spec.validate();
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
    }
    return spec;
}

json to_json(const EffectSpec& spec) {
    json j;
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, effect::Zero>) {
                j["type"] = "zero";
            } else if constexpr (std::is_same_v<T, effect::Constant>) {
                j["type"] = "constant";
                j["c"] = f.c;
            } else if constexpr (std::is_same_v<T, effect::Linear>) {
                j["type"] = "linear";
                j["w"] = vector_to_json(f.w);
                j["b"] = f.b;
            } else if constexpr (std::is_same_v<T, effect::Quadratic>) {
                j["type"] = "quadratic";
                j["a"] = f.a;
                j["direction"] = vector_to_json(f.direction);
                j["w"] = vector_to_json(f.w);
                j["b"] = f.b;
            } else {
                j["type"] = "friedman_cosine";
            }
        },
        spec.form);
    j["p"] = spec.p;
    return j;
}

json to_json(const BiasSpec& spec) {
    json j;
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, bias::Zero>) {
                j["type"] = "zero";
            } else if constexpr (std::is_same_v<T, bias::TreatmentStep>) {
                j["type"] = "treatment_step";
                j["kappa"] = f.kappa;
            } else {
                j["type"] = "linear";
                j["w"] = vector_to_json(f.w);
                j["b"] = f.b;
            }
        },
        spec.form);
    j["p"] = spec.p;
    return j;
}

TrainingConfig parse_training(const json& j, const std::string& path) {
    check_keys(j, path,
               {"alpha", "beta", "effect", "bias", "latent_dim_x", "latent_dim_y", "hidden", "epochs", "batch_size",
                "learning_rate", "bootstrap_replicates", "round_binary", "seed"});
    TrainingConfig c;
    with(j, "alpha", path, [&](const json& v, const std::string& p) { c.alpha = get_number(v, p); });
    with(j, "beta", path, [&](const json& v, const std::string& p) { c.beta = get_number(v, p); });
    with(j, "effect", path, [&](const json& v, const std::string& p) { c.effect = parse_effect(v, p); });
    with(j, "bias", path, [&](const json& v, const std::string& p) { c.bias = parse_bias(v, p); });
    with(j, "latent_dim_x", path, [&](const json& v, const std::string& p) { c.latent_dim_x = static_cast<int>(get_integer(v, p)); });
    with(j, "latent_dim_y", path, [&](const json& v, const std::string& p) { c.latent_dim_y = static_cast<int>(get_integer(v, p)); });
    with(j, "hidden", path, [&](const json& v, const std::string& p) {
        if (!v.is_array()) fail(p, "expected an array of integers");
        c.hidden.clear();
        for (std::size_t i = 0; i < v.size(); ++i)
            c.hidden.push_back(static_cast<int>(get_integer(v[i], p + "[" + std::to_string(i) + "]")));
    });
    with(j, "epochs", path, [&](const json& v, const std::string& p) { c.epochs = static_cast<int>(get_integer(v, p)); });
    with(j, "batch_size", path, [&](const json& v, const std::string& p) { c.batch_size = static_cast<int>(get_integer(v, p)); });
    with(j, "learning_rate", path, [&](const json& v, const std::string& p) { c.learning_rate = get_number(v, p); });
    with(j, "bootstrap_replicates", path,
         [&](const json& v, const std::string& p) { c.bootstrap_replicates = static_cast<int>(get_integer(v, p)); });
    with(j, "round_binary", path, [&](const json& v, const std::string& p) { c.round_binary = get_bool(v, p); });
    with(j, "seed", path, [&](const json& v, const std::string& p) { c.seed = get_unsigned(v, p); });
    try {
        c.validate();
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
    return c;
}

json to_json(const TrainingConfig& c) {
    return json{{"alpha", c.alpha},
                {"beta", c.beta},
                {"effect", to_json(c.effect)},
                {"bias", to_json(c.bias)},
                {"latent_dim_x", c.latent_dim_x},
                {"latent_dim_y", c.latent_dim_y},
                {"hidden", c.hidden},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"bootstrap_replicates", c.bootstrap_replicates},
                {"round_binary", c.round_binary},
                {"seed", c.seed}};
}

estimators::BaseLearner parse_base(const std::string& name, const std::string& path) {
    if (name == "ridge" || name == "linear") return estimators::BaseLearner::ridge;
    if (name == "gbt") return estimators::BaseLearner::gbt;
    fail(path, "unknown base learner '" + name + "' (ridge or gbt)");
}

std::string to_string(estimators::BaseLearner base) { return base == estimators::BaseLearner::ridge ? "ridge" : "gbt"; }

CsvOptions DataSection::csv_options() const {
    CsvOptions o;
    o.treatment_col = treatment;
    o.outcome_col = outcome;
    o.binary_cols = binary;
    o.ignore_cols = ignore;
    return o;
}

dgp::DgpSpec DgpSection::spec() const {
    dgp::DgpSpec s;
    s.name = name.empty() ? "quadratic" : name;
    s.quadratic = quadratic;
    return s;
}

namespace {

DataSection parse_data(const json& j, const std::string& path) {
    check_keys(j, path, {"path", "treatment", "outcome", "binary", "ignore"});
    DataSection d;
    with(j, "path", path, [&](const json& v, const std::string& p) { d.path = get_string(v, p); });
    with(j, "treatment", path, [&](const json& v, const std::string& p) { d.treatment = get_string(v, p); });
    with(j, "outcome", path, [&](const json& v, const std::string& p) { d.outcome = get_string(v, p); });
    with(j, "binary", path, [&](const json& v, const std::string& p) { d.binary = get_strings(v, p); });
    with(j, "ignore", path, [&](const json& v, const std::string& p) { d.ignore = get_strings(v, p); });
    return d;
}

DgpSection parse_dgp(const json& j, const std::string& path) {
    check_keys(j, path, {"name", "n", "p", "mu", "sigma", "beta", "alpha", "gamma", "effect_enabled", "oracle_draws"});
    DgpSection d;
    with(j, "name", path, [&](const json& v, const std::string& p) { d.name = get_string(v, p); });
    with(j, "n", path, [&](const json& v, const std::string& p) { d.n = get_unsigned(v, p); });
    with(j, "oracle_draws", path, [&](const json& v, const std::string& p) { d.oracle_draws = get_unsigned(v, p); });
    with(j, "p", path, [&](const json& v, const std::string& p) {
        const auto dim = get_integer(v, p);
        if (dim < 1) fail(p, "must be >= 1");
        d.quadratic = dgp::QuadraticParams::defaults(dim);
    });
    auto& q = d.quadratic;
    with(j, "mu", path, [&](const json& v, const std::string& p) { q.mu = vector_from_json(v, p); });
    with(j, "sigma", path, [&](const json& v, const std::string& p) { q.sigma = matrix_from_json(v, p); });
    with(j, "beta", path, [&](const json& v, const std::string& p) { q.beta = vector_from_json(v, p); });
    with(j, "alpha", path, [&](const json& v, const std::string& p) { q.alpha = vector_from_json(v, p); });
    with(j, "gamma", path, [&](const json& v, const std::string& p) { q.gamma = get_number(v, p); });
    with(j, "effect_enabled", path, [&](const json& v, const std::string& p) { q.effect_enabled = get_bool(v, p); });
    return d;
}

EstimatorSection parse_estimators(const json& j, const std::string& path) {
    check_keys(j, path,
               {"methods", "base", "ridge_lambda", "trees", "max_depth", "learning_rate", "min_leaf", "folds", "clip",
                "propensity_lambda", "bootstrap_se"});
    EstimatorSection e;
    auto& c = e.config;
    with(j, "methods", path, [&](const json& v, const std::string& p) { e.methods = get_strings(v, p); });
    with(j, "base", path, [&](const json& v, const std::string& p) { c.base = parse_base(get_string(v, p), p); });
    with(j, "ridge_lambda", path, [&](const json& v, const std::string& p) { c.ridge_lambda = get_number(v, p); });
    with(j, "trees", path, [&](const json& v, const std::string& p) { c.gbt.trees = static_cast<int>(get_integer(v, p)); });
    with(j, "max_depth", path, [&](const json& v, const std::string& p) { c.gbt.max_depth = static_cast<int>(get_integer(v, p)); });
    with(j, "learning_rate", path, [&](const json& v, const std::string& p) { c.gbt.learning_rate = get_number(v, p); });
    with(j, "min_leaf", path, [&](const json& v, const std::string& p) { c.gbt.min_leaf = static_cast<int>(get_integer(v, p)); });
    with(j, "folds", path, [&](const json& v, const std::string& p) { c.folds = static_cast<int>(get_integer(v, p)); });
    with(j, "clip", path, [&](const json& v, const std::string& p) { c.clip = get_number(v, p); });
    with(j, "propensity_lambda", path, [&](const json& v, const std::string& p) { c.propensity_lambda = get_number(v, p); });
    with(j, "bootstrap_se", path, [&](const json& v, const std::string& p) { c.bootstrap_se = static_cast<int>(get_integer(v, p)); });
    return e;
}

BenchmarkSection parse_benchmark(const json& j, const std::string& path) {
    check_keys(j, path, {"replicates", "n", "criterion", "generator"});
    BenchmarkSection b;
    with(j, "replicates", path, [&](const json& v, const std::string& p) { b.replicates = static_cast<int>(get_integer(v, p)); });
    with(j, "n", path, [&](const json& v, const std::string& p) { b.n = get_unsigned(v, p); });
    with(j, "criterion", path, [&](const json& v, const std::string& p) { b.criterion = get_string(v, p); });
    with(j, "generator", path, [&](const json& v, const std::string& p) { b.generator = get_string(v, p); });
    return b;
}

} // namespace

RunConfig parse_run_config(const json& j) {
    check_keys(j, "", {"data", "credence", "constraints", "dgp", "estimators", "benchmark", "output_dir", "seed"});
    RunConfig c;
    with(j, "seed", "", [&](const json& v, const std::string& p) { c.seed = get_unsigned(v, p); });
    with(j, "output_dir", "", [&](const json& v, const std::string& p) { c.output_dir = get_string(v, p); });
    with(j, "data", "", [&](const json& v, const std::string& p) { c.data = parse_data(v, p); });
    with(j, "credence", "", [&](const json& v, const std::string& p) { c.credence = parse_training(v, p); });
    with(j, "constraints", "", [&](const json& v, const std::string& p) {
        check_keys(v, p, {"effect", "bias"});
        with(v, "effect", p, [&](const json& e, const std::string& ep) { c.credence.effect = parse_effect(e, ep); });
        with(v, "bias", p, [&](const json& b, const std::string& bp) { c.credence.bias = parse_bias(b, bp); });
    });
    with(j, "dgp", "", [&](const json& v, const std::string& p) { c.dgp = parse_dgp(v, p); });
    with(j, "estimators", "", [&](const json& v, const std::string& p) { c.estimators = parse_estimators(v, p); });
    with(j, "benchmark", "", [&](const json& v, const std::string& p) { c.benchmark = parse_benchmark(v, p); });
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(j);
}

void RunConfig::validate() const {
    try {
        credence.validate();
    } catch (const ConfigError& e) {
        fail("credence", e.what());
    }
    try {
        estimators.config.validate();
    } catch (const ConfigError& e) {
        fail("estimators", e.what());
    }
    for (std::size_t i = 0; i < estimators.methods.size(); ++i)
        if (!estimators::is_known_method(estimators.methods[i]))
            fail("estimators.methods[" + std::to_string(i) + "]", "unknown method '" + estimators.methods[i] + "'");
    if (!dgp.name.empty() && dgp.name != "quadratic" && dgp.name != "friedman")
        fail("dgp.name", "unknown generator '" + dgp.name + "' (quadratic or friedman)");
    if (dgp.n < 1) fail("dgp.n", "must be >= 1");
    if (dgp.oracle_draws < 10000) fail("dgp.oracle_draws", "must be >= 10000");
    try {
        dgp.quadratic.validate();
    } catch (const std::exception& e) {
        fail("dgp", e.what());
    }
    if (benchmark.replicates < 2) fail("benchmark.replicates", "must be >= 2");
    if (benchmark.n < 10) fail("benchmark.n", "must be >= 10");
    if (benchmark.criterion != "abs_bias" && benchmark.criterion != "rmse")
        fail("benchmark.criterion", "expected abs_bias or rmse");
    if (!data.path.empty() && !std::filesystem::exists(data.path)) fail("data.path", "file not found: " + data.path);
}

json to_json(const RunConfig& c) {
    const auto& q = c.dgp.quadratic;
    const auto& e = c.estimators.config;
    json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["data"] = {{"path", c.data.path},
                 {"treatment", c.data.treatment},
                 {"outcome", c.data.outcome},
                 {"binary", c.data.binary},
                 {"ignore", c.data.ignore}};
    json training = to_json(c.credence);
    training.erase("effect");
    training.erase("bias");
    j["credence"] = training;
    j["constraints"] = {{"effect", to_json(c.credence.effect)}, {"bias", to_json(c.credence.bias)}};
    j["dgp"] = {{"name", c.dgp.name},
                {"n", c.dgp.n},
                {"oracle_draws", c.dgp.oracle_draws},
                {"p", q.p},
                {"mu", vector_to_json(q.mu)},
                {"sigma", matrix_to_json(q.sigma)},
                {"beta", vector_to_json(q.beta)},
                {"alpha", vector_to_json(q.alpha)},
                {"gamma", q.gamma},
                {"effect_enabled", q.effect_enabled}};
    j["estimators"] = {{"methods", c.estimators.methods},
                       {"base", to_string(e.base)},
                       {"ridge_lambda", e.ridge_lambda},
                       {"trees", e.gbt.trees},
                       {"max_depth", e.gbt.max_depth},
                       {"learning_rate", e.gbt.learning_rate},
                       {"min_leaf", e.gbt.min_leaf},
                       {"folds", e.folds},
                       {"clip", e.clip},
                       {"propensity_lambda", e.propensity_lambda},
                       {"bootstrap_se", e.bootstrap_se}};
    j["benchmark"] = {{"replicates", c.benchmark.replicates},
                      {"n", c.benchmark.n},
                      {"criterion", c.benchmark.criterion},
                      {"generator", c.benchmark.generator}};
    return j;
}

} // namespace credence::config
