#include "credence/model_io.hpp"

#include "credence/config.hpp"
#include "credence/errors.hpp"

#include <fstream>

namespace credence {

using nlohmann::json;

namespace {

json mlp_to_json(const nnet::Mlp& net) {
    json layers = json::array();
    for (const auto& l : net.layers) {
        layers.push_back({{"activation", l.activation == nnet::Activation::tanh ? "tanh" : "identity"},
                          {"weight", config::matrix_to_json(l.weight)},
                          {"bias", config::vector_to_json(l.bias)}});
    }
    return layers;
}

nnet::Mlp mlp_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw DataError(path + ": expected an array of layers");
    nnet::Mlp net;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& lj = j[k];
        const std::string lp = path + "[" + std::to_string(k) + "]";
        nnet::Layer layer;
        const std::string act = lj.at("activation").get<std::string>();
        if (act == "tanh") layer.activation = nnet::Activation::tanh;
        else if (act == "identity") layer.activation = nnet::Activation::identity;
        else throw DataError(lp + ".activation: unknown activation '" + act + "'");
        layer.weight = config::matrix_from_json(lj.at("weight"), lp + ".weight");
        layer.bias = config::vector_from_json(lj.at("bias"), lp + ".bias");
        net.layers.push_back(std::move(layer));
    }
    return net;
}

json vae_to_json(const ConditionalVae& vae) {
    return {{"latent_dim", vae.latent_dim}, {"encoder", mlp_to_json(vae.encoder)}, {"decoder", mlp_to_json(vae.decoder)}};
}

ConditionalVae vae_from_json(const json& j, const std::string& path) {
    ConditionalVae vae;
    vae.latent_dim = j.at("latent_dim").get<int>();
    vae.encoder = mlp_from_json(j.at("encoder"), path + ".encoder");
    vae.decoder = mlp_from_json(j.at("decoder"), path + ".decoder");
    return vae;
}

} // namespace

json model_to_json(const CredenceModel& model) {
    json j;
    j["format_version"] = model_format_version;
    j["p"] = model.p;
    j["p_z"] = model.p_z;
    j["column_names"] = model.column_names;
    j["binary_columns"] = model.binary_columns;
    j["treatment_name"] = model.treatment_name;
    j["outcome_name"] = model.outcome_name;
    j["stats"] = {{"x_mean", config::vector_to_json(model.stats.x_mean)},
                  {"x_scale", config::vector_to_json(model.stats.x_scale)},
                  {"y_mean", model.stats.y_mean},
                  {"y_scale", model.stats.y_scale}};
    j["config"] = config::to_json(model.config);
    j["x_given_z"] = vae_to_json(model.x_given_z);
    j["y_given_xz"] = vae_to_json(model.y_given_xz);
    return j;
}

CredenceModel model_from_json(const json& j) {
    try {
        if (!j.is_object() || !j.contains("format_version")) throw DataError("model file: missing format_version");
        const int version = j.at("format_version").get<int>();
        if (version != model_format_version)
            throw DataError("model file: unsupported format_version " + std::to_string(version));
        CredenceModel model;
        model.p = j.at("p").get<Eigen::Index>();
        model.p_z = j.at("p_z").get<double>();
        model.column_names = j.at("column_names").get<std::vector<std::string>>();
        model.binary_columns = j.at("binary_columns").get<std::vector<std::size_t>>();
        model.treatment_name = j.at("treatment_name").get<std::string>();
        model.outcome_name = j.at("outcome_name").get<std::string>();
        const auto& s = j.at("stats");
        model.stats.x_mean = config::vector_from_json(s.at("x_mean"), "stats.x_mean");
        model.stats.x_scale = config::vector_from_json(s.at("x_scale"), "stats.x_scale");
        model.stats.y_mean = s.at("y_mean").get<double>();
        model.stats.y_scale = s.at("y_scale").get<double>();
        model.config = config::parse_training(j.at("config"), "config");
        model.x_given_z = vae_from_json(j.at("x_given_z"), "x_given_z");
        model.y_given_xz = vae_from_json(j.at("y_given_xz"), "y_given_xz");
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const CredenceModel& model) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out << model_to_json(model).dump(2) << '\n';
}

CredenceModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

} // namespace credence
