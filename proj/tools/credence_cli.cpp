#include <CLI11.hpp>
#include <json.hpp>

#include "credence/config.hpp"
#include "credence/credence.hpp"
#include "credence/dgp.hpp"
#include "credence/errors.hpp"
#include "credence/estimators.hpp"
#include "credence/evaluation.hpp"
#include "credence/model_io.hpp"
#include "credence/tabular.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace credence;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool quiet = false;
};

struct SimulateArgs {
    std::optional<std::string> dgp;
    std::optional<std::size_t> n;
};

struct TrainArgs {
    std::optional<std::string> data;
    std::optional<std::string> treatment;
    std::optional<std::string> outcome;
    std::optional<std::vector<std::string>> binary;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<int> epochs;
    std::optional<std::string> effect;
    std::optional<std::string> bias;
};

struct GenerateArgs {
    std::string model;
    std::size_t n = 0;
};

struct EstimateArgs {
    std::optional<std::string> data;
    std::optional<std::vector<std::string>> methods;
    std::optional<std::string> base;
};

struct BenchmarkArgs {
    std::optional<std::string> generator;
    std::optional<int> replicates;
    std::optional<std::size_t> n;
    std::optional<std::vector<std::string>> methods;
    std::optional<std::string> criterion;
    std::vector<std::string> compare;
};

struct DiagnoseArgs {
    std::string real;
    std::string synth;
};

class Output {
public:
    explicit Output(bool quiet) : quiet_(quiet) {}
    template <class T>
    Output& operator<<(const T& v) {
        if (!quiet_) std::cout << v;
        return *this;
    }

private:
    bool quiet_;
};

config::RunConfig resolve(const Globals& g) {
    config::RunConfig cfg = g.config_path.empty() ? config::RunConfig{} : config::load_run_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.out) cfg.output_dir = *g.out;
    return cfg;
}

fs::path prepare_out(const config::RunConfig& cfg) {
    const fs::path dir = cfg.output_dir.empty() ? fs::path(".") : fs::path(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json sidecar(const std::string& command, const config::RunConfig& cfg) {
    return json{{"command", command}, {"seed", cfg.seed}, {"config", config::to_json(cfg)}};
}

ObservationalSample load_data(const config::RunConfig& cfg, const std::string& path) {
    if (path.empty()) throw ConfigError("data.path: required (--data or config file)");
    if (!fs::exists(path)) throw DataError("file not found: " + path);
    return load_observational_csv(path, cfg.data.csv_options());
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    auto cfg = resolve(g);
    if (a.dgp) cfg.dgp.name = *a.dgp;
    if (a.n) cfg.dgp.n = *a.n;
    if (cfg.dgp.name.empty()) throw ConfigError("dgp.name: required (--dgp quadratic|friedman)");
    cfg.validate();
    Output out(g.quiet);
    const auto dir = prepare_out(cfg);

    const auto spec = cfg.dgp.spec();
    const GeneratedSample sample = dgp::generate(spec, cfg.dgp.n, cfg.seed);
    write_csv(dir / "simulated.csv", sample, cfg.data.treatment, cfg.data.outcome);
    write_csv(dir / "observed.csv", observe(sample), cfg.data.treatment, cfg.data.outcome);
    const auto oracle = dgp::oracle_ate(spec, cfg.dgp.oracle_draws, derive_seed(cfg.seed, "oracle_ate"));

    json meta = sidecar("simulate", cfg);
    meta["dgp"] = spec.name;
    meta["n"] = cfg.dgp.n;
    meta["sample_ate"] = true_ate(sample);
    meta["oracle_ate"] = oracle.ate;
    meta["oracle_se"] = oracle.standard_error;
    meta["oracle_draws"] = oracle.n_mc;
    write_json(dir / "simulate.json", meta);

    out << "oracle_ate: " << fmt(oracle.ate) << " (mc se " << fmt(oracle.standard_error) << ")\n";
    out << "sample_ate: " << fmt(true_ate(sample)) << "\n";
    out << "wrote " << (dir / "simulated.csv").string() << " and " << (dir / "observed.csv").string() << "\n";
    return 0;
}

int cmd_train(const Globals& g, const TrainArgs& a) {
    auto cfg = resolve(g);
    if (a.data) cfg.data.path = *a.data;
    if (a.treatment) cfg.data.treatment = *a.treatment;
    if (a.outcome) cfg.data.outcome = *a.outcome;
    if (a.binary) cfg.data.binary = *a.binary;
    if (a.alpha) cfg.credence.alpha = *a.alpha;
    if (a.beta) cfg.credence.beta = *a.beta;
    if (a.epochs) cfg.credence.epochs = *a.epochs;
    try {
        if (a.effect) cfg.credence.effect = config::parse_effect(json::parse(*a.effect), "--effect");
        if (a.bias) cfg.credence.bias = config::parse_bias(json::parse(*a.bias), "--bias");
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("constraint flag is not valid JSON: ") + e.what());
    }
    cfg.credence.seed = cfg.seed;
    cfg.validate();
    Output out(g.quiet);
    const auto sample = load_data(cfg, cfg.data.path);
    const auto dir = prepare_out(cfg);

    out << "training on " << sample.rows() << " rows, p=" << sample.cols() << ", " << cfg.credence.epochs
        << " epochs\n";
    auto run = train(sample, cfg.credence);
    run.model.treatment_name = cfg.data.treatment;
    run.model.outcome_name = cfg.data.outcome;
    save_model(dir / "model.json", run.model);

    std::ostringstream loss;
    loss << std::setprecision(17) << "epoch,loss_x,loss_y,y_reconstruction,y_kl,y_effect,y_bias\n";
    for (const auto& h : run.history) {
        loss << h.epoch << ',' << h.loss_x << ',' << h.loss_y << ',' << h.y_reconstruction << ',' << h.y_kl << ','
             << h.y_effect << ',' << h.y_bias << '\n';
    }
    write_text(dir / "loss.csv", loss.str());

    json meta = sidecar("train", cfg);
    meta["rows"] = sample.rows();
    meta["resolved_training"] = config::to_json(run.model.config);
    const auto& last = run.history.back();
    meta["final_loss"] = {{"loss_x", last.loss_x}, {"loss_y", last.loss_y}};
    write_json(dir / "train.json", meta);

    out << "final loss_x " << fmt(last.loss_x) << ", loss_y " << fmt(last.loss_y) << "\n";
    out << "wrote " << (dir / "model.json").string() << "\n";
    return 0;
}

int cmd_generate(const Globals& g, const GenerateArgs& a) {
    auto cfg = resolve(g);
    cfg.validate();
    Output out(g.quiet);
    if (a.n < 1) throw ConfigError("--n must be >= 1");
    const auto model = load_model(a.model);
    const auto dir = prepare_out(cfg);
    const auto sample = generate(model, a.n, cfg.seed);
    write_csv(dir / "generated.csv", sample, model.treatment_name, model.outcome_name);
    const double ate = true_ate(sample);

    json meta = sidecar("generate", cfg);
    meta["model"] = a.model;
    meta["n"] = a.n;
    meta["true_ate"] = ate;
    write_json(dir / "generate.json", meta);

    out << "true_ate: " << fmt(ate) << "\n";
    out << "wrote " << (dir / "generated.csv").string() << "\n";
    return 0;
}

int cmd_estimate(const Globals& g, const EstimateArgs& a) {
    auto cfg = resolve(g);
    if (a.data) cfg.data.path = *a.data;
    if (a.methods) cfg.estimators.methods = *a.methods;
    if (a.base) cfg.estimators.config.base = config::parse_base(*a.base, "--base");
    cfg.estimators.config.seed = cfg.seed;
    for (const auto& m : cfg.estimators.methods) {
        if (!estimators::is_known_method(m)) {
            std::string valid;
            for (const auto& id : estimators::method_ids()) valid += (valid.empty() ? "" : ", ") + id;
            throw ConfigError("unknown method '" + m + "'; valid methods: " + valid);
        }
    }
    cfg.validate();
    Output out(g.quiet);
    const auto sample = load_data(cfg, cfg.data.path);
    const auto dir = prepare_out(cfg);

    std::string csv = "method,ate,se,diagnostics\n";
    json results = json::array();
    for (const auto& m : cfg.estimators.methods) {
        json diag = json::object();
        std::string ate_text, se_text;
        try {
            const auto est = estimators::estimate(m, sample, cfg.estimators.config);
            for (const auto& [k, v] : est.diagnostics) diag[k] = v;
            if (!est.warnings.empty()) diag["warnings"] = est.warnings;
            ate_text = fmt(est.ate);
            if (est.se) se_text = fmt(*est.se);
            out << std::left << std::setw(12) << m << " ate " << fmt(est.ate);
            if (est.se) out << "  se " << fmt(*est.se);
            out << "\n";
            results.push_back({{"method", m}, {"ate", est.ate}, {"se", est.se ? json(*est.se) : json(nullptr)}});
        } catch (const std::runtime_error& e) {
            diag["error"] = e.what();
            std::cerr << "warning: " << m << " failed: " << e.what() << "\n";
            results.push_back({{"method", m}, {"error", e.what()}});
        }
        csv += m + "," + ate_text + "," + se_text + "," + csv_quote(diag.dump()) + "\n";
    }
    write_text(dir / "estimates.csv", csv);
    json meta = sidecar("estimate", cfg);
    meta["rows"] = sample.rows();
    meta["results"] = results;
    write_json(dir / "estimate.json", meta);
    return 0;
}

evaluation::Generator make_generator(const std::string& desc, const config::RunConfig& cfg) {
    if (desc.rfind("dgp:", 0) == 0) {
        auto d = cfg.dgp;
        d.name = desc.substr(4);
        if (d.name != "quadratic" && d.name != "friedman")
            throw ConfigError("benchmark.generator: unknown dgp '" + d.name + "'");
        return evaluation::dgp_generator(d.spec());
    }
    if (desc.rfind("model:", 0) == 0) return evaluation::model_generator(load_model(desc.substr(6)));
    throw ConfigError("benchmark.generator: expected dgp:<name> or model:<path>, got '" + desc + "'");
}

evaluation::BenchmarkReport run_one(const std::string& desc, const config::RunConfig& cfg) {
    evaluation::BenchmarkOptions opt;
    opt.methods = cfg.estimators.methods;
    opt.replicates = cfg.benchmark.replicates;
    opt.n = cfg.benchmark.n;
    opt.seed = cfg.seed;
    opt.estimator = cfg.estimators.config;
    opt.generator_description = desc;
    return evaluation::run_benchmark(make_generator(desc, cfg), opt);
}

void write_report(const fs::path& dir, const std::string& stem, const evaluation::BenchmarkReport& report,
                  const config::RunConfig& cfg) {
    write_text(dir / (stem + ".csv"), evaluation::report_csv(report));
    json j = sidecar("benchmark", cfg);
    j["report"] = evaluation::report_json(report);
    write_json(dir / (stem + ".json"), j);
}

void print_report(Output& out, const evaluation::BenchmarkReport& report) {
    out << report.generator << ": true ATE " << fmt(report.true_ate) << " over " << report.replicates
        << " replicates of n=" << report.n << "\n";
    for (const auto& s : report.scores) {
        out << "  " << std::left << std::setw(12) << s.method << " bias " << std::setw(12) << s.mean_bias << " sd "
            << std::setw(12) << s.sd << " rmse " << s.rmse;
        if (s.failures) out << "  (" << s.failures << " failed)";
        out << "\n";
    }
    for (const auto& m : report.excluded) out << "  " << m << " excluded: failed on every replicate\n";
}

int cmd_benchmark(const Globals& g, const BenchmarkArgs& a) {
    auto cfg = resolve(g);
    if (a.generator) cfg.benchmark.generator = *a.generator;
    if (a.replicates) cfg.benchmark.replicates = *a.replicates;
    if (a.n) cfg.benchmark.n = *a.n;
    if (a.methods) cfg.estimators.methods = *a.methods;
    if (a.criterion) cfg.benchmark.criterion = *a.criterion;
    cfg.validate();
    Output out(g.quiet);
    const auto dir = prepare_out(cfg);
    const auto criterion = evaluation::parse_criterion(cfg.benchmark.criterion);

    if (a.compare.empty()) {
        const auto report = run_one(cfg.benchmark.generator, cfg);
        write_report(dir, "benchmark", report, cfg);
        print_report(out, report);
        return 0;
    }

    if (a.compare.size() != 2 || a.compare[0] != "oracle")
        throw ConfigError("--compare expects: oracle <model-file>");
    const std::string oracle_desc = "dgp:" + cfg.dgp.spec().name;
    const std::string model_desc = "model:" + a.compare[1];
    const auto oracle = run_one(oracle_desc, cfg);
    const auto synthetic = run_one(model_desc, cfg);
    write_report(dir, "benchmark_oracle", oracle, cfg);
    write_report(dir, "benchmark_credence", synthetic, cfg);
    print_report(out, oracle);
    print_report(out, synthetic);

    // rank agreement over methods scored by both runs
    std::vector<std::string> shared;
    for (const auto& s : oracle.scores)
        if (synthetic.find(s.method)) shared.push_back(s.method);
    auto restrict = [&](const evaluation::BenchmarkReport& r) {
        evaluation::BenchmarkReport sub = r;
        sub.scores.clear();
        for (const auto& s : r.scores)
            if (std::find(shared.begin(), shared.end(), s.method) != shared.end()) sub.scores.push_back(s);
        return evaluation::rank_methods(sub, criterion);
    };
    if (shared.empty()) throw NumericalError("no method succeeded under both generators");
    const auto r_oracle = restrict(oracle);
    const auto r_synth = restrict(synthetic);
    const double tau = evaluation::rank_agreement(r_oracle, r_synth);

    json cmp = sidecar("benchmark", cfg);
    cmp["criterion"] = cfg.benchmark.criterion;
    cmp["oracle_generator"] = oracle_desc;
    cmp["credence_generator"] = model_desc;
    cmp["oracle_ranking"] = r_oracle;
    cmp["credence_ranking"] = r_synth;
    cmp["kendall_tau"] = tau;
    write_json(dir / "comparison.json", cmp);
    out << "kendall_tau: " << fmt(tau) << "\n";
    return 0;
}

int cmd_diagnose(const Globals& g, const DiagnoseArgs& a) {
    auto cfg = resolve(g);
    cfg.validate();
    Output out(g.quiet);
    const auto real = load_data(cfg, a.real);
    const auto synth = load_data(cfg, a.synth);
    const auto dir = prepare_out(cfg);

    const auto corr = evaluation::correlation_discrepancy(real, synth);
    const Matrix real_rows = evaluation::joint_rows(real);
    const auto scaler = estimators::Scaler::fit(real_rows);
    const double energy = evaluation::energy_distance(scaler.apply(real_rows), scaler.apply(evaluation::joint_rows(synth)),
                                                      derive_seed(cfg.seed, "diagnose"));

    json j = sidecar("diagnose", cfg);
    j["real"] = a.real;
    j["synth"] = a.synth;
    j["correlation_frobenius"] = corr.frobenius;
    j["energy_distance"] = energy;
    j["n_real"] = real.rows();
    j["n_synth"] = synth.rows();
    j["flags"] = corr.flags;
    write_json(dir / "diagnostics.json", j);

    out << "correlation_frobenius: " << fmt(corr.frobenius) << "\n";
    out << "energy_distance: " << fmt(energy) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained generative models for benchmarking causal effect estimators"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Global seed (overrides the config file)");
    app.add_option("--out", g.out, "Output directory (overrides the config file)");
    app.add_flag("--quiet", g.quiet, "Suppress informational output");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Draw a sample from a synthetic data generating process");
    simulate->add_option("--dgp", sim.dgp, "quadratic or friedman");
    simulate->add_option("--n", sim.n, "Rows to draw");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Fit the constrained generator to an observational CSV");
    train_cmd->add_option("--data", tr.data, "Observational CSV");
    train_cmd->add_option("--treatment", tr.treatment, "Treatment column name");
    train_cmd->add_option("--outcome", tr.outcome, "Outcome column name");
    train_cmd->add_option("--binary", tr.binary, "Binary covariate columns");
    train_cmd->add_option("--alpha", tr.alpha, "Rigidness weight on the treatment effect constraint");
    train_cmd->add_option("--beta", tr.beta, "Rigidness weight on the confounding bias constraint");
    train_cmd->add_option("--epochs", tr.epochs, "Training epochs");
    train_cmd->add_option("--effect", tr.effect, "Effect constraint as JSON, e.g. {\"type\":\"constant\",\"c\":1}");
    train_cmd->add_option("--bias", tr.bias, "Bias constraint as JSON, e.g. {\"type\":\"zero\"}");

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Sample from a trained model");
    generate_cmd->add_option("--model", gen.model, "Model file")->required();
    generate_cmd->add_option("--n", gen.n, "Rows to generate")->required();

    EstimateArgs est;
    auto* estimate_cmd = app.add_subcommand("estimate", "Run ATE estimators on an observational CSV");
    estimate_cmd->add_option("--data", est.data, "Observational CSV");
    estimate_cmd->add_option("--methods", est.methods, "Method ids");
    estimate_cmd->add_option("--base", est.base, "Base learner for unsuffixed ids: ridge or gbt");

    BenchmarkArgs bench;
    auto* benchmark_cmd = app.add_subcommand("benchmark", "Monte Carlo comparison of estimators");
    benchmark_cmd->add_option("--generator", bench.generator, "dgp:quadratic, dgp:friedman or model:<path>");
    benchmark_cmd->add_option("--R", bench.replicates, "Replicates");
    benchmark_cmd->add_option("--n", bench.n, "Rows per replicate");
    benchmark_cmd->add_option("--methods", bench.methods, "Method ids");
    benchmark_cmd->add_option("--criterion", bench.criterion, "abs_bias or rmse");
    benchmark_cmd->add_option("--compare", bench.compare, "oracle <model-file>: rank agreement between generators")
        ->expected(2);

    DiagnoseArgs diag;
    auto* diagnose_cmd = app.add_subcommand("diagnose", "Goodness of fit of a synthetic sample");
    diagnose_cmd->add_option("--real", diag.real, "Real CSV")->required();
    diagnose_cmd->add_option("--synth", diag.synth, "Synthetic CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(g, sim);
        if (train_cmd->parsed()) return cmd_train(g, tr);
        if (generate_cmd->parsed()) return cmd_generate(g, gen);
        if (estimate_cmd->parsed()) return cmd_estimate(g, est);
        if (benchmark_cmd->parsed()) return cmd_benchmark(g, bench);
        if (diagnose_cmd->parsed()) return cmd_diagnose(g, diag);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
