#include "credence/evaluation.hpp"

#include "credence/errors.hpp"
#include "credence/random.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace credence::evaluation {

Generator dgp_generator(const dgp::DgpSpec& spec) {
    return [spec](std::size_t n, std::uint64_t seed) { return dgp::generate(spec, n, seed); };
}

Generator model_generator(const CredenceModel& model) {
    return [model](std::size_t n, std::uint64_t seed) { return credence::generate(model, n, seed); };
}

const MethodScore* BenchmarkReport::find(const std::string& method) const {
    for (const auto& s : scores)
        if (s.method == method) return &s;
    return nullptr;
}

namespace {

MethodScore score_method(const std::string& method, const std::vector<double>& estimates,
                         const std::vector<double>& truths, int failures) {
    MethodScore s;
    s.method = method;
    s.estimates = estimates;
    s.failures = failures;
    s.replicates = static_cast<int>(estimates.size());
    const auto r = static_cast<double>(estimates.size());
    double err_sum = 0.0, est_sum = 0.0;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        err_sum += estimates[k] - truths[k];
        est_sum += estimates[k];
    }
    s.mean_bias = err_sum / r;
    s.mean_estimate = est_sum / r;
    double centered = 0.0, squared = 0.0;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        const double err = estimates[k] - truths[k];
        centered += (err - s.mean_bias) * (err - s.mean_bias);
        squared += err * err;
    }
    s.sd = estimates.size() > 1 ? std::sqrt(centered / (r - 1.0)) : 0.0;
    s.rmse = std::sqrt(squared / r);
    return s;
}

} // namespace

BenchmarkReport run_benchmark(const Generator& generator, const BenchmarkOptions& options) {
    if (options.replicates < 2) throw ConfigError("benchmark.replicates must be >= 2");
    if (options.n < 10) throw ConfigError("benchmark.n must be >= 10");
    if (options.methods.empty()) throw ConfigError("benchmark.methods must not be empty");
    for (const auto& m : options.methods)
        if (!estimators::is_known_method(m)) throw ConfigError("benchmark.methods: unknown method '" + m + "'");
    options.estimator.validate();

    BenchmarkReport report;
    report.generator = options.generator_description;
    report.seed = options.seed;
    report.replicates = options.replicates;
    report.n = options.n;

    const std::size_t m = options.methods.size();
    std::vector<std::vector<double>> estimates(m);
    std::vector<std::vector<double>> truths(m);
    std::vector<int> failures(m, 0);

    for (int r = 0; r < options.replicates; ++r) {
        const auto index = static_cast<std::uint64_t>(options.fixed_seed ? 0 : r);
        const std::uint64_t data_seed = derive_seed(options.seed, "replicate", index);
        report.replicate_seeds.push_back(data_seed);
        const GeneratedSample generated = generator(options.n, data_seed);
        const double truth = true_ate(generated);
        report.true_ates.push_back(truth);
        // estimators only ever see the observed view
        const ObservationalSample observed = observe(generated);
        estimators::EstimatorConfig config = options.estimator;
        config.seed = derive_seed(options.seed, "estimator", index);
        for (std::size_t k = 0; k < m; ++k) {
            try {
                const auto est = estimators::estimate(options.methods[k], observed, config);
                estimates[k].push_back(est.ate);
                truths[k].push_back(truth);
            } catch (const std::exception& ex) {
                ++failures[k];
                report.failures.push_back({options.methods[k], r, ex.what()});
            }
        }
    }
    report.true_ate = std::accumulate(report.true_ates.begin(), report.true_ates.end(), 0.0) /
                      static_cast<double>(report.true_ates.size());

    for (std::size_t k = 0; k < m; ++k) {
        if (estimates[k].empty()) {
            report.excluded.push_back(options.methods[k]);
            continue;
        }
        report.scores.push_back(score_method(options.methods[k], estimates[k], truths[k], failures[k]));
    }
    if (!report.scores.empty()) {
        report.rank_abs_bias = rank_methods(report, RankCriterion::abs_bias);
        report.rank_rmse = rank_methods(report, RankCriterion::rmse);
    }
    return report;
}

RankCriterion parse_criterion(const std::string& name) {
    if (name == "abs_bias") return RankCriterion::abs_bias;
    if (name == "rmse") return RankCriterion::rmse;
    throw ConfigError("unknown ranking criterion '" + name + "' (expected abs_bias or rmse)");
}

std::vector<std::string> rank_methods(const BenchmarkReport& report, RankCriterion criterion) {
    if (report.scores.empty()) throw std::invalid_argument("rank_methods: empty report");
    std::vector<const MethodScore*> order;
    for (const auto& s : report.scores) order.push_back(&s);
    auto key = [criterion](const MethodScore* s) {
        return criterion == RankCriterion::abs_bias ? std::abs(s->mean_bias) : s->rmse;
    };
    std::sort(order.begin(), order.end(), [&](const MethodScore* a, const MethodScore* b) {
        const double ka = key(a), kb = key(b);
        if (ka != kb) return ka < kb;
        return a->method < b->method;
    });
    std::vector<std::string> names;
    for (const auto* s : order) names.push_back(s->method);
    return names;
}

double rank_agreement(const std::vector<std::string>& r1, const std::vector<std::string>& r2) {
    const std::set<std::string> s1(r1.begin(), r1.end());
    const std::set<std::string> s2(r2.begin(), r2.end());
    if (s1 != s2 || s1.size() != r1.size() || s2.size() != r2.size())
        throw std::invalid_argument("rank_agreement: rankings must contain the same distinct elements");
    const std::size_t n = r1.size();
    if (n < 2) return 1.0;
    std::map<std::string, std::size_t> pos2;
    for (std::size_t i = 0; i < n; ++i) pos2[r2[i]] = i;
    long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // r1 places i before j
            if (pos2[r1[i]] < pos2[r1[j]]) ++concordant;
            else ++discordant;
        }
    }
    return static_cast<double>(concordant - discordant) / static_cast<double>(n * (n - 1) / 2);
}

double bootstrap_se(const ObservationalSample& sample, const std::function<double(const ObservationalSample&)>& statistic,
                    int replicates, std::uint64_t seed) {
    if (replicates < 2) throw ConfigError("bootstrap replicates must be >= 2");
    std::vector<double> draws;
    int failed = 0;
    for (int b = 0; b < replicates; ++b) {
        const auto resample = bootstrap_resample(sample, derive_seed(seed, "bootstrap_se", static_cast<std::uint64_t>(b)));
        try {
            const double v = statistic(resample);
            if (!std::isfinite(v)) throw NumericalError("non-finite statistic");
            draws.push_back(v);
        } catch (const std::exception&) {
            ++failed;
        }
    }
    if (2 * failed > replicates)
        throw NumericalError("bootstrap_se: statistic failed on " + std::to_string(failed) + " of " +
                             std::to_string(replicates) + " resamples");
    if (draws.size() < 2) return 0.0;
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
    double ss = 0.0;
    for (double v : draws) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(draws.size() - 1));
}

double bootstrap_se(const ObservationalSample& sample, const std::string& method,
                    const estimators::EstimatorConfig& config, int replicates) {
    if (!estimators::is_known_method(method)) throw std::invalid_argument("bootstrap_se: unknown method '" + method + "'");
    return bootstrap_se(
        sample, [&](const ObservationalSample& s) { return estimators::estimate(method, s, config).ate; }, replicates,
        config.seed);
}

namespace {

Matrix covariates_and_outcome(const ObservationalSample& s) {
    Matrix m(s.x.rows(), s.x.cols() + 1);
    m.leftCols(s.x.cols()) = s.x;
    m.col(s.x.cols()) = s.y;
    return m;
}

Matrix pearson(const Matrix& data, const std::string& label, std::vector<std::string>& flags) {
    const Eigen::Index d = data.cols();
    const Matrix centered = data.rowwise() - data.colwise().mean();
    const Vector norms = centered.colwise().norm().transpose();
    Matrix corr = Matrix::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (norms[i] == 0.0) flags.push_back(label + ": constant column " + std::to_string(i));
        for (Eigen::Index j = i + 1; j < d; ++j) {
            double c = 0.0;
            if (norms[i] > 0.0 && norms[j] > 0.0)
                c = std::clamp(centered.col(i).dot(centered.col(j)) / (norms[i] * norms[j]), -1.0, 1.0);
            corr(i, j) = corr(j, i) = c;
        }
    }
    return corr;
}

} // namespace

CorrelationDiscrepancy correlation_discrepancy(const ObservationalSample& real, const ObservationalSample& synth) {
    if (real.x.cols() != synth.x.cols())
        throw std::invalid_argument("correlation_discrepancy: covariate dimensions differ");
    if (real.x.rows() < 2 || synth.x.rows() < 2) throw DataError("correlation_discrepancy: need at least 2 rows");
    CorrelationDiscrepancy out;
    out.real = pearson(covariates_and_outcome(real), "real", out.flags);
    out.synth = pearson(covariates_and_outcome(synth), "synth", out.flags);
    out.frobenius = (out.real - out.synth).norm();
    return out;
}

namespace {

Matrix subsample(const Matrix& m, std::size_t max_rows, std::uint64_t seed, std::uint64_t side) {
    if (static_cast<std::size_t>(m.rows()) <= max_rows) return m;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(seed, "energy_subsample", side);
    std::shuffle(idx.begin(), idx.end(), rng);
    Matrix out(static_cast<Eigen::Index>(max_rows), m.cols());
    for (std::size_t k = 0; k < max_rows; ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(idx[k]);
    return out;
}

double mean_pairwise(const Matrix& a, const Matrix& b) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double row_total = 0.0;
        for (Eigen::Index j = 0; j < b.rows(); ++j) row_total += (a.row(i) - b.row(j)).norm();
        total += row_total;
    }
    return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

} // namespace

double energy_distance(const Matrix& a, const Matrix& b, std::uint64_t seed, std::size_t max_rows) {
    if (a.cols() != b.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
    if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("energy_distance: empty sample");
    if (max_rows == 0) throw std::invalid_argument("energy_distance: max_rows must be positive");
    const Matrix sa = subsample(a, max_rows, seed, 0);
    const Matrix sb = subsample(b, max_rows, seed, 1);
    const double value = 2.0 * mean_pairwise(sa, sb) - mean_pairwise(sa, sa) - mean_pairwise(sb, sb);
    // the V-statistic is nonnegative; clamp round-off
    return std::max(0.0, value);
}

Matrix joint_rows(const ObservationalSample& sample) {
    const Eigen::Index p = sample.x.cols();
    Matrix m(sample.x.rows(), p + 2);
    m.leftCols(p) = sample.x;
    m.col(p) = sample.z;
    m.col(p + 1) = sample.y;
    return m;
}

OvbReport ovb_scan(const ObservationalSample& sample, const std::string& method,
                   const estimators::EstimatorConfig& config) {
    if (sample.x.cols() < 2) throw DataError("ovb_scan: need at least 2 covariates");
    OvbReport report;
    report.method = method;
    report.full_ate = estimators::estimate(method, sample, config).ate;
    for (std::size_t j = 0; j < sample.cols(); ++j) {
        OvbEntry entry;
        entry.column = j;
        entry.name = j < sample.column_names.size() ? sample.column_names[j] : "x" + std::to_string(j);
        try {
            entry.ate = estimators::estimate(method, drop_column(sample, j), config).ate;
            entry.delta = *entry.ate - report.full_ate;
            report.max_abs_delta = std::max(report.max_abs_delta, std::abs(*entry.delta));
        } catch (const std::exception& ex) {
            entry.error = ex.what();
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

std::string report_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "method,mean_bias,sd,rmse,mean_estimate,replicates,failures\n";
    for (const auto& s : report.scores) {
        out << s.method << ',' << s.mean_bias << ',' << s.sd << ',' << s.rmse << ',' << s.mean_estimate << ','
            << s.replicates << ',' << s.failures << '\n';
    }
    return out.str();
}

nlohmann::json report_json(const BenchmarkReport& report) {
    nlohmann::json j;
    j["generator"] = report.generator;
    j["seed"] = report.seed;
    j["replicates"] = report.replicates;
    j["n"] = report.n;
    j["true_ate"] = report.true_ate;
    j["true_ates"] = report.true_ates;
    j["replicate_seeds"] = report.replicate_seeds;
    j["rank_abs_bias"] = report.rank_abs_bias;
    j["rank_rmse"] = report.rank_rmse;
    j["excluded"] = report.excluded;
    auto failures = nlohmann::json::array();
    for (const auto& f : report.failures)
        failures.push_back({{"method", f.method}, {"replicate", f.replicate}, {"message", f.message}});
    j["failures"] = failures;
    auto scores = nlohmann::json::array();
    for (const auto& s : report.scores) {
        scores.push_back({{"method", s.method},
                          {"mean_bias", s.mean_bias},
                          {"sd", s.sd},
                          {"rmse", s.rmse},
                          {"mean_estimate", s.mean_estimate},
                          {"replicates", s.replicates},
                          {"failures", s.failures}});
    }
    j["scores"] = scores;
    return j;
}

} // namespace credence::evaluation
