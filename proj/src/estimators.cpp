#include "credence/estimators.hpp"

#include "credence/errors.hpp"
#include "credence/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace credence::estimators {

namespace {

void require_arms(const ObservationalSample& sample) {
    sample.validate();
    if (sample.treated_count() == 0) throw DataError("empty treated arm");
    if (sample.control_count() == 0) throw DataError("empty control arm");
}

void require_length(const Vector& v, const ObservationalSample& sample, const char* what) {
    if (static_cast<std::size_t>(v.size()) != sample.rows())
        throw std::invalid_argument(std::string(what) + ": length does not match sample rows");
}

double sample_sd(const Eigen::ArrayXd& v) {
    if (v.size() < 2) return 0.0;
    const double m = v.mean();
    return std::sqrt((v - m).square().sum() / static_cast<double>(v.size() - 1));
}

std::vector<Eigen::Index> arm_rows(const Vector& z, double arm) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        if (z[i] == arm) rows.push_back(i);
    return rows;
}

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
    return out;
}

Vector take(const Vector& v, const std::vector<Eigen::Index>& rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[rows[k]];
    return out;
}

void record_propensity(AteEstimate& est, const Vector& raw, double clip_fraction) {
    est.diagnostics["propensity_min"] = raw.minCoeff();
    est.diagnostics["propensity_max"] = raw.maxCoeff();
    est.diagnostics["clip_fraction"] = clip_fraction;
}

void record_arms(AteEstimate& est, const ObservationalSample& sample) {
    est.diagnostics["n_treated"] = static_cast<double>(sample.treated_count());
    est.diagnostics["n_control"] = static_cast<double>(sample.control_count());
}

const char* suffix(BaseLearner base) { return base == BaseLearner::ridge ? "linear" : "gbt"; }

} // namespace

void EstimatorConfig::validate() const {
    if (!(ridge_lambda >= 0.0)) throw ConfigError("estimators.ridge_lambda must be >= 0");
    if (gbt.trees < 1) throw ConfigError("estimators.trees must be >= 1");
    if (gbt.max_depth < 1) throw ConfigError("estimators.max_depth must be >= 1");
    if (gbt.min_leaf < 1) throw ConfigError("estimators.min_leaf must be >= 1");
    if (!(gbt.learning_rate > 0.0)) throw ConfigError("estimators.learning_rate must be > 0");
    if (folds < 2) throw ConfigError("estimators.folds must be >= 2");
    if (!(clip > 0.0 && clip < 0.5)) throw ConfigError("estimators.clip must lie in (0, 0.5)");
    if (!(propensity_lambda >= 0.0)) throw ConfigError("estimators.propensity_lambda must be >= 0");
    if (bootstrap_se < 0 || bootstrap_se == 1) throw ConfigError("estimators.bootstrap_se must be 0 or >= 2");
}

Predictor fit_regressor(const Matrix& x, const Vector& y, BaseLearner base, const EstimatorConfig& config) {
    if (base == BaseLearner::ridge) {
        Scaler scaler = Scaler::fit(x);
        LinearModel model = fit_ridge(scaler.apply(x), y, config.ridge_lambda);
        return [scaler = std::move(scaler), model = std::move(model)](const Matrix& q) {
            return model.predict(scaler.apply(q));
        };
    }
    GbtModel model = fit_gbt(x, y, config.gbt);
    return [model = std::move(model)](const Matrix& q) { return model.predict(q); };
}

Vector fit_propensity(const Matrix& x, const Vector& z, const EstimatorConfig& config) {
    const Scaler scaler = Scaler::fit(x);
    const Matrix xs = scaler.apply(x);
    return fit_logistic(xs, z, config.propensity_lambda).predict_proba(xs);
}

ClippedPropensity clip_propensity(const Vector& e, double eta) {
    ClippedPropensity out;
    out.e = e.array().max(eta).min(1.0 - eta);
    std::size_t clipped = 0;
    for (Eigen::Index i = 0; i < e.size(); ++i)
        if (e[i] < eta || e[i] > 1.0 - eta) ++clipped;
    out.clip_fraction = e.size() > 0 ? static_cast<double>(clipped) / static_cast<double>(e.size()) : 0.0;
    return out;
}

AteEstimate diff_means(const ObservationalSample& sample) {
    require_arms(sample);
    const Eigen::ArrayXd y1 = take(sample.y, arm_rows(sample.z, 1.0)).array();
    const Eigen::ArrayXd y0 = take(sample.y, arm_rows(sample.z, 0.0)).array();
    AteEstimate est;
    est.method = "diff_means";
    est.ate = y1.mean() - y0.mean();
    const double s1 = sample_sd(y1);
    const double s0 = sample_sd(y0);
    est.se = std::sqrt(s1 * s1 / static_cast<double>(y1.size()) + s0 * s0 / static_cast<double>(y0.size()));
    record_arms(est, sample);
    return est;
}

namespace {

struct Candidate {
    double e;
    Eigen::Index row;
};

// Sorted by (propensity, row) so the first entry of a run of equal scores has
// the lowest row index.
class NearestScore {
public:
    NearestScore(const Vector& e, const std::vector<Eigen::Index>& rows) {
        items_.reserve(rows.size());
        for (auto r : rows) items_.push_back({e[r], r});
        std::sort(items_.begin(), items_.end(),
                  [](const Candidate& a, const Candidate& b) { return a.e < b.e || (a.e == b.e && a.row < b.row); });
    }

    // Nearest candidate to `score`, ignoring row `exclude`. Returns -1 when
    // no candidate remains.
    Eigen::Index query(double score, Eigen::Index exclude = -1) const {
        Eigen::Index best = -1;
        double best_dist = 0.0;
        auto consider = [&](const Candidate& c) {
            if (c.row == exclude) return;
            const double d = std::abs(c.e - score);
            if (best < 0 || d < best_dist || (d == best_dist && c.row < best)) {
                best = c.row;
                best_dist = d;
            }
        };
        const auto pos = std::lower_bound(items_.begin(), items_.end(), score,
                                          [](const Candidate& c, double s) { return c.e < s; });
        // scan outward until distances can no longer improve or tie
        for (auto it = pos; it != items_.end(); ++it) {
            if (best >= 0 && std::abs(it->e - score) > best_dist) break;
            consider(*it);
        }
        for (auto it = pos; it != items_.begin();) {
            --it;
            if (best >= 0 && std::abs(it->e - score) > best_dist) break;
            consider(*it);
        }
        return best;
    }

private:
    std::vector<Candidate> items_;
};

} // namespace

AteEstimate psm_with_propensity(const ObservationalSample& sample, const Vector& e) {
    require_arms(sample);
    require_length(e, sample, "psm_with_propensity");
    const auto treated = arm_rows(sample.z, 1.0);
    const auto control = arm_rows(sample.z, 0.0);
    const NearestScore treated_index(e, treated);
    const NearestScore control_index(e, control);
    const Eigen::Index n = sample.y.size();

    Eigen::ArrayXd effect(n);
    Eigen::ArrayXd used = Eigen::ArrayXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool is_treated = sample.z[i] == 1.0;
        const Eigen::Index match = is_treated ? control_index.query(e[i]) : treated_index.query(e[i]);
        used[match] += 1.0;
        effect[i] = is_treated ? sample.y[i] - sample.y[match] : sample.y[match] - sample.y[i];
    }

    AteEstimate est;
    est.method = "psm";
    est.ate = effect.mean();

    // Abadie-Imbens variance with one match; conditional variance from the
    // nearest same-arm neighbour.
    double variance = (effect - est.ate).square().sum();
    bool sigma_available = treated.size() >= 2 && control.size() >= 2;
    if (sigma_available) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (used[i] == 0.0) continue;
            const auto& same = sample.z[i] == 1.0 ? treated_index : control_index;
            const Eigen::Index l = same.query(e[i], i);
            const double sigma2 = 0.5 * std::pow(sample.y[i] - sample.y[l], 2);
            variance += (used[i] * used[i] + used[i]) * sigma2;
        }
    } else {
        est.warnings.push_back("arm with a single unit: matching variance term omitted");
    }
    est.se = std::sqrt(variance) / static_cast<double>(n);

    if (e.maxCoeff() - e.minCoeff() < 1e-12) est.warnings.push_back("degenerate propensity: all scores equal");
    est.diagnostics["propensity_min"] = e.minCoeff();
    est.diagnostics["propensity_max"] = e.maxCoeff();
    est.diagnostics["max_match_reuse"] = used.maxCoeff();
    record_arms(est, sample);
    return est;
}

AteEstimate psm_ate(const ObservationalSample& sample, const EstimatorConfig& config) {
    require_arms(sample);
    return psm_with_propensity(sample, fit_propensity(sample.x, sample.z, config));
}

AteEstimate ipw_with_propensity(const ObservationalSample& sample, const Vector& e_raw, double eta) {
    require_arms(sample);
    require_length(e_raw, sample, "ipw_with_propensity");
    const auto clipped = clip_propensity(e_raw, eta);
    const Eigen::ArrayXd e = clipped.e.array();
    const Eigen::ArrayXd z = sample.z.array();
    const Eigen::ArrayXd y = sample.y.array();
    const Eigen::ArrayXd w1 = z / e;
    const Eigen::ArrayXd w0 = (1.0 - z) / (1.0 - e);
    const double mu1 = (w1 * y).sum() / w1.sum();
    const double mu0 = (w0 * y).sum() / w0.sum();
    const Eigen::ArrayXd phi = w1 * (y - mu1) / w1.mean() - w0 * (y - mu0) / w0.mean();

    AteEstimate est;
    est.method = "ipw";
    est.ate = mu1 - mu0;
    est.se = std::sqrt(phi.square().mean() / static_cast<double>(y.size()));
    record_propensity(est, e_raw, clipped.clip_fraction);
    record_arms(est, sample);
    return est;
}

AteEstimate ipw_ate(const ObservationalSample& sample, const EstimatorConfig& config) {
    require_arms(sample);
    return ipw_with_propensity(sample, fit_propensity(sample.x, sample.z, config), config.clip);
}

AteEstimate aipw_with_nuisances(const ObservationalSample& sample, const Vector& m1, const Vector& m0,
                                const Vector& e_raw, double eta) {
    require_arms(sample);
    require_length(m1, sample, "aipw_with_nuisances");
    require_length(m0, sample, "aipw_with_nuisances");
    require_length(e_raw, sample, "aipw_with_nuisances");
    const auto clipped = clip_propensity(e_raw, eta);
    const Eigen::ArrayXd e = clipped.e.array();
    const Eigen::ArrayXd z = sample.z.array();
    const Eigen::ArrayXd y = sample.y.array();
    const Eigen::ArrayXd psi = (m1 - m0).array() + z * (y - m1.array()) / e -
                               (1.0 - z) * (y - m0.array()) / (1.0 - e);
    AteEstimate est;
    est.method = "aipw";
    est.ate = psi.mean();
    est.se = sample_sd(psi) / std::sqrt(static_cast<double>(psi.size()));
    record_propensity(est, e_raw, clipped.clip_fraction);
    record_arms(est, sample);
    return est;
}

AteEstimate aipw_ate(const ObservationalSample& sample, BaseLearner base, const EstimatorConfig& config) {
    require_arms(sample);
    const auto treated = arm_rows(sample.z, 1.0);
    const auto control = arm_rows(sample.z, 0.0);
    const Vector m1 = fit_regressor(take_rows(sample.x, treated), take(sample.y, treated), base, config)(sample.x);
    const Vector m0 = fit_regressor(take_rows(sample.x, control), take(sample.y, control), base, config)(sample.x);
    const Vector e = fit_propensity(sample.x, sample.z, config);
    auto est = aipw_with_nuisances(sample, m1, m0, e, config.clip);
    est.method = std::string("aipw_") + suffix(base);
    return est;
}

namespace {

double metalearner_point(const ObservationalSample& sample, MetaKind kind, BaseLearner base,
                         const EstimatorConfig& config) {
    const Eigen::Index n = sample.x.rows();
    const Eigen::Index p = sample.x.cols();
    if (kind == MetaKind::S) {
        Matrix design(n, p + 1);
        design.leftCols(p) = sample.x;
        design.col(p) = sample.z;
        const Predictor f = fit_regressor(design, sample.y, base, config);
        design.col(p).setOnes();
        const Vector on = f(design);
        design.col(p).setZero();
        const Vector off = f(design);
        return (on - off).mean();
    }

    const auto treated = arm_rows(sample.z, 1.0);
    const auto control = arm_rows(sample.z, 0.0);
    if (base == BaseLearner::gbt) {
        const auto need = static_cast<std::size_t>(2 * config.gbt.min_leaf);
        if (treated.size() < need || control.size() < need)
            throw DataError("metalearner: each arm needs at least " + std::to_string(need) + " rows for gbt");
    }
    const Matrix x1 = take_rows(sample.x, treated);
    const Matrix x0 = take_rows(sample.x, control);
    const Vector y1 = take(sample.y, treated);
    const Vector y0 = take(sample.y, control);
    const Predictor m1 = fit_regressor(x1, y1, base, config);
    const Predictor m0 = fit_regressor(x0, y0, base, config);
    if (kind == MetaKind::T) return (m1(sample.x) - m0(sample.x)).mean();

    // X-learner: regress imputed effects per arm, blend with the propensity
    const Vector d1 = y1 - m0(x1);
    const Vector d0 = m1(x0) - y0;
    const Predictor tau1 = fit_regressor(x1, d1, base, config);
    const Predictor tau0 = fit_regressor(x0, d0, base, config);
    const Vector e = clip_propensity(fit_propensity(sample.x, sample.z, config), config.clip).e;
    const Eigen::ArrayXd tau = e.array() * tau0(sample.x).array() + (1.0 - e.array()) * tau1(sample.x).array();
    return tau.mean();
}

} // namespace

AteEstimate metalearner_ate(const ObservationalSample& sample, MetaKind kind, BaseLearner base,
                            const EstimatorConfig& config) {
    require_arms(sample);
    AteEstimate est;
    const char* prefix = kind == MetaKind::S ? "s_" : kind == MetaKind::T ? "t_" : "x_";
    est.method = std::string(prefix) + suffix(base);
    est.ate = metalearner_point(sample, kind, base, config);
    if (config.bootstrap_se > 0) {
        std::vector<double> draws;
        int failures = 0;
        for (int b = 0; b < config.bootstrap_se; ++b) {
            const auto resample =
                bootstrap_resample(sample, derive_seed(config.seed, "metalearner_bootstrap", static_cast<std::uint64_t>(b)));
            try {
                require_arms(resample);
                draws.push_back(metalearner_point(resample, kind, base, config));
            } catch (const std::runtime_error&) {
                ++failures;
            }
        }
        if (draws.size() >= 2)
            est.se = sample_sd(Eigen::Map<const Eigen::ArrayXd>(draws.data(), static_cast<Eigen::Index>(draws.size())));
        est.diagnostics["bootstrap_failures"] = failures;
    }
    record_arms(est, sample);
    return est;
}

namespace {

std::uint64_t row_hash(const ObservationalSample& sample, Eigen::Index i, std::uint64_t seed) {
    std::uint64_t h = derive_seed(seed, "dml_folds");
    auto mix = [&](double v) {
        h ^= std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
        h = derive_seed(h, "row");
    };
    for (Eigen::Index j = 0; j < sample.x.cols(); ++j) mix(sample.x(i, j));
    mix(sample.z[i]);
    mix(sample.y[i]);
    return h;
}

} // namespace

AteEstimate dml_ate(const ObservationalSample& sample, BaseLearner base, const EstimatorConfig& config) {
    require_arms(sample);
    const Eigen::Index n = sample.x.rows();
    const int k = config.folds;
    if (n < 2 * k) throw DataError("dml: need at least 2*folds rows");

    std::vector<std::pair<std::uint64_t, Eigen::Index>> keyed(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) keyed[static_cast<std::size_t>(i)] = {row_hash(sample, i, config.seed), i};
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < keyed.size(); ++r) fold[static_cast<std::size_t>(keyed[r].second)] = static_cast<int>(r % k);

    Vector y_res(n), z_res(n);
    for (int f = 0; f < k; ++f) {
        std::vector<Eigen::Index> train, held;
        for (Eigen::Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? held : train).push_back(i);
        const Matrix x_train = take_rows(sample.x, train);
        const Matrix x_held = take_rows(sample.x, held);
        const Vector y_hat = fit_regressor(x_train, take(sample.y, train), base, config)(x_held);
        const Vector z_hat = fit_regressor(x_train, take(sample.z, train), base, config)(x_held);
        for (std::size_t r = 0; r < held.size(); ++r) {
            const auto i = held[r];
            y_res[i] = sample.y[i] - y_hat[static_cast<Eigen::Index>(r)];
            z_res[i] = sample.z[i] - z_hat[static_cast<Eigen::Index>(r)];
        }
    }

    const double zz = z_res.squaredNorm();
    if (zz < 1e-10) throw NumericalError("dml: no residual treatment variation");
    AteEstimate est;
    est.method = std::string("dml_") + suffix(base);
    est.ate = y_res.dot(z_res) / zz;
    const Eigen::ArrayXd psi = (y_res - est.ate * z_res).array() * z_res.array();
    const double j = zz / static_cast<double>(n);
    est.se = std::sqrt(psi.square().mean() / (j * j) / static_cast<double>(n));
    est.diagnostics["folds"] = k;
    est.diagnostics["residual_treatment_ss"] = zz;
    record_arms(est, sample);
    return est;
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double v) { return 1.0 / (1.0 + std::exp(-v)); }

} // namespace

AteEstimate tmle_with_nuisances(const ObservationalSample& sample, const Vector& m1, const Vector& m0,
                                const Vector& e_raw, double eta) {
    require_arms(sample);
    require_length(m1, sample, "tmle_with_nuisances");
    require_length(m0, sample, "tmle_with_nuisances");
    require_length(e_raw, sample, "tmle_with_nuisances");
    const Eigen::Index n = sample.y.size();
    const auto clipped = clip_propensity(e_raw, eta);
    const Vector& e = clipped.e;

    AteEstimate est;
    est.method = "tmle";
    record_propensity(est, e_raw, clipped.clip_fraction);
    record_arms(est, sample);

    const double lo = sample.y.minCoeff();
    const double range = sample.y.maxCoeff() - lo;
    if (range == 0.0) {
        est.ate = 0.0;
        est.se = 0.0;
        est.warnings.push_back("constant outcome");
        return est;
    }

    constexpr double bound = 1e-5;
    auto scaled = [&](double v) { return std::clamp((v - lo) / range, bound, 1.0 - bound); };
    Vector ys(n), q1(n), q0(n), h(n), offset(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ys[i] = (sample.y[i] - lo) / range;
        q1[i] = scaled(m1[i]);
        q0[i] = scaled(m0[i]);
        const double z = sample.z[i];
        h[i] = z / e[i] - (1.0 - z) / (1.0 - e[i]);
        offset[i] = logit(z == 1.0 ? q1[i] : q0[i]);
    }

    // quasi-binomial fit of the fluctuation parameter by Newton's method
    double epsilon = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        double score = 0.0;
        double info = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = expit(offset[i] + epsilon * h[i]);
            score += h[i] * (ys[i] - q);
            info += h[i] * h[i] * q * (1.0 - q);
        }
        if (!(info > 0.0)) break;
        const double step = score / info;
        if (!std::isfinite(step)) break;
        epsilon += step;
        if (std::abs(step) < 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericalError("tmle: fluctuation step did not converge");

    Eigen::ArrayXd u1(n), u0(n), uz(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        u1[i] = expit(logit(q1[i]) + epsilon / e[i]);
        u0[i] = expit(logit(q0[i]) - epsilon / (1.0 - e[i]));
        uz[i] = sample.z[i] == 1.0 ? u1[i] : u0[i];
    }
    const double psi = (u1 - u0).mean();
    const Eigen::ArrayXd eic = h.array() * (ys.array() - uz) + u1 - u0 - psi;
    est.ate = psi * range;
    est.se = sample_sd(eic) / std::sqrt(static_cast<double>(n)) * range;
    est.diagnostics["epsilon"] = epsilon;
    return est;
}

AteEstimate tmle_ate(const ObservationalSample& sample, BaseLearner base, const EstimatorConfig& config) {
    require_arms(sample);
    const auto treated = arm_rows(sample.z, 1.0);
    const auto control = arm_rows(sample.z, 0.0);
    const Vector m1 = fit_regressor(take_rows(sample.x, treated), take(sample.y, treated), base, config)(sample.x);
    const Vector m0 = fit_regressor(take_rows(sample.x, control), take(sample.y, control), base, config)(sample.x);
    const Vector e = fit_propensity(sample.x, sample.z, config);
    auto est = tmle_with_nuisances(sample, m1, m0, e, config.clip);
    est.method = std::string("tmle_") + suffix(base);
    return est;
}

namespace {

const std::vector<std::string> families = {"s", "t", "x", "dml", "aipw", "tmle"};

struct ParsedMethod {
    std::string family;
    std::optional<BaseLearner> base;
};

std::optional<ParsedMethod> parse_method(const std::string& id) {
    if (id == "diff_means" || id == "ipw" || id == "psm") return ParsedMethod{id, std::nullopt};
    for (const auto& f : families) {
        if (id == f) return ParsedMethod{f, std::nullopt};
        if (id == f + "_linear") return ParsedMethod{f, BaseLearner::ridge};
        if (id == f + "_gbt") return ParsedMethod{f, BaseLearner::gbt};
    }
    return std::nullopt;
}

} // namespace

std::vector<std::string> method_ids() {
    std::vector<std::string> ids = {"diff_means", "ipw", "psm"};
    for (const auto& f : families) {
        ids.push_back(f);
        ids.push_back(f + "_linear");
        ids.push_back(f + "_gbt");
    }
    return ids;
}

bool is_known_method(const std::string& id) { return parse_method(id).has_value(); }

std::vector<std::string> default_suite() {
    return {"s_linear", "s_gbt",    "t_linear", "t_gbt", "x_linear", "x_gbt",
            "dml_linear", "dml_gbt", "psm",      "tmle",  "aipw"};
}

AteEstimate estimate(const std::string& method, const ObservationalSample& sample, const EstimatorConfig& config) {
    const auto parsed = parse_method(method);
    if (!parsed) {
        std::string valid;
        for (const auto& id : method_ids()) valid += (valid.empty() ? "" : ", ") + id;
        throw std::invalid_argument("unknown method '" + method + "'; valid methods: " + valid);
    }
    config.validate();
    const BaseLearner base = parsed->base.value_or(config.base);
    AteEstimate est;
    const auto& f = parsed->family;
    if (f == "diff_means") est = diff_means(sample);
    else if (f == "ipw") est = ipw_ate(sample, config);
    else if (f == "psm") est = psm_ate(sample, config);
    else if (f == "s") est = metalearner_ate(sample, MetaKind::S, base, config);
    else if (f == "t") est = metalearner_ate(sample, MetaKind::T, base, config);
    else if (f == "x") est = metalearner_ate(sample, MetaKind::X, base, config);
    else if (f == "dml") est = dml_ate(sample, base, config);
    else if (f == "aipw") est = aipw_ate(sample, base, config);
    else est = tmle_ate(sample, base, config);
    est.method = method;
    if (!std::isfinite(est.ate)) throw NumericalError(method + ": non-finite estimate");
    return est;
}

} // namespace credence::estimators
