#include "credence/dgp.hpp"

#include "credence/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace credence::dgp {

namespace {

double expit(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// Returns A with A A' = sigma. Falls back to an eigen square root when the
/// matrix is only semi-definite.
Matrix covariance_factor(const Matrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    const double largest = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-10 * largest)
        throw std::invalid_argument("quadratic DGP: sigma is not positive semi-definite");
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

} // namespace

QuadraticParams QuadraticParams::defaults(Eigen::Index p) {
    QuadraticParams q;
    q.p = p;
    q.mu = Vector::Zero(p);
    q.sigma = Matrix::Identity(p, p);
    q.beta = Vector::Zero(p);
    q.beta[0] = 1.0;
    q.alpha = Vector::Zero(p);
    return q;
}

void QuadraticParams::validate() const {
    if (p < 1) throw std::invalid_argument("quadratic DGP: p must be >= 1");
    if (mu.size() != p || beta.size() != p || alpha.size() != p)
        throw std::invalid_argument("quadratic DGP: vector lengths must equal p");
    if (sigma.rows() != p || sigma.cols() != p) throw std::invalid_argument("quadratic DGP: sigma must be p x p");
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw std::invalid_argument("quadratic DGP: sigma must be symmetric");
    if (!std::isfinite(gamma)) throw std::invalid_argument("quadratic DGP: gamma must be finite");
}

double QuadraticParams::closed_form_ate() const {
    if (!effect_enabled) return 0.0;
    const double bm = beta.dot(mu);
    return bm * bm + beta.dot(sigma * beta) + 1.0 + (alpha - beta).dot(mu);
}

GeneratedSample gen_quadratic(const QuadraticParams& params, std::size_t n, std::uint64_t seed) {
    params.validate();
    if (n == 0) throw std::invalid_argument("gen_quadratic: n must be >= 1");
    const Matrix factor = covariance_factor(params.sigma);
    const auto rows = static_cast<Eigen::Index>(n);
    const auto p = params.p;

    Rng rng = make_rng(seed, "quadratic");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    GeneratedSample out;
    out.x.resize(rows, p);
    out.z.resize(rows);
    out.y0.resize(rows);
    out.y1.resize(rows);
    Vector e(p);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) e[j] = normal(rng);
        const Vector xi = params.mu + factor * e;
        out.x.row(i) = xi.transpose();
        const double eps0 = normal(rng);
        const double eps1 = normal(rng);
        const double y0 = params.beta.dot(xi) + eps0;
        out.y0[i] = y0;
        out.y1[i] = params.effect_enabled ? y0 * y0 + params.alpha.dot(xi) + eps1 : y0;
        out.z[i] = unif(rng) < expit(params.gamma * xi.sum()) ? 1.0 : 0.0;
    }
    out.enforce_consistency();
    for (Eigen::Index j = 0; j < p; ++j) out.column_names.push_back("x" + std::to_string(j));
    return out;
}

GeneratedSample gen_friedman(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gen_friedman: n must be >= 1");
    constexpr Eigen::Index p = 10;
    const auto rows = static_cast<Eigen::Index>(n);
    const double pi = std::numbers::pi;

    Rng rng = make_rng(seed, "friedman");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    GeneratedSample out;
    out.x.resize(rows, p);
    out.z.resize(rows);
    out.y0.resize(rows);
    out.y1.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) out.x(i, j) = unif(rng);
        const auto x = out.x.row(i);
        const double y0 = 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] +
                          5.0 * x[4] + normal(rng);
        out.y0[i] = y0;
        out.y1[i] = y0 + x[2] * std::cos(pi * x[0] * x[1]);
        out.z[i] = unif(rng) < expit(x[0] + x[1] - 0.5) ? 1.0 : 0.0;
    }
    out.enforce_consistency();
    for (Eigen::Index j = 0; j < p; ++j) out.column_names.push_back("x" + std::to_string(j));
    return out;
}

GeneratedSample generate(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
    if (spec.name == "quadratic") return gen_quadratic(spec.quadratic, n, seed);
    if (spec.name == "friedman") return gen_friedman(n, seed);
    throw std::invalid_argument("unknown DGP: '" + spec.name + "' (expected quadratic or friedman)");
}

OracleAte oracle_ate(const DgpSpec& spec, std::size_t n_mc, std::uint64_t seed) {
    if (spec.name != "quadratic" && spec.name != "friedman")
        throw std::invalid_argument("unknown DGP: '" + spec.name + "'");
    if (n_mc < 10000) throw std::invalid_argument("oracle_ate: n_mc must be >= 10000");
    constexpr std::size_t chunk = 100000;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t done = 0, index = 0;
    while (done < n_mc) {
        const std::size_t m = std::min(chunk, n_mc - done);
        const auto sample = generate(spec, m, derive_seed(seed, "oracle", index++));
        const Vector d = sample.y1 - sample.y0;
        sum += d.sum();
        sum_sq += d.squaredNorm();
        done += m;
    }
    const double n = static_cast<double>(n_mc);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n), n_mc};
}

} // namespace credence::dgp
