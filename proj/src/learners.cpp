#include "credence/learners.hpp"

#include "credence/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace credence::estimators {

Vector LinearModel::predict(const Matrix& x) const {
    if (x.cols() != weights.size()) throw std::invalid_argument("LinearModel::predict: dimension mismatch");
    return (x * weights).array() + intercept;
}

LinearModel fit_ridge(const Matrix& x, const Vector& y, double lambda) {
    if (x.rows() < 1 || y.size() != x.rows()) throw std::invalid_argument("fit_ridge: need n >= 1 matching rows");
    if (!(lambda >= 0.0)) throw std::invalid_argument("fit_ridge: lambda must be >= 0");
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const double y_mean = y.mean();
    LinearModel model;
    if (x.cols() == 0) {
        model.weights = Vector(0);
        model.intercept = y_mean;
        return model;
    }
    const Matrix xc = x.rowwise() - x_mean;
    const Vector yc = y.array() - y_mean;
    Matrix gram = xc.transpose() * xc;
    gram.diagonal().array() += lambda;
    Eigen::LDLT<Matrix> ldlt(gram);
    const Vector d = ldlt.vectorD();
    const double largest = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * largest) {
        throw NumericalError("fit_ridge: singular normal equations (collinear covariates); use lambda > 0");
    }
    model.weights = ldlt.solve(xc.transpose() * yc);
    model.intercept = y_mean - x_mean.dot(model.weights);
    return model;
}

Vector LogisticModel::predict_proba(const Matrix& x) const {
    if (x.cols() != weights.size()) throw std::invalid_argument("LogisticModel::predict_proba: dimension mismatch");
    const Eigen::ArrayXd eta = (x * weights).array() + intercept;
    return (1.0 / (1.0 + (-eta).exp())).matrix();
}

LogisticModel fit_logistic(const Matrix& x, const Vector& z, double lambda) {
    const auto n = x.rows();
    const auto p = x.cols();
    if (n < 1 || z.size() != n) throw std::invalid_argument("fit_logistic: need n >= 1 matching rows");
    if (!(lambda >= 0.0)) throw std::invalid_argument("fit_logistic: lambda must be >= 0");
    const double treated = z.sum();
    if (treated <= 0.0 || treated >= static_cast<double>(n)) throw DataError("fit_logistic: both classes must be present");

    // design with a leading intercept column
    Matrix design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;
    Vector penalty = Vector::Constant(p + 1, lambda);
    penalty[0] = 0.0;

    Vector beta = Vector::Zero(p + 1);
    const double rate = treated / static_cast<double>(n);
    beta[0] = std::log(rate / (1.0 - rate));

    constexpr int max_iterations = 100;
    for (int it = 1; it <= max_iterations; ++it) {
        const Eigen::ArrayXd eta = design * beta;
        const Eigen::ArrayXd prob = 1.0 / (1.0 + (-eta).exp());
        const Eigen::ArrayXd w = (prob * (1.0 - prob)).max(1e-12);
        const Vector grad = design.transpose() * (z.array() - prob).matrix() - penalty.cwiseProduct(beta);
        Matrix hessian = design.transpose() * (design.array().colwise() * w).matrix();
        hessian.diagonal() += penalty;
        const Vector step = hessian.ldlt().solve(grad);
        if (!step.allFinite()) throw NumericalError("fit_logistic: non-finite Newton step at iteration " + std::to_string(it));
        beta += step;
        if (step.cwiseAbs().maxCoeff() < 1e-8) {
            LogisticModel model;
            model.intercept = beta[0];
            model.weights = beta.tail(p);
            model.iterations = it;
            return model;
        }
    }
    throw NumericalError("fit_logistic: no convergence after " + std::to_string(max_iterations) +
                         " iterations (perfect separation?)");
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const auto& node = nodes[static_cast<std::size_t>(at)];
        at = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

Vector GbtModel::predict(const Matrix& x) const {
    Vector out = Vector::Constant(x.rows(), base);
    for (const auto& tree : trees) {
        if (tree.is_trivial() && tree.nodes.front().value == 0.0) continue;
        for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] += learning_rate * tree.predict(x.row(i));
    }
    return out;
}

namespace {

struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<std::vector<int>>& order, const GbtConfig& config)
        : x_(x), order_(order), config_(config), node_of_(static_cast<std::size_t>(x.rows()), 0) {}

    RegressionTree build(const Vector& residual) {
        RegressionTree tree;
        std::fill(node_of_.begin(), node_of_.end(), 0);
        tree.nodes.push_back(TreeNode{});
        grow(tree, 0, residual, 0);
        return tree;
    }

private:
    void grow(RegressionTree& tree, int node, const Vector& residual, int depth) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < node_of_.size(); ++i) {
            if (node_of_[i] != node) continue;
            sum += residual[static_cast<Eigen::Index>(i)];
            ++count;
        }
        tree.nodes[static_cast<std::size_t>(node)].value = count > 0 ? sum / count : 0.0;
        if (depth >= config_.max_depth || count < 2 * config_.min_leaf) return;

        const Split split = best_split(node, residual, sum, count);
        if (split.feature < 0) return;

        const int left = static_cast<int>(tree.nodes.size());
        const int right = left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        auto& parent = tree.nodes[static_cast<std::size_t>(node)];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = left;
        parent.right = right;
        for (std::size_t i = 0; i < node_of_.size(); ++i) {
            if (node_of_[i] != node) continue;
            node_of_[i] = x_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left : right;
        }
        grow(tree, left, residual, depth + 1);
        grow(tree, right, residual, depth + 1);
    }

    Split best_split(int node, const Vector& residual, double total, int count) const {
        Split best;
        const double base = total * total / count;
        for (Eigen::Index f = 0; f < x_.cols(); ++f) {
            double left_sum = 0.0;
            int left_count = 0;
            double prev_value = 0.0;
            bool have_prev = false;
            for (int i : order_[static_cast<std::size_t>(f)]) {
                if (node_of_[static_cast<std::size_t>(i)] != node) continue;
                const double v = x_(i, f);
                if (have_prev && v > prev_value && left_count >= config_.min_leaf &&
                    count - left_count >= config_.min_leaf) {
                    const double right_sum = total - left_sum;
                    const double gain = left_sum * left_sum / left_count +
                                        right_sum * right_sum / (count - left_count) - base;
                    if (gain > best.gain + 1e-12) {
                        best.gain = gain;
                        best.feature = static_cast<int>(f);
                        best.threshold = 0.5 * (prev_value + v);
                    }
                }
                left_sum += residual[i];
                ++left_count;
                prev_value = v;
                have_prev = true;
            }
        }
        return best;
    }

    const Matrix& x_;
    const std::vector<std::vector<int>>& order_;
    const GbtConfig& config_;
    std::vector<int> node_of_;
};

} // namespace

GbtModel fit_gbt(const Matrix& x, const Vector& y, const GbtConfig& config) {
    if (x.rows() < 2 || y.size() != x.rows()) throw std::invalid_argument("fit_gbt: need n >= 2 matching rows");
    if (config.trees < 1 || config.max_depth < 1 || config.min_leaf < 1 || !(config.learning_rate > 0.0))
        throw std::invalid_argument("fit_gbt: invalid configuration");

    std::vector<std::vector<int>> order(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        auto& idx = order[static_cast<std::size_t>(f)];
        idx.resize(static_cast<std::size_t>(x.rows()));
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
    }

    GbtModel model;
    model.base = y.mean();
    model.learning_rate = config.learning_rate;
    Vector fitted = Vector::Constant(y.size(), model.base);
    TreeBuilder builder(x, order, config);
    model.trees.reserve(static_cast<std::size_t>(config.trees));
    for (int t = 0; t < config.trees; ++t) {
        const Vector residual = y - fitted;
        RegressionTree tree = builder.build(residual);
        for (Eigen::Index i = 0; i < x.rows(); ++i) fitted[i] += config.learning_rate * tree.predict(x.row(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

Scaler Scaler::fit(const Matrix& x) {
    Scaler s;
    s.mean = x.colwise().mean().transpose();
    s.scale = Vector::Ones(x.cols());
    const double denom = std::max<double>(1.0, static_cast<double>(x.rows() - 1));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double sd = std::sqrt((x.col(j).array() - s.mean[j]).square().sum() / denom);
        if (sd > 0.0 && std::isfinite(sd)) s.scale[j] = sd;
    }
    return s;
}

Matrix Scaler::apply(const Matrix& x) const {
    if (x.cols() != mean.size()) throw std::invalid_argument("Scaler::apply: dimension mismatch");
    return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

} // namespace credence::estimators
