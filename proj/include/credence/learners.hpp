#pragma once

#include <functional>
#include <vector>

#include "credence/tabular.hpp"

namespace credence::estimators {

struct LinearModel {
    Vector weights;
    double intercept = 0.0;

    Vector predict(const Matrix& x) const;
};

/// Minimizes ||y - Xw - b||^2 + lambda ||w||^2 with an unpenalized intercept.
/// Throws NumericalError when lambda == 0 and X'X (centered) is singular.
LinearModel fit_ridge(const Matrix& x, const Vector& y, double lambda);

struct LogisticModel {
    Vector weights;
    double intercept = 0.0;
    int iterations = 0;

    Vector predict_proba(const Matrix& x) const;
};

/// L2-penalized logistic regression by iteratively reweighted least squares.
/// Converged when the largest coefficient change is below 1e-8; throws
/// NumericalError after 100 iterations (usually perfect separation).
LogisticModel fit_logistic(const Matrix& x, const Vector& z, double lambda);

struct GbtConfig {
    int trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_leaf = 5;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    bool is_trivial() const { return nodes.size() <= 1; }
};

struct GbtModel {
    double base = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;

    Vector predict(const Matrix& x) const;
};

/// Least-squares gradient boosting with depth-limited trees grown greedily on
/// variance reduction. Deterministic: no row or feature subsampling.
GbtModel fit_gbt(const Matrix& x, const Vector& y, const GbtConfig& config);

/// Column centering and scaling fitted on training data. Constant columns
/// are left unscaled.
struct Scaler {
    Vector mean;
    Vector scale;

    static Scaler fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
};

} // namespace credence::estimators
