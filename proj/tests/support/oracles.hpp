#pragma once

// Independent reference computations used by unit and acceptance tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "credence/nnet.hpp"

namespace credence::testing {

inline std::vector<double*> parameters(nnet::Mlp& net) {
    std::vector<double*> out;
    for (auto& l : net.layers) {
        for (Eigen::Index i = 0; i < l.weight.size(); ++i) out.push_back(l.weight.data() + i);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) out.push_back(l.bias.data() + i);
    }
    return out;
}

// Same ordering as `parameters`.
inline Eigen::VectorXd flatten(const nnet::MlpGradient& g) {
    std::vector<double> v;
    for (const auto& l : g.layers) {
        for (Eigen::Index i = 0; i < l.weight.size(); ++i) v.push_back(l.weight.data()[i]);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) v.push_back(l.bias.data()[i]);
    }
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

inline std::vector<double*> entries(Eigen::MatrixXd& m) {
    std::vector<double*> out;
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
    return out;
}

/// Central differences of f with respect to each pointed-to value.
inline Eigen::VectorXd numeric_gradient(const std::function<double()>& f, const std::vector<double*>& at,
                                        double h = 1e-4) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(at.size()));
    for (std::size_t k = 0; k < at.size(); ++k) {
        const double saved = *at[k];
        *at[k] = saved + h;
        const double up = f();
        *at[k] = saved - h;
        const double down = f();
        *at[k] = saved;
        g[static_cast<Eigen::Index>(k)] = (up - down) / (2.0 * h);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max(a.norm(), b.norm());
    return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return {nodes, weights};
}

/// E[X2 cos(pi X0 X1)] for independent U(0,1) covariates:
/// 0.5 * int_0^1 int_0^1 cos(pi u v) du dv by a tensor-product rule.
inline double friedman_effect_quadrature(int points = 64) {
    const auto [nodes, weights] = gauss_legendre(points);
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double u = 0.5 * (nodes[i] + 1.0);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double v = 0.5 * (nodes[j] + 1.0);
            total += 0.25 * weights[i] * weights[j] * std::cos(std::numbers::pi * u * v);
        }
    }
    return 0.5 * total;
}

} // namespace credence::testing
