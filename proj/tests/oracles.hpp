#pragma once

// Reference implementations the unit and acceptance suites check the library
// against. Everything here is scalar loops on std::vector, independent of the
// Eigen code paths under test.

#include "odt/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline double sigmoid(double z) {
    const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                              : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(s, 1e-12, 1.0 - 1e-12);
}

// Scalar-loop forward pass over one sample.
inline double naive_forward(const odt::Network& net, const std::vector<double>& x) {
    std::vector<double> a = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        std::vector<double> next(static_cast<std::size_t>(layer.weight.rows()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            double z = layer.bias[r];
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                z += layer.weight(r, c) * a[static_cast<std::size_t>(c)];
            }
            next[static_cast<std::size_t>(r)] =
                (l + 1 < net.layers.size()) ? std::tanh(z) : sigmoid(z);
        }
        a = std::move(next);
    }
    return a[0];
}

inline double naive_mse(const std::vector<double>& predictions,
                        const std::vector<double>& targets) {
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

inline double naive_batch_loss(const odt::Network& net,
                               const std::vector<std::vector<double>>& inputs,
                               const std::vector<double>& targets) {
    std::vector<double> predictions;
    predictions.reserve(inputs.size());
    for (const auto& x : inputs) predictions.push_back(naive_forward(net, x));
    return naive_mse(predictions, targets);
}

// Central finite differences of the batch loss with respect to every
// parameter, evaluated through the naive forward pass.
inline odt::Gradients fd_gradients(odt::Network net,
                                   const std::vector<std::vector<double>>& inputs,
                                   const std::vector<double>& targets, double h = 1e-5) {
    odt::Gradients grads;
    grads.weight.resize(net.layers.size());
    grads.bias.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        grads.weight[l].resize(layer.weight.rows(), layer.weight.cols());
        grads.bias[l].resize(layer.bias.size());
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                const double original = layer.weight(r, c);
                layer.weight(r, c) = original + h;
                const double up = naive_batch_loss(net, inputs, targets);
                layer.weight(r, c) = original - h;
                const double down = naive_batch_loss(net, inputs, targets);
                layer.weight(r, c) = original;
                grads.weight[l](r, c) = (up - down) / (2.0 * h);
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            const double original = layer.bias[r];
            layer.bias[r] = original + h;
            const double up = naive_batch_loss(net, inputs, targets);
            layer.bias[r] = original - h;
            const double down = naive_batch_loss(net, inputs, targets);
            layer.bias[r] = original;
            grads.bias[l][r] = (up - down) / (2.0 * h);
        }
    }
    return grads;
}

// True if every component matches within relative 1e-4 (absolute floor 1e-8).
inline bool gradients_match(const odt::Gradients& analytic, const odt::Gradients& reference,
                            double rel_tol = 1e-4, double abs_floor = 1e-8) {
    for (std::size_t l = 0; l < analytic.weight.size(); ++l) {
        auto check = [&](double a, double b) {
            const double diff = std::abs(a - b);
            if (diff <= abs_floor) return true;
            return diff / std::max(std::abs(a), std::abs(b)) < rel_tol;
        };
        for (Eigen::Index r = 0; r < analytic.weight[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < analytic.weight[l].cols(); ++c) {
                if (!check(analytic.weight[l](r, c), reference.weight[l](r, c))) return false;
            }
        }
        for (Eigen::Index r = 0; r < analytic.bias[l].size(); ++r) {
            if (!check(analytic.bias[l][r], reference.bias[l][r])) return false;
        }
    }
    return true;
}

inline double naive_distance(const Eigen::MatrixXd& features, Eigen::Index a, Eigen::Index b) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        const double d = features(a, j) - features(b, j);
        sum += d * d;
    }
    return std::sqrt(sum);
}

// Step-enumerated greedy maximin: every step scans all remaining candidates,
// scores each by its minimum distance to the selected set, and takes the
// best (lowest row index on ties).
inline std::vector<Eigen::Index> brute_maximin(const Eigen::MatrixXd& features,
                                               std::vector<Eigen::Index> pool,
                                               std::vector<Eigen::Index> selected,
                                               Eigen::Index k) {
    std::sort(pool.begin(), pool.end());
    std::vector<Eigen::Index> picks;
    for (Eigen::Index step = 0; step < k; ++step) {
        Eigen::Index best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (const auto candidate : pool) {
            double score = std::numeric_limits<double>::infinity();
            for (const auto s : selected) {
                score = std::min(score, naive_distance(features, candidate, s));
            }
            if (score > best_score) {
                best_score = score;
                best = candidate;
            }
        }
        picks.push_back(best);
        selected.push_back(best);
        pool.erase(std::find(pool.begin(), pool.end(), best));
    }
    return picks;
}

inline double naive_accuracy(const std::vector<double>& predictions,
                             const std::vector<double>& labels, double tolerance) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (std::abs(predictions[i] - labels[i]) <= tolerance) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

} // namespace oracle
