#pragma once

#include "odt/features.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace odt {

enum class Preset { Ann, Dnn, Custom };

std::string_view preset_name(Preset preset);

/// Fully-connected regression net: tanh hidden layers, sigmoid output,
/// full-batch gradient descent with momentum.
struct NetworkConfig {
    Eigen::Index input_dim = 0;
    std::vector<Eigen::Index> hidden_layers;
    double learning_rate = 0.01;
    double momentum = 0.8;
    Eigen::Index epochs = 0;
    std::uint64_t seed = 42;
    Preset preset = Preset::Custom;
};

/// Shallow preset: one hidden layer of 200 nodes, 15000 epochs.
NetworkConfig ann_config(Eigen::Index input_dim, std::uint64_t seed);

/// Deep preset: ten hidden layers of 50 nodes, 2000 epochs.
NetworkConfig dnn_config(Eigen::Index input_dim, std::uint64_t seed);

struct Layer {
    Eigen::MatrixXd weight;          // fan_out x fan_in
    Eigen::VectorXd bias;            // fan_out
    Eigen::MatrixXd weight_velocity; // momentum buffers, same shapes
    Eigen::VectorXd bias_velocity;
};

struct Network {
    std::vector<Layer> layers; // last layer is the sigmoid output, width 1

    Eigen::Index input_dim() const;
};

/// Seeded uniform Glorot-style init U(+-sqrt(6/(fan_in+fan_out))), biases and
/// velocities zero. Bit-identical for equal configs.
Network init_network(const NetworkConfig& config);

/// Per-layer activations of a forward pass; activations[0] is the input
/// batch, activations.back() the predictions column.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations;
};

/// Batched forward pass, one row per sample. Predictions are strictly inside
/// (0,1). Throws ValidationError on dimension mismatch or non-finite input.
Eigen::VectorXd forward_batch(const Network& net, const Eigen::MatrixXd& inputs,
                              ForwardCache* cache = nullptr);

double forward(const Network& net, Eigen::Ref<const Eigen::VectorXd> input);

double mse_loss(Eigen::Ref<const Eigen::VectorXd> predictions,
                Eigen::Ref<const Eigen::VectorXd> targets);

struct Gradients {
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::VectorXd> bias;
};

/// Analytic gradients of mse_loss over the cached batch with respect to every
/// weight and bias.
Gradients backward(const Network& net, const ForwardCache& cache,
                   Eigen::Ref<const Eigen::VectorXd> targets);

/// v <- momentum*v - lr*g; theta <- theta + v, for every parameter.
void momentum_step(Network& net, const Gradients& grads, double learning_rate,
                   double momentum);

struct TrainingReport {
    std::vector<double> loss_trace; // per-epoch training MSE, length == epochs
    Eigen::Index best_epoch = 0;
    double best_validation_accuracy = 0.0;
    double best_validation_mse = 0.0;
    double wall_time_sec = 0.0;
    NetworkConfig config;
};

using MetricsHook = std::function<void(Eigen::Index epoch, double train_mse,
                                       double validation_accuracy)>;

/// Full-batch training loop. After each epoch the validation accuracy (+-10 s
/// on the fixed 0..100 s scale) is evaluated and the best-scoring parameters
/// are snapshotted (ties: lower validation MSE, then earlier epoch). Returns
/// the snapshot and the report. Throws DivergenceError if the loss goes
/// non-finite, naming the epoch.
std::pair<Network, TrainingReport> train(const Network& initial,
                                         const Eigen::MatrixXd& train_features,
                                         const Eigen::VectorXd& train_targets,
                                         const Eigen::MatrixXd& val_features,
                                         const Eigen::VectorXd& val_targets,
                                         const NetworkConfig& config,
                                         const MetricsHook& hook = {});

/// normalize -> forward -> denormalize; returns seconds in [0, 100].
double predict(const Network& net, const Normalizer& norm,
               Eigen::Ref<const Eigen::VectorXd> raw_features);

Eigen::VectorXd predict_batch(const Network& net, const Normalizer& norm,
                              const Eigen::MatrixXd& raw_features);

/// Everything needed to score new formulations.
struct Model {
    Network network;
    NetworkConfig config;
    FeatureCodec codec;
    Normalizer normalizer;
};

// "ODTNET1" text container: config echo, codec vocabulary, normalizer table,
// per-layer shapes and row-major parameters. Exact double round-trip.
std::string serialize_model(const Model& model);
Model parse_model(std::string_view text);
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

} // namespace odt
