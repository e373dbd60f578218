#include "odt/network.hpp"

#include "odt/csv.hpp"
#include "odt/errors.hpp"
#include "odt/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace odt {

namespace {

// Keeps sigmoid outputs strictly inside (0,1) even for saturated inputs.
constexpr double kSigmoidMargin = 1e-12;

double sigmoid(double z) {
    const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                              : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(s, kSigmoidMargin, 1.0 - kSigmoidMargin);
}

// 53-bit uniform in [0,1) from the engine's specified output stream; avoids
// distribution objects whose algorithms differ between standard libraries.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_shapes(const Network& net, const Gradients& grads) {
    if (grads.weight.size() != net.layers.size() || grads.bias.size() != net.layers.size()) {
        throw ValidationError("gradient layer count does not match the network");
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (grads.weight[l].rows() != net.layers[l].weight.rows() ||
            grads.weight[l].cols() != net.layers[l].weight.cols() ||
            grads.bias[l].size() != net.layers[l].bias.size()) {
            throw ValidationError("gradient shapes do not match layer " + std::to_string(l));
        }
    }
}

void validate_network_config(const NetworkConfig& config) {
    if (config.input_dim < 1) throw ValidationError("network input dimension must be positive");
    if (config.learning_rate <= 0) throw ValidationError("learning rate must be positive");
    if (config.momentum < 0 || config.momentum >= 1) {
        throw ValidationError("momentum must lie in [0,1)");
    }
    if (config.epochs < 0) throw ValidationError("epoch count must be non-negative");
    for (const auto w : config.hidden_layers) {
        if (w < 1) throw ValidationError("every hidden layer width must be at least 1");
    }
}

} // namespace

std::string_view preset_name(Preset preset) {
    switch (preset) {
        case Preset::Ann: return "ann";
        case Preset::Dnn: return "dnn";
        case Preset::Custom: return "custom";
    }
    return "?";
}

NetworkConfig ann_config(Eigen::Index input_dim, std::uint64_t seed) {
    NetworkConfig c;
    c.input_dim = input_dim;
    c.hidden_layers = {200};
    c.epochs = 15000;
    c.seed = seed;
    c.preset = Preset::Ann;
    return c;
}

NetworkConfig dnn_config(Eigen::Index input_dim, std::uint64_t seed) {
    NetworkConfig c;
    c.input_dim = input_dim;
    c.hidden_layers.assign(10, 50);
    c.epochs = 2000;
    c.seed = seed;
    c.preset = Preset::Dnn;
    return c;
}

Eigen::Index Network::input_dim() const {
    return layers.empty() ? 0 : layers.front().weight.cols();
}

Network init_network(const NetworkConfig& config) {
    validate_network_config(config);

    std::vector<Eigen::Index> widths;
    widths.push_back(config.input_dim);
    widths.insert(widths.end(), config.hidden_layers.begin(), config.hidden_layers.end());
    widths.push_back(1);

    std::mt19937_64 rng(config.seed);
    Network net;
    net.layers.resize(widths.size() - 1);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Eigen::Index fan_in = widths[l];
        const Eigen::Index fan_out = widths[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));

        auto& layer = net.layers[l];
        layer.weight.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) {
                layer.weight(r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
            }
        }
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        layer.weight_velocity = Eigen::MatrixXd::Zero(fan_out, fan_in);
        layer.bias_velocity = Eigen::VectorXd::Zero(fan_out);
    }
    return net;
}

Eigen::VectorXd forward_batch(const Network& net, const Eigen::MatrixXd& inputs,
                              ForwardCache* cache) {
    if (net.layers.empty()) throw ValidationError("network has no layers");
    if (inputs.cols() != net.input_dim()) {
        throw ValidationError("input width " + std::to_string(inputs.cols()) +
                              " does not match the network input dimension " +
                              std::to_string(net.input_dim()));
    }
    if (!inputs.allFinite()) throw ValidationError("non-finite network input");

    if (cache) {
        cache->activations.clear();
        cache->activations.push_back(inputs);
    }

    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        Eigen::MatrixXd z = a * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        if (l + 1 < net.layers.size()) {
            a = z.array().tanh();
        } else {
            a = z.unaryExpr([](double v) { return sigmoid(v); });
        }
        if (cache) cache->activations.push_back(a);
    }
    return a.col(0);
}

double forward(const Network& net, Eigen::Ref<const Eigen::VectorXd> input) {
    return forward_batch(net, input.transpose())[0];
}

double mse_loss(Eigen::Ref<const Eigen::VectorXd> predictions,
                Eigen::Ref<const Eigen::VectorXd> targets) {
    if (predictions.size() != targets.size()) {
        throw ValidationError("prediction/target length mismatch (" +
                              std::to_string(predictions.size()) + " vs " +
                              std::to_string(targets.size()) + ")");
    }
    if (predictions.size() == 0) throw ValidationError("mse_loss over empty vectors");
    return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

Gradients backward(const Network& net, const ForwardCache& cache,
                   Eigen::Ref<const Eigen::VectorXd> targets) {
    const std::size_t layer_count = net.layers.size();
    if (cache.activations.size() != layer_count + 1) {
        throw ValidationError("forward cache does not match the network depth");
    }
    const Eigen::Index n = cache.activations[0].rows();
    if (targets.size() != n) {
        throw ValidationError("target count does not match the cached batch size");
    }

    Gradients grads;
    grads.weight.resize(layer_count);
    grads.bias.resize(layer_count);

    // d(mse)/d(pred) = 2*(pred - target)/n, then through sigmoid'
    const auto& output = cache.activations.back();
    Eigen::MatrixXd delta = (2.0 / static_cast<double>(n)) * (output.col(0) - targets);
    delta.array() *= output.array() * (1.0 - output.array());

    for (std::size_t l = layer_count; l-- > 0;) {
        const auto& below = cache.activations[l];
        grads.weight[l] = delta.transpose() * below;
        grads.bias[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = delta * net.layers[l].weight;                      // N x fan_in(l)
            delta.array() *= 1.0 - cache.activations[l].array().square(); // tanh'
        }
    }
    return grads;
}

void momentum_step(Network& net, const Gradients& grads, double learning_rate,
                   double momentum) {
    check_shapes(net, grads);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        layer.weight_velocity = momentum * layer.weight_velocity - learning_rate * grads.weight[l];
        layer.weight += layer.weight_velocity;
        layer.bias_velocity = momentum * layer.bias_velocity - learning_rate * grads.bias[l];
        layer.bias += layer.bias_velocity;
    }
}

std::pair<Network, TrainingReport> train(const Network& initial,
                                         const Eigen::MatrixXd& train_features,
                                         const Eigen::VectorXd& train_targets,
                                         const Eigen::MatrixXd& val_features,
                                         const Eigen::VectorXd& val_targets,
                                         const NetworkConfig& config, const MetricsHook& hook) {
    if (train_features.rows() == 0 || val_features.rows() == 0) {
        throw ValidationError("training and validation sets must be nonempty");
    }
    if (train_features.rows() != train_targets.size() ||
        val_features.rows() != val_targets.size()) {
        throw ValidationError("feature/target row counts do not match");
    }

    const auto started = std::chrono::steady_clock::now();

    Network net = initial;
    Network best = net;
    TrainingReport report;
    report.config = config;
    report.loss_trace.reserve(static_cast<std::size_t>(config.epochs));

    const Eigen::VectorXd val_labels_sec = val_targets * kTargetMaxSeconds;
    bool have_best = false;

    for (Eigen::Index epoch = 1; epoch <= config.epochs; ++epoch) {
        ForwardCache cache;
        const Eigen::VectorXd predictions = forward_batch(net, train_features, &cache);
        const double train_mse = mse_loss(predictions, train_targets);
        if (!std::isfinite(train_mse)) {
            throw DivergenceError("training loss became non-finite at epoch " +
                                  std::to_string(epoch));
        }
        report.loss_trace.push_back(train_mse);

        const Gradients grads = backward(net, cache, train_targets);
        momentum_step(net, grads, config.learning_rate, config.momentum);

        const Eigen::VectorXd val_pred = forward_batch(net, val_features);
        const double val_acc = accuracy_pdt(val_pred * kTargetMaxSeconds, val_labels_sec);
        const double val_mse = mse_loss(val_pred, val_targets);

        const bool better =
            !have_best || val_acc > report.best_validation_accuracy ||
            (val_acc == report.best_validation_accuracy && val_mse < report.best_validation_mse);
        if (better) {
            best = net;
            report.best_epoch = epoch;
            report.best_validation_accuracy = val_acc;
            report.best_validation_mse = val_mse;
            have_best = true;
        }
        if (hook) hook(epoch, train_mse, val_acc);
    }

    if (!have_best) { // epochs == 0: the initial network is the result
        best = net;
        const Eigen::VectorXd val_pred = forward_batch(net, val_features);
        report.best_validation_accuracy = accuracy_pdt(val_pred * kTargetMaxSeconds, val_labels_sec);
        report.best_validation_mse = mse_loss(val_pred, val_targets);
    }

    report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(best), std::move(report)};
}

double predict(const Network& net, const Normalizer& norm,
               Eigen::Ref<const Eigen::VectorXd> raw_features) {
    return denormalize_target(norm, forward(net, normalize(norm, raw_features)));
}

Eigen::VectorXd predict_batch(const Network& net, const Normalizer& norm,
                              const Eigen::MatrixXd& raw_features) {
    const Eigen::VectorXd out =
        forward_batch(net, normalize_matrix(norm, raw_features)) * norm.target_max;
    return out;
}

// --- model container ---------------------------------------------------

namespace {

constexpr std::string_view kModelMagic = "ODTNET1";

std::string format_matrix_row(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::string out;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c > 0) out += ' ';
        out += csv::format_double(m(r, c));
    }
    return out;
}

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::string_view next(const std::string& expectation) {
        while (pos_ < text_.size()) {
            std::size_t nl = text_.find('\n', pos_);
            if (nl == std::string_view::npos) nl = text_.size();
            std::string_view line = text_.substr(pos_, nl - pos_);
            pos_ = nl + 1;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty()) return line;
        }
        throw ParseError("model file ended early; expected " + expectation);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> parts;
    std::size_t p = 0;
    while (p < line.size()) {
        while (p < line.size() && line[p] == ' ') ++p;
        std::size_t q = p;
        while (q < line.size() && line[q] != ' ') ++q;
        if (q > p) parts.push_back(line.substr(p, q - p));
        p = q;
    }
    return parts;
}

std::string_view expect_key(LineReader& reader, std::string_view key) {
    const std::string_view line = reader.next(std::string(key));
    if (line.substr(0, key.size()) != key) {
        throw ParseError("model file: expected '" + std::string(key) + "', found '" +
                         std::string(line) + "'");
    }
    std::string_view rest = line.substr(key.size());
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    return rest;
}

} // namespace

std::string serialize_model(const Model& model) {
    std::string out(kModelMagic);
    out += '\n';
    out += "preset " + std::string(preset_name(model.config.preset)) + "\n";
    out += "input_dim " + std::to_string(model.config.input_dim) + "\n";
    out += "hidden_layers";
    for (const auto w : model.config.hidden_layers) out += ' ' + std::to_string(w);
    out += '\n';
    out += "learning_rate " + csv::format_double(model.config.learning_rate) + "\n";
    out += "momentum " + csv::format_double(model.config.momentum) + "\n";
    out += "epochs " + std::to_string(model.config.epochs) + "\n";
    out += "seed " + std::to_string(model.config.seed) + "\n";

    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const auto& vocab = model.codec.excipient_vocab[c];
        out += "vocab " + std::string(category_name(static_cast<ExcipientCategory>(c))) + " " +
               std::to_string(vocab.size()) + "\n";
        for (const auto& name : vocab) out += name + "\n";
    }

    out += "normalizer " + std::to_string(model.normalizer.dimension()) + "\n";
    out += serialize_normalizer(model.normalizer);

    out += "layers " + std::to_string(model.network.layers.size()) + "\n";
    for (const auto& layer : model.network.layers) {
        out += "layer " + std::to_string(layer.weight.rows()) + " " +
               std::to_string(layer.weight.cols()) + "\n";
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            out += format_matrix_row(layer.weight, r) + "\n";
        }
        out += format_matrix_row(layer.bias.transpose(), 0) + "\n";
    }
    return out;
}

Model parse_model(std::string_view text) {
    LineReader reader(text);
    if (reader.next("magic header") != kModelMagic) {
        throw ParseError("not an " + std::string(kModelMagic) + " model file");
    }

    Model model;
    const std::string_view preset = expect_key(reader, "preset");
    if (preset == "ann") model.config.preset = Preset::Ann;
    else if (preset == "dnn") model.config.preset = Preset::Dnn;
    else if (preset == "custom") model.config.preset = Preset::Custom;
    else throw ParseError("model file: unknown preset '" + std::string(preset) + "'");

    model.config.input_dim =
        static_cast<Eigen::Index>(csv::parse_double(expect_key(reader, "input_dim"), "input_dim"));
    for (const auto part : split_ws(expect_key(reader, "hidden_layers"))) {
        model.config.hidden_layers.push_back(
            static_cast<Eigen::Index>(csv::parse_double(part, "hidden layer width")));
    }
    model.config.learning_rate =
        csv::parse_double(expect_key(reader, "learning_rate"), "learning_rate");
    model.config.momentum = csv::parse_double(expect_key(reader, "momentum"), "momentum");
    model.config.epochs =
        static_cast<Eigen::Index>(csv::parse_double(expect_key(reader, "epochs"), "epochs"));
    model.config.seed = static_cast<std::uint64_t>(
        csv::parse_double(expect_key(reader, "seed"), "seed"));

    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const auto header = split_ws(expect_key(reader, "vocab"));
        if (header.size() != 2 ||
            header[0] != category_name(static_cast<ExcipientCategory>(c))) {
            throw ParseError("model file: malformed vocab header");
        }
        const auto count = static_cast<std::size_t>(
            csv::parse_double(header[1], "vocab size"));
        for (std::size_t i = 0; i < count; ++i) {
            model.codec.excipient_vocab[c].emplace_back(reader.next("vocabulary name"));
        }
    }

    const auto norm_dim = static_cast<Eigen::Index>(
        csv::parse_double(expect_key(reader, "normalizer"), "normalizer dimension"));
    std::string norm_text;
    for (Eigen::Index i = 0; i < norm_dim + 1; ++i) { // + target_max line
        norm_text += std::string(reader.next("normalizer line")) + "\n";
    }
    model.normalizer = parse_normalizer(norm_text);
    if (model.normalizer.dimension() != norm_dim) {
        throw ParseError("model file: normalizer dimension mismatch");
    }
    model.codec.feature_names = model.normalizer.feature_names;

    const auto layer_count = static_cast<std::size_t>(
        csv::parse_double(expect_key(reader, "layers"), "layer count"));
    for (std::size_t l = 0; l < layer_count; ++l) {
        const auto shape = split_ws(expect_key(reader, "layer"));
        if (shape.size() != 2) throw ParseError("model file: malformed layer header");
        const auto rows = static_cast<Eigen::Index>(csv::parse_double(shape[0], "layer rows"));
        const auto cols = static_cast<Eigen::Index>(csv::parse_double(shape[1], "layer cols"));

        Layer layer;
        layer.weight.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto values = split_ws(reader.next("weight row"));
            if (static_cast<Eigen::Index>(values.size()) != cols) {
                throw ParseError("model file: weight row width mismatch");
            }
            for (Eigen::Index c2 = 0; c2 < cols; ++c2) {
                layer.weight(r, c2) = csv::parse_double(values[static_cast<std::size_t>(c2)],
                                                        "weight value");
            }
        }
        const auto bias = split_ws(reader.next("bias row"));
        if (static_cast<Eigen::Index>(bias.size()) != rows) {
            throw ParseError("model file: bias width mismatch");
        }
        layer.bias.resize(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            layer.bias[r] = csv::parse_double(bias[static_cast<std::size_t>(r)], "bias value");
        }
        layer.weight_velocity = Eigen::MatrixXd::Zero(rows, cols);
        layer.bias_velocity = Eigen::VectorXd::Zero(rows);
        model.network.layers.push_back(std::move(layer));
    }

    if (model.network.layers.empty() ||
        model.network.input_dim() != model.config.input_dim ||
        model.network.layers.back().weight.rows() != 1) {
        throw ParseError("model file: layer shapes are inconsistent with the config echo");
    }
    return model;
}

void save_model(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << serialize_model(model);
    if (!out) throw Error("failed writing '" + path + "'");
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

} // namespace odt
