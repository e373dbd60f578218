// Command-line pipeline: ingest -> split -> train -> evaluate / predict.
#include "odt/csv.hpp"
#include "odt/dataset.hpp"
#include "odt/errors.hpp"
#include "odt/features.hpp"
#include "odt/mdfis.hpp"
#include "odt/metrics.hpp"
#include "odt/network.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDataError = 2;
constexpr int kExitDivergence = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw odt::ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw odt::Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw odt::Error("failed writing '" + path + "'");
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct CorpusArgs {
    std::string formulations;
    std::string apis;

    void attach(CLI::App* cmd) {
        cmd->add_option("--formulations", formulations, "formulations CSV path")
            ->required();
        cmd->add_option("--apis", apis, "API descriptor CSV path")->required();
    }

    odt::Corpus load() const { return odt::load_corpus(formulations, apis); }
};

// Split files store corpus record indices; everything numeric in the library
// runs in labeled-row space. These two maps convert at the CLI boundary.
std::vector<Eigen::Index> to_corpus_indices(const std::vector<Eigen::Index>& rows,
                                            const std::vector<Eigen::Index>& labeled) {
    std::vector<Eigen::Index> out;
    out.reserve(rows.size());
    for (const auto r : rows) out.push_back(labeled[static_cast<std::size_t>(r)]);
    return out;
}

std::vector<Eigen::Index> to_labeled_rows(const std::vector<Eigen::Index>& corpus_indices,
                                          const std::vector<Eigen::Index>& labeled,
                                          const std::string& what) {
    std::map<Eigen::Index, Eigen::Index> position;
    for (std::size_t row = 0; row < labeled.size(); ++row) {
        position[labeled[row]] = static_cast<Eigen::Index>(row);
    }
    std::vector<Eigen::Index> rows;
    rows.reserve(corpus_indices.size());
    for (const auto idx : corpus_indices) {
        const auto it = position.find(idx);
        if (it == position.end()) {
            throw odt::ValidationError(what + ": corpus record " + std::to_string(idx) +
                                       " is not a labeled record");
        }
        rows.push_back(it->second);
    }
    return rows;
}

odt::SplitResult split_to_corpus_space(const odt::SplitResult& rows,
                                       const std::vector<Eigen::Index>& labeled) {
    return {to_corpus_indices(rows.train, labeled), to_corpus_indices(rows.validation, labeled),
            to_corpus_indices(rows.test, labeled)};
}

odt::SplitResult split_to_row_space(const odt::SplitResult& corpus_split,
                                    const std::vector<Eigen::Index>& labeled) {
    return {to_labeled_rows(corpus_split.train, labeled, "split file (train)"),
            to_labeled_rows(corpus_split.validation, labeled, "split file (validation)"),
            to_labeled_rows(corpus_split.test, labeled, "split file (test)")};
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
    return out;
}

int cmd_ingest(const CorpusArgs& paths, bool strict) {
    const odt::Corpus corpus = paths.load();
    const auto labeled = odt::labeled_records(corpus);
    const auto groups = odt::api_groups(corpus);

    std::cout << "records: " << corpus.records.size() << "\n";
    std::cout << "labeled: " << labeled.size() << "\n";
    std::cout << "api groups: " << groups.size() << "\n";
    for (const auto& [api, members] : groups) {
        std::cout << "  " << api << ": " << members.size() << "\n";
    }
    std::cout << "excipient vocabulary:\n";
    for (std::size_t c = 0; c < odt::kCategoryCount; ++c) {
        std::cout << "  " << odt::category_name(static_cast<odt::ExcipientCategory>(c)) << ": "
                  << corpus.excipient_vocab[c].size() << "\n";
    }
    if (corpus.records.empty()) {
        std::cerr << "warning: no records parsed\n";
    }
    if (strict) {
        for (const auto& warning : odt::audit_doses(corpus)) {
            std::cerr << "warning: " << warning << "\n";
        }
    }
    return 0;
}

int cmd_split(const CorpusArgs& paths, const std::string& out_path,
              const std::string& strategy, odt::SplitConfig config,
              const std::string& test_indices_path) {
    const odt::Corpus corpus = paths.load();
    const auto labeled = odt::labeled_records(corpus);

    if (!test_indices_path.empty()) {
        // file of comma/newline separated corpus record indices
        std::vector<Eigen::Index> indices;
        for (const auto& line : odt::csv::split_lines(read_file(test_indices_path))) {
            for (const auto& field : odt::csv::split_line(line)) {
                if (field.empty()) continue;
                indices.push_back(static_cast<Eigen::Index>(
                    odt::csv::parse_double(field, "test index file")));
            }
        }
        config.test_indices = to_labeled_rows(indices, labeled, "--test-indices");
        config.n_test = static_cast<Eigen::Index>(indices.size());
    }

    const auto codec = odt::build_codec(corpus);
    const auto raw = odt::encode_labeled(codec, corpus);
    // distances for splitting use statistics over the whole labeled pool
    const auto norm = odt::fit_normalizer(codec, raw.features);
    const auto dataset = odt::normalize_dataset(norm, raw);

    odt::SplitResult rows;
    if (strategy == "mdfis") {
        rows = odt::split(dataset, odt::api_row_groups(corpus), config);
    } else if (strategy == "maximin") {
        rows = odt::split_maximin(dataset, config);
    } else if (strategy == "random") {
        rows = odt::split_random(dataset.features.rows(), config);
    } else {
        throw odt::ValidationError("unknown strategy '" + strategy + "'");
    }

    write_file(out_path, odt::serialize_split(split_to_corpus_space(rows, labeled)));
    std::cout << "train: " << rows.train.size() << "\n"
              << "validation: " << rows.validation.size() << "\n"
              << "test: " << rows.test.size() << "\n";
    return 0;
}

struct LoadedSplit {
    odt::FeatureCodec codec;
    odt::RawDataset raw;
    odt::SplitResult rows; // labeled-row space
};

LoadedSplit load_split(const odt::Corpus& corpus, const std::string& split_path) {
    LoadedSplit out;
    out.codec = odt::build_codec(corpus);
    out.raw = odt::encode_labeled(out.codec, corpus);
    out.rows = split_to_row_space(odt::parse_split(read_file(split_path)),
                                  odt::labeled_records(corpus));
    odt::check_partition(out.rows, out.raw.features.rows());
    return out;
}

int cmd_train(const CorpusArgs& paths, const std::string& split_path,
              const std::string& preset, Eigen::Index epochs_override, double lr,
              double momentum, std::uint64_t seed, const std::vector<Eigen::Index>& hidden,
              const std::string& model_path, std::string report_path, bool quiet) {
    const odt::Corpus corpus = paths.load();
    const auto loaded = load_split(corpus, split_path);

    odt::NetworkConfig config;
    if (preset == "ann") {
        config = odt::ann_config(loaded.codec.dimension(), seed);
    } else if (preset == "dnn") {
        config = odt::dnn_config(loaded.codec.dimension(), seed);
    } else if (preset == "custom") {
        if (hidden.empty()) {
            throw odt::ValidationError("--preset custom requires --hidden widths");
        }
        config.input_dim = loaded.codec.dimension();
        config.hidden_layers = hidden;
        config.seed = seed;
        config.preset = odt::Preset::Custom;
        config.epochs = 2000;
    } else {
        throw odt::ValidationError("unknown preset '" + preset + "'");
    }
    if (epochs_override >= 0) config.epochs = epochs_override;
    config.learning_rate = lr;
    config.momentum = momentum;

    // model normalizer fits on the training rows only
    const auto norm =
        odt::fit_normalizer(loaded.codec, take_rows(loaded.raw.features, loaded.rows.train));
    auto normalized_targets = [&](const std::vector<Eigen::Index>& rows) {
        Eigen::VectorXd t = take(loaded.raw.targets_sec, rows);
        for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = odt::normalize_target(norm, t[i]);
        return t;
    };
    const Eigen::MatrixXd train_x =
        odt::normalize_matrix(norm, take_rows(loaded.raw.features, loaded.rows.train));
    const Eigen::MatrixXd val_x =
        odt::normalize_matrix(norm, take_rows(loaded.raw.features, loaded.rows.validation));
    const Eigen::VectorXd train_y = normalized_targets(loaded.rows.train);
    const Eigen::VectorXd val_y = normalized_targets(loaded.rows.validation);

    odt::MetricsHook hook;
    if (!quiet && config.epochs > 0) {
        const Eigen::Index step = std::max<Eigen::Index>(1, config.epochs / 10);
        hook = [&, step](Eigen::Index epoch, double train_mse, double val_acc) {
            if (epoch % step == 0 || epoch == config.epochs) {
                std::cerr << "epoch " << epoch << "/" << config.epochs
                          << " train_mse=" << train_mse << " val_acc=" << percent(val_acc)
                          << "%\n";
            }
        };
    }

    const auto [net, report] =
        odt::train(odt::init_network(config), train_x, train_y, val_x, val_y, config, hook);

    odt::Model model{net, config, loaded.codec, norm};
    odt::save_model(model_path, model);

    // per-set evaluation of the selected snapshot
    std::map<std::string, odt::EvaluationResult> results;
    const std::vector<std::pair<std::string, const std::vector<Eigen::Index>*>> sets = {
        {"training", &loaded.rows.train},
        {"validation", &loaded.rows.validation},
        {"testing", &loaded.rows.test}};
    for (const auto& [name, rows] : sets) {
        if (rows->empty()) continue;
        results[name] = odt::evaluate(net, norm, take_rows(loaded.raw.features, *rows),
                                      take(loaded.raw.targets_sec, *rows));
    }

    std::string rep;
    rep += "preset: " + std::string(odt::preset_name(config.preset)) + "\n";
    rep += "hidden_layers:";
    for (const auto w : config.hidden_layers) rep += " " + std::to_string(w);
    rep += "\n";
    rep += "epochs: " + std::to_string(config.epochs) + "\n";
    rep += "learning_rate: " + odt::csv::format_double(config.learning_rate) + "\n";
    rep += "momentum: " + odt::csv::format_double(config.momentum) + "\n";
    rep += "seed: " + std::to_string(config.seed) + "\n";
    rep += "split: train=" + std::to_string(loaded.rows.train.size()) +
           " validation=" + std::to_string(loaded.rows.validation.size()) +
           " test=" + std::to_string(loaded.rows.test.size()) + "\n";
    rep += "best_epoch: " + std::to_string(report.best_epoch) + "\n";
    if (!report.loss_trace.empty()) {
        rep += "final_train_mse: " + odt::csv::format_double(report.loss_trace.back()) + "\n";
    }
    rep += "accuracy_pdt:\n";
    for (const auto& [name, r] : results) {
        rep += "  " + name + ": " + percent(r.accuracy_pdt) + "%\n";
    }
    rep += "mae_sec:\n";
    for (const auto& [name, r] : results) rep += "  " + name + ": " + fixed2(r.mae) + "\n";
    rep += "rmse_sec:\n";
    for (const auto& [name, r] : results) rep += "  " + name + ": " + fixed2(r.rmse) + "\n";

    if (report_path.empty()) report_path = model_path + ".report.txt";
    write_file(report_path, rep);

    std::cout << rep;
    std::cerr << "wall_time_sec: " << report.wall_time_sec << "\n";
    return 0;
}

int cmd_evaluate(const CorpusArgs& paths, const std::string& split_path,
                 const std::string& model_path, const std::string& out_csv) {
    const odt::Corpus corpus = paths.load();
    const odt::Model model = odt::load_model(model_path);

    const auto corpus_codec = odt::build_codec(corpus);
    if (corpus_codec.feature_names != model.codec.feature_names) {
        throw odt::ValidationError(
            "codec mismatch: the model was trained with a different feature layout than this "
            "corpus produces");
    }

    const auto labeled = odt::labeled_records(corpus);
    const auto raw = odt::encode_labeled(model.codec, corpus);
    const auto rows = split_to_row_space(odt::parse_split(read_file(split_path)), labeled);
    odt::check_partition(rows, raw.features.rows());

    std::string csv = "set,row_index,label_sec,prediction_sec,abs_error_sec,hit\n";
    const std::vector<std::pair<std::string, const std::vector<Eigen::Index>*>> sets = {
        {"training", &rows.train}, {"validation", &rows.validation}, {"testing", &rows.test}};
    for (const auto& [name, set_rows] : sets) {
        if (set_rows->empty()) {
            throw odt::ValidationError("evaluate: the " + name + " set is empty");
        }
        const auto result =
            odt::evaluate(model.network, model.normalizer, take_rows(raw.features, *set_rows),
                          take(raw.targets_sec, *set_rows));
        for (std::size_t i = 0; i < result.samples.size(); ++i) {
            const auto& s = result.samples[i];
            csv += name + "," +
                   std::to_string(labeled[static_cast<std::size_t>((*set_rows)[i])]) + "," +
                   odt::csv::format_double(s.label_sec) + "," +
                   odt::csv::format_double(s.prediction_sec) + "," +
                   odt::csv::format_double(s.abs_error_sec) + "," + (s.hit ? "1" : "0") + "\n";
        }
        std::cout << name << ": accuracy_pdt=" << percent(result.accuracy_pdt)
                  << "% mae=" << fixed2(result.mae) << "s rmse=" << fixed2(result.rmse)
                  << "s n=" << result.n << "\n";
    }
    write_file(out_csv, csv);
    return 0;
}

int cmd_predict(const std::string& input_path, const std::string& apis_path,
                const std::string& model_path) {
    const odt::Model model = odt::load_model(model_path);

    // accept the full schema with or without the trailing label column
    std::string text = read_file(input_path);
    auto lines = odt::csv::split_lines(text);
    if (lines.empty()) throw odt::ParseError("prediction input is empty");
    if (odt::csv::split_line(lines[0]).back() != "disintegration_time_sec") {
        std::string padded = lines[0] + ",disintegration_time_sec\n";
        for (std::size_t i = 1; i < lines.size(); ++i) padded += lines[i] + ",\n";
        text = std::move(padded);
    }

    const odt::Corpus corpus = odt::parse_corpus(text, read_file(apis_path));
    if (corpus.records.empty()) throw odt::ValidationError("prediction input has no rows");

    for (const auto& rec : corpus.records) {
        Eigen::VectorXd x;
        try {
            x = odt::encode(model.codec, corpus.api(rec.api_name), rec);
        } catch (const odt::ValidationError& e) {
            throw odt::ValidationError(std::string("codec mismatch: ") + e.what());
        }
        std::cout << odt::csv::format_double(odt::predict(model.network, model.normalizer, x))
                  << "\n";
    }
    return 0;
}

int cmd_codec_dump(const CorpusArgs& paths) {
    const auto codec = odt::build_codec(paths.load());
    for (const auto& name : codec.feature_names) std::cout << name << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disintegration-time prediction pipeline for direct-compression ODT "
                 "formulations"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; flags override");

    CorpusArgs ingest_paths;
    bool strict = false;
    auto* ingest = app.add_subcommand("ingest", "parse and validate a formulation corpus");
    ingest_paths.attach(ingest);
    ingest->add_flag("--strict", strict, "warn on doses above 10x the within-API median");

    CorpusArgs split_paths;
    std::string split_out;
    std::string strategy = "mdfis";
    std::string test_indices_path;
    odt::SplitConfig split_config;
    auto* split = app.add_subcommand("split", "write a train/validation/test split file");
    split_paths.attach(split);
    split->add_option("--out", split_out, "split file to write")->required();
    split->add_option("--strategy", strategy, "mdfis|maximin|random")
        ->check(CLI::IsMember({"mdfis", "maximin", "random"}));
    split->add_option("--n-validation", split_config.n_validation, "validation set size");
    split->add_option("--n-test", split_config.n_test, "test set size");
    split->add_option("--small-group-threshold", split_config.small_group_threshold,
                      "API groups below this size are barred from validation");
    split->add_option("--n-initial", split_config.n_initial,
                      "random candidates for the representative initial row");
    split->add_option("--seed", split_config.seed, "random seed");
    split->add_option("--test-indices", test_indices_path,
                      "file of corpus record indices to use as the test set");

    CorpusArgs train_paths;
    std::string train_split, train_preset = "dnn", train_model, train_report;
    Eigen::Index train_epochs = -1;
    double train_lr = 0.01, train_momentum = 0.8;
    std::uint64_t train_seed = 42;
    std::vector<Eigen::Index> train_hidden;
    bool train_quiet = false;
    auto* train = app.add_subcommand("train", "train a network on an existing split");
    train_paths.attach(train);
    train->add_option("--split", train_split, "split file")->required();
    train->add_option("--preset", train_preset, "ann|dnn|custom")
        ->check(CLI::IsMember({"ann", "dnn", "custom"}));
    train->add_option("--epochs", train_epochs, "override the preset epoch count");
    train->add_option("--lr", train_lr, "learning rate");
    train->add_option("--momentum", train_momentum, "momentum coefficient");
    train->add_option("--seed", train_seed, "weight init seed");
    train->add_option("--hidden", train_hidden, "hidden layer widths for --preset custom");
    train->add_option("--out", train_model, "model file to write")->required();
    train->add_option("--report", train_report, "report path (default: <model>.report.txt)");
    train->add_flag("--quiet", train_quiet, "suppress progress output");

    CorpusArgs eval_paths;
    std::string eval_split, eval_model, eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "score a model on every split set");
    eval_paths.attach(evaluate);
    evaluate->add_option("--split", eval_split, "split file")->required();
    evaluate->add_option("--model", eval_model, "model file")->required();
    evaluate->add_option("--out", eval_out, "per-sample CSV to write")->required();

    std::string predict_input, predict_apis, predict_model;
    auto* predict = app.add_subcommand("predict", "predict disintegration times for new rows");
    predict->add_option("--input", predict_input, "formulation rows (label column optional)")
        ->required();
    predict->add_option("--apis", predict_apis, "API descriptor CSV path")->required();
    predict->add_option("--model", predict_model, "model file")->required();

    CorpusArgs codec_paths;
    auto* codec = app.add_subcommand("codec", "feature codec utilities");
    auto* codec_dump = codec->add_subcommand("dump", "print the feature name list");
    codec_paths.attach(codec_dump);
    codec->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(ingest_paths, strict);
        if (*split) {
            return cmd_split(split_paths, split_out, strategy, split_config, test_indices_path);
        }
        if (*train) {
            return cmd_train(train_paths, train_split, train_preset, train_epochs, train_lr,
                             train_momentum, train_seed, train_hidden, train_model, train_report,
                             train_quiet);
        }
        if (*evaluate) return cmd_evaluate(eval_paths, eval_split, eval_model, eval_out);
        if (*predict) return cmd_predict(predict_input, predict_apis, predict_model);
        if (*codec) return cmd_codec_dump(codec_paths);
    } catch (const odt::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const odt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
