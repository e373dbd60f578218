// Acceptance suite: runs every release criterion and prints one line per
// criterion. Exit status is the number of failed criteria.

#include "odt/csv.hpp"
#include "odt/dataset.hpp"
#include "odt/features.hpp"
#include "odt/mdfis.hpp"
#include "odt/metrics.hpp"
#include "odt/network.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kData = ODT_DATA_DIR;
const std::string kCli = ODT_CLI_PATH;

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

odt::Corpus bundled_corpus() {
    return odt::load_corpus(kData + "/odt_table1.csv", kData + "/odt_apis.csv");
}

struct BundledData {
    odt::Corpus corpus;
    odt::FeatureCodec codec;
    odt::RawDataset raw;
    odt::EncodedDataset dataset; // normalized over the whole labeled pool
    odt::RowGroups groups;
};

BundledData load_bundled() {
    BundledData d;
    d.corpus = bundled_corpus();
    d.codec = odt::build_codec(d.corpus);
    d.raw = odt::encode_labeled(d.codec, d.corpus);
    d.dataset = odt::normalize_dataset(odt::fit_normalizer(d.codec, d.raw.features), d.raw);
    d.groups = odt::api_row_groups(d.corpus);
    return d;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
    return out;
}

double median5(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

// ---- criterion 1: analytic gradients vs central finite differences --------

bool gradient_correctness(std::string& details) {
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index depth = 1 + static_cast<Eigen::Index>(odt::bounded_uniform(rng, 10));
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(odt::bounded_uniform(rng, 15));
        odt::NetworkConfig config;
        config.input_dim = d;
        config.epochs = 1;
        config.seed = rng();
        for (Eigen::Index l = 0; l < depth; ++l) {
            config.hidden_layers.push_back(
                1 + static_cast<Eigen::Index>(odt::bounded_uniform(rng, 20)));
        }
        const odt::Network net = odt::init_network(config);

        const Eigen::Index n = 3 + static_cast<Eigen::Index>(odt::bounded_uniform(rng, 4));
        Eigen::MatrixXd inputs(n, d);
        std::vector<std::vector<double>> inputs_v(static_cast<std::size_t>(n));
        Eigen::VectorXd targets(n);
        std::vector<double> targets_v(static_cast<std::size_t>(n));
        for (Eigen::Index r = 0; r < n; ++r) {
            auto& row = inputs_v[static_cast<std::size_t>(r)];
            row.resize(static_cast<std::size_t>(d));
            for (Eigen::Index c = 0; c < d; ++c) {
                inputs(r, c) = 2.0 * unit(rng) - 1.0;
                row[static_cast<std::size_t>(c)] = inputs(r, c);
            }
            targets[r] = unit(rng);
            targets_v[static_cast<std::size_t>(r)] = targets[r];
        }

        odt::ForwardCache cache;
        odt::forward_batch(net, inputs, &cache);
        const auto analytic = odt::backward(net, cache, targets);
        const auto reference = oracle::fd_gradients(net, inputs_v, targets_v, 1e-5);
        if (!oracle::gradients_match(analytic, reference, 1e-4, 1e-8)) {
            details = "mismatch on trial " + std::to_string(trial) + " (depth " +
                      std::to_string(depth) + ")";
            return false;
        }
    }
    details = "50 random networks, depths 1-10";
    return true;
}

// ---- criterion 2: maximin selection vs step-enumerated brute force --------

bool splitter_oracle(std::string& details) {
    std::mt19937_64 rng(2002);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(odt::bounded_uniform(rng, 7));
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(odt::bounded_uniform(rng, 4));
        Eigen::MatrixXd features(n, d);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < d; ++c) features(r, c) = unit(rng);
        }
        std::vector<Eigen::Index> pool;
        for (Eigen::Index i = 0; i < n; ++i) pool.push_back(i);
        const std::vector<Eigen::Index> init{static_cast<Eigen::Index>(
            odt::bounded_uniform(rng, static_cast<std::uint64_t>(n)))};
        const auto k = static_cast<Eigen::Index>(
            1 + odt::bounded_uniform(rng, static_cast<std::uint64_t>(n)));

        if (odt::maximin_select(features, pool, init, k) !=
            oracle::brute_maximin(features, pool, init, k)) {
            details = "selection mismatch on trial " + std::to_string(trial);
            return false;
        }
    }
    details = "200 random pools, exact sequence equality";
    return true;
}

// ---- criterion 3: accuracy_pdt vs naive loop, inclusive boundary ----------

bool metric_oracle(std::string& details) {
    std::mt19937_64 rng(3003);
    const std::size_t n = 1000;
    Eigen::VectorXd p(static_cast<Eigen::Index>(n)), t(static_cast<Eigen::Index>(n));
    std::vector<double> pv(n), tv(n);
    for (std::size_t i = 0; i < n; ++i) {
        pv[i] = p[static_cast<Eigen::Index>(i)] = 100.0 * unit(rng);
        // every 5th pair sits exactly on the 10 s boundary
        tv[i] = t[static_cast<Eigen::Index>(i)] =
            (i % 5 == 0) ? pv[i] + 10.0 : 100.0 * unit(rng);
    }
    const double fast = odt::accuracy_pdt(p, t);
    const double naive = oracle::naive_accuracy(pv, tv, 10.0);
    if (fast != naive) {
        details = "library " + std::to_string(fast) + " vs naive " + std::to_string(naive);
        return false;
    }
    if (odt::accuracy_pdt(Eigen::VectorXd::Constant(1, 40.0),
                          Eigen::VectorXd::Constant(1, 30.0)) != 1.0) {
        details = "|error| == 10 must count as a hit";
        return false;
    }
    details = "1000 random pairs incl. exact-boundary cases";
    return true;
}

// ---- criterion 4: bundled split shape and small-group protection ----------

bool split_shape(std::string& details) {
    const BundledData d = load_bundled();
    const odt::SplitConfig config; // defaults: 20/20, threshold 3, seed 42
    const auto result = odt::split(d.dataset, d.groups, config);

    if (result.train.size() != 105 || result.validation.size() != 20 ||
        result.test.size() != 20) {
        details = "got " + std::to_string(result.train.size()) + "/" +
                  std::to_string(result.validation.size()) + "/" +
                  std::to_string(result.test.size());
        return false;
    }
    odt::check_partition(result, d.dataset.features.rows());

    std::map<Eigen::Index, std::string> api_of;
    for (const auto& [api, members] : d.groups) {
        for (const auto r : members) api_of[r] = api;
    }
    for (const auto r : result.validation) {
        if (d.groups.at(api_of.at(r)).size() < 3) {
            details = "validation row " + std::to_string(r) + " comes from small group " +
                      api_of.at(r);
            return false;
        }
    }
    details = "105/20/20, partition holds, validation avoids groups < 3";
    return true;
}

// ---- criterion 5: ANN vs DNN ordering and absolute floors ------------------

bool table2_reproduction(std::string& details) {
    const BundledData d = load_bundled();
    const auto rows = odt::split(d.dataset, d.groups, odt::SplitConfig{});

    // the model pipeline refits normalization on the training rows
    const auto norm = odt::fit_normalizer(d.codec, take_rows(d.raw.features, rows.train));
    auto targets = [&](const std::vector<Eigen::Index>& set) {
        Eigen::VectorXd t = take(d.raw.targets_sec, set);
        for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = odt::normalize_target(norm, t[i]);
        return t;
    };
    const Eigen::MatrixXd train_x =
        odt::normalize_matrix(norm, take_rows(d.raw.features, rows.train));
    const Eigen::MatrixXd val_x =
        odt::normalize_matrix(norm, take_rows(d.raw.features, rows.validation));
    const Eigen::VectorXd train_y = targets(rows.train);
    const Eigen::VectorXd val_y = targets(rows.validation);
    const Eigen::MatrixXd test_raw = take_rows(d.raw.features, rows.test);
    const Eigen::VectorXd test_sec = take(d.raw.targets_sec, rows.test);
    const Eigen::MatrixXd train_raw = take_rows(d.raw.features, rows.train);
    const Eigen::VectorXd train_sec = take(d.raw.targets_sec, rows.train);

    std::vector<double> ann_test, dnn_test, dnn_train;
    std::ostringstream log;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (const bool deep : {false, true}) {
            const auto config = deep ? odt::dnn_config(d.codec.dimension(), seed)
                                     : odt::ann_config(d.codec.dimension(), seed);
            const auto [net, report] =
                odt::train(odt::init_network(config), train_x, train_y, val_x, val_y, config);
            const double test_acc =
                odt::evaluate(net, norm, test_raw, test_sec).accuracy_pdt;
            const double train_acc =
                odt::evaluate(net, norm, train_raw, train_sec).accuracy_pdt;
            if (deep) {
                dnn_test.push_back(test_acc);
                dnn_train.push_back(train_acc);
            } else {
                ann_test.push_back(test_acc);
            }
            log << (deep ? " dnn" : " ann") << seed << "=" << test_acc * 100.0 << "%";
        }
    }

    const double med_ann_test = median5(ann_test);
    const double med_dnn_test = median5(dnn_test);
    const double med_dnn_train = median5(dnn_train);

    std::ostringstream summary;
    summary << "median test acc: dnn " << med_dnn_test * 100.0 << "% vs ann "
            << med_ann_test * 100.0 << "%; median dnn train " << med_dnn_train * 100.0 << "%;"
            << log.str();
    details = summary.str();

    return med_dnn_test >= med_ann_test && med_dnn_train >= 0.70 && med_dnn_test >= 0.60;
}

// ---- criterion 6: convergence on synthetic sigmoid targets ----------------

bool convergence_sanity(std::string& details) {
    std::mt19937_64 rng(6006);
    const Eigen::Index n = 64, d = 6;
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd w(d);
    for (Eigen::Index i = 0; i < d; ++i) w[i] = 2.0 * unit(rng) - 1.0;
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) x(r, c) = unit(rng);
        y[r] = 1.0 / (1.0 + std::exp(-x.row(r).dot(w)));
    }

    odt::NetworkConfig config;
    config.input_dim = d;
    config.hidden_layers = {16};
    config.epochs = 2000;
    config.learning_rate = 0.01;
    config.momentum = 0.8;
    config.seed = 66;

    const auto [net, report] = odt::train(odt::init_network(config), x, y, x, y, config);
    const double final_mse = report.loss_trace.back();
    details = "final training MSE " + odt::csv::format_double(final_mse);
    return final_mse < 1e-3;
}

// ---- criterion 7: byte-identical pipeline artifacts ------------------------

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool determinism(std::string& details) {
    const fs::path base =
        fs::temp_directory_path() / ("odt_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);

    const std::string corpus_args =
        "--formulations " + kData + "/odt_table1.csv --apis " + kData + "/odt_apis.csv";
    for (const char* tag : {"a", "b"}) {
        const fs::path dir = base / tag;
        fs::create_directories(dir);
        const std::string split = (dir / "run.split").string();
        const std::string model = (dir / "run.model").string();
        const std::string report = (dir / "run.report").string();
        const std::string eval = (dir / "run.eval.csv").string();
        if (run_cli("split " + corpus_args + " --seed 42 --out " + split) != 0 ||
            run_cli("train " + corpus_args + " --split " + split +
                    " --preset dnn --seed 7 --quiet --out " + model + " --report " + report) !=
                0 ||
            run_cli("evaluate " + corpus_args + " --split " + split + " --model " + model +
                    " --out " + eval) != 0) {
            details = "pipeline command failed";
            fs::remove_all(base);
            return false;
        }
    }

    for (const char* name : {"run.split", "run.model", "run.report", "run.eval.csv"}) {
        if (read_file((base / "a" / name).string()) != read_file((base / "b" / name).string())) {
            details = std::string("artifact differs between runs: ") + name;
            fs::remove_all(base);
            return false;
        }
    }
    fs::remove_all(base);
    details = "split, model, report and evaluation CSV byte-identical across two runs";
    return true;
}

// ---- criterion 8: round-trips ----------------------------------------------

bool round_trips(std::string& details) {
    const odt::Corpus corpus = bundled_corpus();
    if (odt::parse_corpus(odt::serialize_corpus(corpus), odt::serialize_api_table(corpus)) !=
        corpus) {
        details = "corpus CSV round-trip is not field-for-field identical";
        return false;
    }

    const auto codec = odt::build_codec(corpus);
    const auto raw = odt::encode_labeled(codec, corpus);
    const auto norm = odt::fit_normalizer(codec, raw.features);
    for (double t = 0.0; t <= 100.0; t += 0.37) {
        const double rt = odt::denormalize_target(norm, odt::normalize_target(norm, t));
        if (std::abs(rt - t) > 1e-12 * std::max(1.0, t)) {
            details = "target round-trip off at " + std::to_string(t);
            return false;
        }
    }
    std::mt19937_64 rng(8008);
    for (int trial = 0; trial < 200; ++trial) {
        const auto j = static_cast<Eigen::Index>(
            odt::bounded_uniform(rng, static_cast<std::uint64_t>(codec.dimension())));
        const double lo = norm.feature_min[j];
        const double hi = norm.feature_max[j];
        const double v = lo + (hi - lo) * unit(rng);
        const double normalized = (hi > lo) ? (v - lo) / (hi - lo) : 0.0;
        const double rt = odt::denormalize_feature(norm, j, normalized);
        const double expect = (hi > lo) ? v : lo;
        if (std::abs(rt - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
            details = "feature round-trip off on column " + std::to_string(j);
            return false;
        }
    }
    details = "corpus parse/serialize exact; normalizer round-trips at machine precision";
    return true;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        std::string name;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "gradient correctness vs finite differences", gradient_correctness},
        {2, "maximin selection vs brute force", splitter_oracle},
        {3, "accuracy_pdt vs naive loop (inclusive boundary)", metric_oracle},
        {4, "bundled MD-FIS split shape 105/20/20 + protection", split_shape},
        {5, "ANN/DNN ordering and accuracy floors over 5 seeds", table2_reproduction},
        {6, "synthetic convergence to MSE < 1e-3", convergence_sanity},
        {7, "byte-identical pipeline artifacts", determinism},
        {8, "corpus and normalizer round-trips", round_trips},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = Clock::now();
        std::string details;
        bool ok = false;
        try {
            ok = criterion.run(details);
        } catch (const std::exception& e) {
            details = std::string("exception: ") + e.what();
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        std::printf("[%s] %d. %s (%s, %.2fs)\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name.c_str(), details.c_str(), seconds);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
