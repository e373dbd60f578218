#include "odt/features.hpp"

#include "odt/csv.hpp"
#include "odt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace odt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::array<std::string, kApiDescriptorCount> kApiFeatureNames = {
    "api_molecular_weight", "api_xlogp3",      "api_hbond_donors",
    "api_hbond_acceptors",  "api_rotatable_bonds", "api_tpsa",
    "api_heavy_atoms",      "api_complexity",  "api_logs"};

const std::array<std::string, kManufactureParamCount> kManufactureNames = {
    "hardness_n", "friability_pct", "thickness_mm", "punch_mm"};

} // namespace

FeatureCodec build_codec(const Corpus& corpus) {
    if (corpus.records.empty()) throw ValidationError("cannot build a codec from an empty corpus");

    FeatureCodec codec;
    codec.excipient_vocab = corpus.excipient_vocab;

    for (const auto& n : kApiFeatureNames) codec.feature_names.push_back(n);
    codec.feature_names.push_back("api_dose_mg");
    for (const auto& slot : kSlots) {
        const auto& vocab = codec.excipient_vocab[static_cast<std::size_t>(slot.category)];
        for (const auto& name : vocab) {
            codec.feature_names.push_back(std::string(slot.column) + "_is_" + name);
        }
        codec.feature_names.push_back(std::string(slot.column) + "_dose_mg");
    }
    for (const auto& n : kManufactureNames) codec.feature_names.push_back(n);
    return codec;
}

Eigen::VectorXd encode(const FeatureCodec& codec, const ApiDescriptor& api,
                       const FormulationRecord& record) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(codec.dimension());
    Eigen::Index i = 0;
    x[i++] = api.molecular_weight;
    x[i++] = api.xlogp3;
    x[i++] = api.hbond_donors;
    x[i++] = api.hbond_acceptors;
    x[i++] = api.rotatable_bonds;
    x[i++] = api.tpsa;
    x[i++] = api.heavy_atoms;
    x[i++] = api.complexity;
    x[i++] = api.logs;
    x[i++] = record.api_dose_mg;

    for (std::size_t s = 0; s < kSlotCount; ++s) {
        const auto& vocab = codec.excipient_vocab[static_cast<std::size_t>(kSlots[s].category)];
        const auto& entry = record.excipients[s];
        if (entry.present()) {
            const auto it = std::find(vocab.begin(), vocab.end(), entry.name);
            if (it == vocab.end()) {
                throw ValidationError("excipient '" + entry.name +
                                      "' is not in the codec vocabulary for category " +
                                      std::string(category_name(kSlots[s].category)));
            }
            x[i + (it - vocab.begin())] = 1.0;
        }
        i += static_cast<Eigen::Index>(vocab.size());
        x[i++] = entry.dose_mg;
    }

    auto opt = [](const std::optional<double>& v) { return v ? *v : kNaN; };
    x[i++] = opt(record.hardness_n);
    x[i++] = opt(record.friability_pct);
    x[i++] = opt(record.thickness_mm);
    x[i++] = opt(record.punch_mm);
    return x;
}

RawDataset encode_labeled(const FeatureCodec& codec, const Corpus& corpus) {
    RawDataset out;
    out.record_indices = labeled_records(corpus);
    const auto n = static_cast<Eigen::Index>(out.record_indices.size());
    out.features.resize(n, codec.dimension());
    out.targets_sec.resize(n);
    for (Eigen::Index row = 0; row < n; ++row) {
        const auto& rec = corpus.records[static_cast<std::size_t>(out.record_indices[row])];
        out.features.row(row) = encode(codec, corpus.api(rec.api_name), rec);
        out.targets_sec[row] = *rec.disintegration_time_sec;
    }
    return out;
}

Normalizer fit_normalizer(const FeatureCodec& codec, const Eigen::MatrixXd& raw_features) {
    if (raw_features.rows() == 0) throw ValidationError("cannot fit a normalizer on zero rows");
    if (raw_features.cols() != codec.dimension()) {
        throw ValidationError("feature matrix width does not match the codec dimension");
    }

    Normalizer norm;
    norm.feature_names = codec.feature_names;
    const Eigen::Index d = raw_features.cols();
    norm.feature_min.resize(d);
    norm.feature_max.resize(d);
    norm.impute_value.resize(d);

    for (Eigen::Index j = 0; j < d; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index r = 0; r < raw_features.rows(); ++r) {
            const double v = raw_features(r, j);
            if (std::isnan(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
            ++count;
        }
        if (count == 0) {
            // column never observed in the fitted rows
            norm.feature_min[j] = 0.0;
            norm.feature_max[j] = 0.0;
            norm.impute_value[j] = 0.0;
        } else {
            norm.feature_min[j] = lo;
            norm.feature_max[j] = hi;
            norm.impute_value[j] = sum / static_cast<double>(count);
        }
    }
    return norm;
}

Eigen::VectorXd normalize(const Normalizer& norm, Eigen::VectorXd raw) {
    if (raw.size() != norm.dimension()) {
        throw ValidationError("vector length does not match the normalizer dimension");
    }
    for (Eigen::Index j = 0; j < raw.size(); ++j) {
        double v = std::isnan(raw[j]) ? norm.impute_value[j] : raw[j];
        const double range = norm.feature_max[j] - norm.feature_min[j];
        v = range > 0.0 ? (v - norm.feature_min[j]) / range : 0.0;
        raw[j] = std::clamp(v, 0.0, 1.0);
    }
    return raw;
}

Eigen::MatrixXd normalize_matrix(const Normalizer& norm, Eigen::MatrixXd raw) {
    for (Eigen::Index r = 0; r < raw.rows(); ++r) {
        raw.row(r) = normalize(norm, raw.row(r).transpose()).transpose();
    }
    return raw;
}

double normalize_target(const Normalizer& norm, double seconds) {
    return std::clamp(seconds / norm.target_max, 0.0, 1.0);
}

double denormalize_target(const Normalizer& norm, double normalized) {
    return normalized * norm.target_max;
}

double denormalize_feature(const Normalizer& norm, Eigen::Index feature, double normalized) {
    const double range = norm.feature_max[feature] - norm.feature_min[feature];
    return norm.feature_min[feature] + normalized * range;
}

std::string serialize_normalizer(const Normalizer& norm) {
    std::string out = "target_max\t" + csv::format_double(norm.target_max) + "\n";
    for (Eigen::Index j = 0; j < norm.dimension(); ++j) {
        out += norm.feature_names[static_cast<std::size_t>(j)] + "\t" +
               csv::format_double(norm.feature_min[j]) + "\t" +
               csv::format_double(norm.feature_max[j]) + "\t" +
               csv::format_double(norm.impute_value[j]) + "\n";
    }
    return out;
}

Normalizer parse_normalizer(std::string_view text) {
    Normalizer norm;
    std::vector<double> mins, maxs, imputes;
    std::size_t start = 0;
    bool saw_target = false;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;

        std::vector<std::string_view> parts;
        std::size_t p = 0;
        while (p <= line.size()) {
            std::size_t tab = line.find('\t', p);
            if (tab == std::string_view::npos) tab = line.size();
            parts.push_back(line.substr(p, tab - p));
            p = tab + 1;
        }
        if (parts.size() == 2 && parts[0] == "target_max") {
            norm.target_max = csv::parse_double(parts[1], "normalizer target_max");
            saw_target = true;
            continue;
        }
        if (parts.size() != 4) throw ParseError("malformed normalizer line");
        norm.feature_names.emplace_back(parts[0]);
        mins.push_back(csv::parse_double(parts[1], "normalizer min"));
        maxs.push_back(csv::parse_double(parts[2], "normalizer max"));
        imputes.push_back(csv::parse_double(parts[3], "normalizer impute"));
    }
    if (!saw_target) throw ParseError("normalizer text is missing the target_max line");
    const auto d = static_cast<Eigen::Index>(mins.size());
    norm.feature_min = Eigen::Map<Eigen::VectorXd>(mins.data(), d);
    norm.feature_max = Eigen::Map<Eigen::VectorXd>(maxs.data(), d);
    norm.impute_value = Eigen::Map<Eigen::VectorXd>(imputes.data(), d);
    return norm;
}

EncodedDataset normalize_dataset(const Normalizer& norm, const RawDataset& raw) {
    EncodedDataset out;
    out.features = normalize_matrix(norm, raw.features);
    out.targets.resize(raw.targets_sec.size());
    for (Eigen::Index i = 0; i < raw.targets_sec.size(); ++i) {
        out.targets[i] = normalize_target(norm, raw.targets_sec[i]);
    }
    out.record_indices = raw.record_indices;
    return out;
}

} // namespace odt
