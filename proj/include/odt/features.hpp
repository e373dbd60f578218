#pragma once

#include "odt/dataset.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace odt {

// Disintegration times live on a fixed 0..100 s scale, so the 10 s accuracy
// threshold is a constant 0.1 in normalized space.
inline constexpr double kTargetMaxSeconds = 100.0;

inline constexpr int kApiDescriptorCount = 9;
inline constexpr int kManufactureParamCount = 4;

/// Maps formulation records to fixed-length raw feature vectors:
/// 9 API descriptors, API dose, per-slot one-hot + dose blocks, and the 4
/// manufacture parameters. Deterministic given the corpus vocabulary.
struct FeatureCodec {
    std::array<std::vector<std::string>, kCategoryCount> excipient_vocab;
    std::vector<std::string> feature_names;

    Eigen::Index dimension() const { return static_cast<Eigen::Index>(feature_names.size()); }
    bool operator==(const FeatureCodec&) const = default;
};

FeatureCodec build_codec(const Corpus& corpus);

/// Raw (unnormalized) feature vector for one record. Absent manufacture
/// parameters become NaN sentinels, imputed later by the Normalizer. Throws
/// ValidationError for excipient names outside the codec vocabulary.
Eigen::VectorXd encode(const FeatureCodec& codec, const ApiDescriptor& api,
                       const FormulationRecord& record);

/// Encoded labeled rows of a corpus, targets still in seconds.
struct RawDataset {
    Eigen::MatrixXd features;                 // n_labeled x dimension
    Eigen::VectorXd targets_sec;              // n_labeled
    std::vector<Eigen::Index> record_indices; // labeled row -> corpus index
};

RawDataset encode_labeled(const FeatureCodec& codec, const Corpus& corpus);

/// Per-feature min-max scaling into [0,1] plus the fixed 0..100 s target
/// scale. NaN sentinels are imputed with the fitted column mean before
/// scaling; values outside the fitted range clamp.
struct Normalizer {
    std::vector<std::string> feature_names;
    Eigen::VectorXd feature_min;
    Eigen::VectorXd feature_max;
    Eigen::VectorXd impute_value; // column mean over non-NaN fitted entries
    double target_max = kTargetMaxSeconds;

    Eigen::Index dimension() const { return feature_min.size(); }
};

/// Fits per-feature statistics on the given rows (training rows for model
/// use). Degenerate columns (min == max) normalize to 0.
Normalizer fit_normalizer(const FeatureCodec& codec, const Eigen::MatrixXd& raw_features);

Eigen::VectorXd normalize(const Normalizer& norm, Eigen::VectorXd raw);
Eigen::MatrixXd normalize_matrix(const Normalizer& norm, Eigen::MatrixXd raw);

double normalize_target(const Normalizer& norm, double seconds);
double denormalize_target(const Normalizer& norm, double normalized);

// Inverse of the per-feature map for in-range values; used by round-trip checks.
double denormalize_feature(const Normalizer& norm, Eigen::Index feature, double normalized);

std::string serialize_normalizer(const Normalizer& norm);
Normalizer parse_normalizer(std::string_view text);

/// Normalized features + targets over the labeled rows.
struct EncodedDataset {
    Eigen::MatrixXd features;                 // entries in [0,1]
    Eigen::VectorXd targets;                  // in [0,1]
    std::vector<Eigen::Index> record_indices; // labeled row -> corpus index
};

EncodedDataset normalize_dataset(const Normalizer& norm, const RawDataset& raw);

} // namespace odt
