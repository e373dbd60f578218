#pragma once

#include "odt/network.hpp"

#include <Eigen/Core>

#include <vector>

namespace odt {

// Pharmaceutical accuracy criterion and helper error statistics. All values
// here are in seconds; these functions never see normalized targets.

inline constexpr double kAccuracyToleranceSec = 10.0;

/// Fraction of predictions within `tolerance_sec` of the label; the
/// comparison is inclusive, so an absolute error of exactly 10 s is a hit.
/// Throws ValidationError for empty or mismatched inputs.
double accuracy_pdt(Eigen::Ref<const Eigen::VectorXd> predictions_sec,
                    Eigen::Ref<const Eigen::VectorXd> labels_sec,
                    double tolerance_sec = kAccuracyToleranceSec);

struct SampleError {
    double label_sec = 0.0;
    double prediction_sec = 0.0;
    double abs_error_sec = 0.0;
    bool hit = false;
};

struct EvaluationResult {
    double accuracy_pdt = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    Eigen::Index n = 0;
    std::vector<SampleError> samples;
};

EvaluationResult evaluate_predictions(Eigen::Ref<const Eigen::VectorXd> predictions_sec,
                                      Eigen::Ref<const Eigen::VectorXd> labels_sec,
                                      double tolerance_sec = kAccuracyToleranceSec);

/// Predicts every row (raw features in, seconds out) and assembles the
/// per-sample table.
EvaluationResult evaluate(const Network& net, const Normalizer& norm,
                          const Eigen::MatrixXd& raw_features,
                          Eigen::Ref<const Eigen::VectorXd> labels_sec,
                          double tolerance_sec = kAccuracyToleranceSec);

} // namespace odt
