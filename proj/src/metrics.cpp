#include "odt/metrics.hpp"

#include "odt/errors.hpp"

#include <cmath>

namespace odt {

double accuracy_pdt(Eigen::Ref<const Eigen::VectorXd> predictions_sec,
                    Eigen::Ref<const Eigen::VectorXd> labels_sec, double tolerance_sec) {
    if (predictions_sec.size() != labels_sec.size()) {
        throw ValidationError("accuracy_pdt length mismatch (" +
                              std::to_string(predictions_sec.size()) + " vs " +
                              std::to_string(labels_sec.size()) + ")");
    }
    if (predictions_sec.size() == 0) throw ValidationError("accuracy_pdt over empty input");
    if (tolerance_sec <= 0) throw ValidationError("accuracy tolerance must be positive");

    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < predictions_sec.size(); ++i) {
        if (std::abs(predictions_sec[i] - labels_sec[i]) <= tolerance_sec) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions_sec.size());
}

EvaluationResult evaluate_predictions(Eigen::Ref<const Eigen::VectorXd> predictions_sec,
                                      Eigen::Ref<const Eigen::VectorXd> labels_sec,
                                      double tolerance_sec) {
    EvaluationResult result;
    result.n = predictions_sec.size();
    result.accuracy_pdt = accuracy_pdt(predictions_sec, labels_sec, tolerance_sec);

    double abs_sum = 0.0;
    double sq_sum = 0.0;
    result.samples.reserve(static_cast<std::size_t>(result.n));
    for (Eigen::Index i = 0; i < result.n; ++i) {
        SampleError s;
        s.label_sec = labels_sec[i];
        s.prediction_sec = predictions_sec[i];
        s.abs_error_sec = std::abs(s.prediction_sec - s.label_sec);
        s.hit = s.abs_error_sec <= tolerance_sec;
        abs_sum += s.abs_error_sec;
        sq_sum += s.abs_error_sec * s.abs_error_sec;
        result.samples.push_back(s);
    }
    result.mae = abs_sum / static_cast<double>(result.n);
    result.rmse = std::sqrt(sq_sum / static_cast<double>(result.n));
    return result;
}

EvaluationResult evaluate(const Network& net, const Normalizer& norm,
                          const Eigen::MatrixXd& raw_features,
                          Eigen::Ref<const Eigen::VectorXd> labels_sec, double tolerance_sec) {
    if (raw_features.rows() == 0) throw ValidationError("evaluate over an empty row set");
    return evaluate_predictions(predict_batch(net, norm, raw_features), labels_sec,
                                tolerance_sec);
}

} // namespace odt
