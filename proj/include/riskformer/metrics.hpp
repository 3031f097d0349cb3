#pragma once

#include <span>

#include <json.hpp>

namespace riskformer {

struct ConfusionMatrix {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
  double threshold = 0.5;

  long total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Predicted positive iff yhat >= threshold (ties count positive).
ConfusionMatrix confusion(std::span<const double> preds, std::span<const int> labels,
                          double threshold);

struct MetricsReport {
  ConfusionMatrix cm;
  double acc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// acc=(tp+tn)/total, precision=tp/(tp+fp), recall=tp/(tp+fn), f1=2pr/(p+r);
// any 0/0 denominator yields 0.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

}  // namespace riskformer
