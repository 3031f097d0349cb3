#include "riskformer/metrics.hpp"

#include <string>

#include "riskformer/errors.hpp"

namespace riskformer {

ConfusionMatrix confusion(std::span<const double> preds, std::span<const int> labels,
                          double threshold) {
  if (preds.empty()) throw ContractError("confusion: empty input");
  if (preds.size() != labels.size()) {
    throw ShapeError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm;
  cm.threshold = threshold;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw ContractError("confusion: label outside {0,1}");
    const bool positive = preds[i] >= threshold;
    if (positive && y == 1) ++cm.tp;
    else if (positive && y == 0) ++cm.fp;
    else if (!positive && y == 1) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw ContractError("compute_metrics: empty confusion matrix");
  auto ratio = [](long num, long den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  MetricsReport r;
  r.cm = cm;
  r.acc = ratio(cm.tp + cm.tn, cm.total());
  r.precision = ratio(cm.tp, cm.tp + cm.fp);
  r.recall = ratio(cm.tp, cm.tp + cm.fn);
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

nlohmann::json to_json(const MetricsReport& report) {
  return nlohmann::json{
      {"acc", report.acc},         {"precision", report.precision},
      {"recall", report.recall},   {"f1", report.f1},
      {"tp", report.cm.tp},        {"fp", report.cm.fp},
      {"fn", report.cm.fn},        {"tn", report.cm.tn},
      {"threshold", report.cm.threshold},
      {"n", report.cm.total()},
  };
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.cm.tp = j.at("tp").get<long>();
  r.cm.fp = j.at("fp").get<long>();
  r.cm.fn = j.at("fn").get<long>();
  r.cm.tn = j.at("tn").get<long>();
  r.cm.threshold = j.at("threshold").get<double>();
  r.acc = j.at("acc").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  return r;
}

}  // namespace riskformer
