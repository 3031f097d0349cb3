#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskformer/baseline.hpp"
#include "riskformer/config.hpp"
#include "riskformer/datagen.hpp"
#include "riskformer/metrics.hpp"

namespace riskformer {

// Held-out cohort seed derived from a training seed; keeps the test stream
// disjoint from the train stream by construction.
std::uint64_t test_cohort_seed(std::uint64_t train_seed);
std::uint64_t contamination_seed(std::uint64_t train_seed);

struct RunRow {
  std::string model;         // "transformer" or "mlp"
  double value = 0.0;        // swept value (heads or rho); 0 for comparisons
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricsReport metrics;
};

struct ComparisonResult {
  std::vector<RunRow> rows;  // 2 x |seeds|, transformer row first per seed
  AppConfig config;
};

struct SweepResult {
  std::string swept;  // "n_heads" or "rho"
  std::vector<RunRow> rows;  // one per (value, seed), canonical order
  AppConfig config;
};

// Per seed s: train cohort = generate(gen, seed=s), held-out cohort =
// generate(gen with n_patients=n_test, seed=test_cohort_seed(s)); the full
// model and the mean-pool MLP train on the same cohort with the same split.
// A failed cell is recorded and does not abort the other seeds.
ComparisonResult run_comparison(const AppConfig& config);

// One full train/eval per (head count, seed) at d_m = experiment.sweep_d_m.
// Every head count is validated against d_m before any training starts.
SweepResult sweep_heads(const AppConfig& config);

// For each rho: contaminate the training cohort (continuous features only),
// train, and evaluate on the clean held-out cohort.
SweepResult sweep_contamination(const AppConfig& config);

MetricsReport evaluate_model(const ModelParams& model, const FeatureSpace& fs,
                             const Cohort& test, double threshold);
MetricsReport evaluate_mlp(const MlpParams& model, const FeatureSpace& fs, const Cohort& test,
                           double threshold);

nlohmann::json to_json(const ComparisonResult& result);
nlohmann::json to_json(const SweepResult& result);

}  // namespace riskformer
