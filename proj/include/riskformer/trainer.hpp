#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "riskformer/grad_check.hpp"
#include "riskformer/metrics.hpp"
#include "riskformer/model.hpp"

namespace riskformer {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 32;
  int max_epochs = 50;
  int patience = 5;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  double threshold = 0.5;

  void validate() const;
};

// First/second moment accumulators mirroring a parameter block list.
struct OptimState {
  std::vector<Tensor2> m;
  std::vector<Tensor2> v;
  long t = 0;

  static OptimState like(std::span<Tensor2* const> blocks);
};

// Bias-corrected adaptive update; t is incremented once per call.
void adam_step(std::span<Tensor2* const> params, std::span<const Tensor2> grads,
               OptimState& state, const TrainConfig& cfg);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  MetricsReport val_metrics;
};

struct TrainHistory {
  double initial_train_loss = 0.0;
  double initial_val_loss = 0.0;
  std::vector<EpochStats> epochs;
  int best_epoch = 0;    // 1-based
  int stopped_epoch = 0; // number of epochs actually run
};

nlohmann::json to_json(const TrainHistory& history);

// One training/validation computation over a set of item indices. The
// returned `params` list must align one-to-one with the block list handed to
// fit_loop.
struct GraphSpec {
  NodeId loss = -1;
  std::vector<NodeId> yhat;    // per item, in index order
  std::vector<NodeId> params;  // leaf ids, canonical block order
};
using GraphBuilder = std::function<GraphSpec(Tape&, std::span<const std::size_t>)>;

// Seeded mini-batch loop with early stopping on validation loss; on return
// the blocks hold the best-validation-epoch parameters.
TrainHistory fit_loop(std::span<Tensor2* const> blocks, const GraphBuilder& builder,
                      std::span<const std::size_t> train_idx,
                      std::span<const std::size_t> val_idx, std::span<const int> labels,
                      const TrainConfig& cfg);

// Deterministic train/validation split; a function of (n, cfg.seed,
// cfg.val_fraction) only, so every model trained with the same config sees
// the same split.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
SplitIndices split_cohort(std::size_t n, const TrainConfig& cfg);

// Xavier-uniform weights, zero biases, unit layer-norm gains; deterministic
// in seed.
ModelParams init_params(const ModelConfig& config, int d_in, std::uint64_t seed);

struct TrainResult {
  ModelParams model;
  FeatureSpace feature_space;
  TrainHistory history;
};

// Deterministic split, train-split featurization, mini-batch optimization,
// early stopping; returns the parameters of the best validation epoch.
TrainResult train(const Cohort& cohort, const ModelConfig& model_config,
                  const TrainConfig& train_config);

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  ModelParams model;
  FeatureSpace feature_space;
  TrainConfig train_config;
  std::uint64_t seed = 0;
  MetricsReport metrics_at_best;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Central-difference audit of every parameter block against the batch loss.
GradAuditReport gradient_audit(ModelParams& model, const Batch& batch, double h, double tol);

nlohmann::json to_json(const GradAuditReport& report);
std::string format_report(const GradAuditReport& report);

}  // namespace riskformer
