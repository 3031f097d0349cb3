#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskformer/ingest.hpp"
#include "riskformer/tape.hpp"
#include "riskformer/trainer.hpp"

namespace riskformer {

// Comparison baseline: mean-pool each sequence's vectorized rows, then a
// two-hidden-layer relu MLP with a sigmoid output. It never sees the event
// gaps, which is the point of the comparison.
struct MlpConfig {
  int hidden1 = 64;
  int hidden2 = 32;
};

struct MlpParams {
  MlpConfig config;
  int d_in = 0;
  Tensor2 W1, b1;  // d_in x h1, 1 x h1
  Tensor2 W2, b2;  // h1 x h2, 1 x h2
  Tensor2 W3, b3;  // h2 x 1, 1 x 1
};

std::vector<std::pair<std::string, Tensor2*>> param_blocks(MlpParams& params);

MlpParams init_mlp(const MlpConfig& config, int d_in, std::uint64_t seed);

struct MlpLeaves {
  NodeId W1 = -1, b1 = -1, W2 = -1, b2 = -1, W3 = -1, b3 = -1;
  std::vector<NodeId> flat;
};

MlpLeaves register_mlp(Tape& tape, const MlpParams& params);
NodeId mlp_probability(Tape& tape, const MlpLeaves& leaves, const Tensor2& pooled);

// Column means over the sequence's rows, as a 1 x d_in row.
Tensor2 mean_pool_rows(const VectorizedSequence& vseq);

double predict_mlp(const MlpParams& params, const Tensor2& pooled);

struct MlpTrainResult {
  MlpParams model;
  FeatureSpace feature_space;
  TrainHistory history;
};

// Same split/featurization/optimizer/early-stopping protocol as train().
MlpTrainResult train_mlp(const Cohort& cohort, const MlpConfig& mlp_config, int vocab_size,
                         const TrainConfig& train_config);

}  // namespace riskformer
