#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskformer/tape.hpp"

namespace riskformer {

// Attention pooling over time followed by a single-logit sigmoid classifier.
struct PoolParams {
  Tensor2 W_a;  // d_m x d_a
  Tensor2 v;    // d_a x 1
};

struct PoolLeaves {
  NodeId W_a = -1;
  NodeId v = -1;
};

struct HeadParams {
  Tensor2 W_c;  // d_m x 1
  Tensor2 b_c;  // 1 x 1
};

struct HeadLeaves {
  NodeId W_c = -1;
  NodeId b_c = -1;
};

PoolLeaves register_pool(Tape& tape, const PoolParams& params);
HeadLeaves register_head(Tape& tape, const HeadParams& params);

// Scores e_i = v^T tanh(W_a^T H_i) for valid positions, softmax-normalized
// over valid positions; masked positions get weight exactly 0. Returns a
// 1 x T row. An empty mask means all positions are valid.
NodeId pooling_weights(Tape& tape, NodeId h, const PoolLeaves& p,
                       const std::vector<std::uint8_t>& mask);

// Z = sum_i a_i H_i, returned as a 1 x d_m row.
NodeId pool(Tape& tape, NodeId h, NodeId a);

// yhat = sigmoid(W_c Z + b_c), a 1x1 probability.
NodeId classify(Tape& tape, NodeId z, const HeadLeaves& p);

// Mean binary cross-entropy of per-sequence probability nodes against labels.
NodeId bce_loss(Tape& tape, std::span<const NodeId> yhat, std::span<const int> labels);

}  // namespace riskformer
