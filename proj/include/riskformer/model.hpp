#pragma once

#include <functional>
#include <string>
#include <vector>

#include "riskformer/embedder.hpp"
#include "riskformer/encoder.hpp"
#include "riskformer/head.hpp"
#include "riskformer/ingest.hpp"
#include "riskformer/tape.hpp"

namespace riskformer {

struct ModelConfig {
  int vocab_size = 100;
  int d_m = 32;
  int n_heads = 4;
  int n_layers = 2;
  bool ffn_enabled = true;
  int d_ff = 0;  // 0 -> 4 * d_m
  int d_a = 0;   // pooling width, 0 -> d_m
  double ln_eps = 1e-5;
  bool dt_log1p = false;

  EncoderConfig encoder() const;
  int pool_dim() const { return d_a > 0 ? d_a : d_m; }
  void validate() const;
};

// All learnable tensors plus the shape metadata they were built for.
struct ModelParams {
  ModelConfig config;
  int d_in = 0;
  EmbedParams embed;
  std::vector<EncoderLayerParams> layers;
  PoolParams pool;
  HeadParams head;
};

struct ModelLeaves {
  EmbedLeaves embed;
  std::vector<EncoderLayerLeaves> layers;
  PoolLeaves pool;
  HeadLeaves head;
  std::vector<NodeId> flat;  // canonical block order, aligned with param_blocks
};

// Canonical named parameter enumeration; the same order everywhere
// (initialization, optimizer, audit, checkpoints).
std::vector<std::pair<std::string, Tensor2*>> param_blocks(ModelParams& params);
std::vector<std::pair<std::string, const Tensor2*>> param_blocks(const ModelParams& params);
std::size_t param_count(const ModelParams& params);

ModelLeaves register_model(Tape& tape, const ModelParams& params);

// Forward pass for one (possibly padded) sequence; returns the 1x1 risk
// probability node. An empty mask means every row is a real event.
NodeId sequence_probability(Tape& tape, const ModelLeaves& leaves, const ModelConfig& config,
                            const Tensor2& x, std::span<const double> dt,
                            const std::vector<std::uint8_t>& mask);

struct BatchGraph {
  NodeId loss = -1;
  std::vector<NodeId> yhat;  // per sequence, batch order
};

BatchGraph batch_graph(Tape& tape, const ModelLeaves& leaves, const ModelConfig& config,
                       const Batch& batch);

// Forward-only conveniences (fresh tape per call).
double predict(const ModelParams& params, const VectorizedSequence& vseq);
std::vector<double> predict_batch(const ModelParams& params, const Batch& batch);

}  // namespace riskformer
