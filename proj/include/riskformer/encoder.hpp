#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskformer/tape.hpp"

namespace riskformer {

// Scaled dot-product self-attention stack: per-head Q/K/V projections,
// concatenation through W_O, post-norm residual blocks, optional
// position-wise feed-forward sublayer.
struct EncoderConfig {
  int d_m = 32;
  int n_heads = 4;
  int n_layers = 2;
  bool ffn_enabled = true;
  int d_ff = 0;  // 0 -> 4 * d_m
  double ln_eps = 1e-5;

  int d_k() const { return d_m / n_heads; }
  int ffn_dim() const { return d_ff > 0 ? d_ff : 4 * d_m; }
  void validate() const;
};

struct EncoderLayerParams {
  std::vector<Tensor2> W_Q;  // per head, d_m x d_k
  std::vector<Tensor2> W_K;
  std::vector<Tensor2> W_V;
  Tensor2 W_O;  // d_m x d_m
  Tensor2 ln1_gamma, ln1_beta;  // 1 x d_m
  bool ffn_enabled = true;
  Tensor2 W1, b1;  // d_m x d_ff, 1 x d_ff
  Tensor2 W2, b2;  // d_ff x d_m, 1 x d_m
  Tensor2 ln2_gamma, ln2_beta;  // 1 x d_m
};

struct EncoderLayerLeaves {
  std::vector<NodeId> W_Q, W_K, W_V;
  NodeId W_O = -1;
  NodeId ln1_gamma = -1, ln1_beta = -1;
  bool ffn_enabled = true;
  NodeId W1 = -1, b1 = -1, W2 = -1, b2 = -1;
  NodeId ln2_gamma = -1, ln2_beta = -1;
};

EncoderLayerLeaves register_layer(Tape& tape, const EncoderLayerParams& params);

// softmax(Q K^T / sqrt(d_k)) V with masked key positions forced to -inf
// before the softmax (exactly zero weight after). An empty key_mask means all
// positions are valid.
NodeId attention(Tape& tape, NodeId q, NodeId k, NodeId v,
                 const std::vector<std::uint8_t>& key_mask);

// Concat over heads of attention(H W_Q^h, H W_K^h, H W_V^h), projected by W_O.
NodeId multi_head(Tape& tape, NodeId h, const EncoderLayerLeaves& p,
                  const std::vector<std::uint8_t>& key_mask);

// A = LayerNorm(H + multi_head(H)); with the FFN sublayer enabled the result
// is LayerNorm(A + relu(A W1 + b1) W2 + b2), otherwise A.
NodeId encoder_layer(Tape& tape, NodeId h_prev, const EncoderLayerLeaves& p,
                     const std::vector<std::uint8_t>& key_mask, double ln_eps);

// Sequential application; an empty layer list is the identity.
NodeId encode(Tape& tape, NodeId h, std::span<const EncoderLayerLeaves> layers,
              const std::vector<std::uint8_t>& key_mask, double ln_eps);

}  // namespace riskformer
