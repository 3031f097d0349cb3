#pragma once

#include <span>

#include "riskformer/tape.hpp"

namespace riskformer {

// Learnable input representation: a linear feature embedding plus a learnable
// encoding of the inter-event gap, combined by addition.
struct EmbedParams {
  Tensor2 W_e;  // d_in x d_m
  Tensor2 b_e;  // 1 x d_m
  Tensor2 W_t;  // 1 x d_m, weights of the scalar dt
  Tensor2 b_t;  // 1 x d_m
};

struct EmbedLeaves {
  NodeId W_e = -1;
  NodeId b_e = -1;
  NodeId W_t = -1;
  NodeId b_t = -1;
};

EmbedLeaves register_embed(Tape& tape, const EmbedParams& params);

// H0 = X * W_e + b_e (bias broadcast per row).
NodeId embed_features(Tape& tape, NodeId x, const EmbedLeaves& p);

// Row i = relu(W_t * dt_i + b_t). dt entries must be >= 0; when log1p_dt is
// set the gap enters as log1p(dt).
NodeId temporal_encode(Tape& tape, std::span<const double> dt, const EmbedLeaves& p,
                       bool log1p_dt = false);

// H = H0 + T, elementwise.
NodeId combine(Tape& tape, NodeId h0, NodeId tmat);

}  // namespace riskformer
