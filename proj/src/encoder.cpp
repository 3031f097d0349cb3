#include "riskformer/encoder.hpp"

#include <cmath>
#include <string>

#include "riskformer/errors.hpp"

namespace riskformer {

void EncoderConfig::validate() const {
  if (d_m < 1) throw ConfigError("encoder: d_m must be >= 1");
  if (n_heads < 1) throw ConfigError("encoder: n_heads must be >= 1");
  if (d_m % n_heads != 0) {
    throw ConfigError("encoder: n_heads " + std::to_string(n_heads) + " does not divide d_m " +
                      std::to_string(d_m));
  }
  if (n_layers < 0) throw ConfigError("encoder: n_layers must be >= 0");
  if (d_ff < 0) throw ConfigError("encoder: d_ff must be >= 0");
  if (ln_eps <= 0.0) throw ConfigError("encoder: ln_eps must be > 0");
}

EncoderLayerLeaves register_layer(Tape& tape, const EncoderLayerParams& params) {
  EncoderLayerLeaves leaves;
  for (const Tensor2& w : params.W_Q) leaves.W_Q.push_back(tape.leaf(w));
  for (const Tensor2& w : params.W_K) leaves.W_K.push_back(tape.leaf(w));
  for (const Tensor2& w : params.W_V) leaves.W_V.push_back(tape.leaf(w));
  leaves.W_O = tape.leaf(params.W_O);
  leaves.ln1_gamma = tape.leaf(params.ln1_gamma);
  leaves.ln1_beta = tape.leaf(params.ln1_beta);
  leaves.ffn_enabled = params.ffn_enabled;
  if (params.ffn_enabled) {
    leaves.W1 = tape.leaf(params.W1);
    leaves.b1 = tape.leaf(params.b1);
    leaves.W2 = tape.leaf(params.W2);
    leaves.b2 = tape.leaf(params.b2);
    leaves.ln2_gamma = tape.leaf(params.ln2_gamma);
    leaves.ln2_beta = tape.leaf(params.ln2_beta);
  }
  return leaves;
}

NodeId attention(Tape& tape, NodeId q, NodeId k, NodeId v,
                 const std::vector<std::uint8_t>& key_mask) {
  const int d_k = tape.value(q).cols();
  if (tape.value(k).cols() != d_k) {
    throw ShapeError("attention: Q has width " + std::to_string(d_k) + ", K has width " +
                     std::to_string(tape.value(k).cols()));
  }
  if (tape.value(k).rows() != tape.value(v).rows()) {
    throw ShapeError("attention: K has " + std::to_string(tape.value(k).rows()) +
                     " rows, V has " + std::to_string(tape.value(v).rows()));
  }
  NodeId logits = tape.scale(tape.matmul(q, tape.transpose(k)), 1.0 / std::sqrt(d_k));
  if (!key_mask.empty()) logits = tape.mask_cols(logits, key_mask);
  return tape.matmul(tape.softmax_rows(logits), v);
}

NodeId multi_head(Tape& tape, NodeId h, const EncoderLayerLeaves& p,
                  const std::vector<std::uint8_t>& key_mask) {
  std::vector<NodeId> heads;
  heads.reserve(p.W_Q.size());
  for (std::size_t i = 0; i < p.W_Q.size(); ++i) {
    heads.push_back(attention(tape, tape.matmul(h, p.W_Q[i]), tape.matmul(h, p.W_K[i]),
                              tape.matmul(h, p.W_V[i]), key_mask));
  }
  return tape.matmul(tape.concat_cols(heads), p.W_O);
}

NodeId encoder_layer(Tape& tape, NodeId h_prev, const EncoderLayerLeaves& p,
                     const std::vector<std::uint8_t>& key_mask, double ln_eps) {
  NodeId attended = multi_head(tape, h_prev, p, key_mask);
  NodeId a = tape.layer_norm_rows(tape.add(h_prev, attended), p.ln1_gamma, p.ln1_beta, ln_eps);
  if (!p.ffn_enabled) return a;
  NodeId hidden = tape.relu(tape.add_row(tape.matmul(a, p.W1), p.b1));
  NodeId ffn = tape.add_row(tape.matmul(hidden, p.W2), p.b2);
  return tape.layer_norm_rows(tape.add(a, ffn), p.ln2_gamma, p.ln2_beta, ln_eps);
}

NodeId encode(Tape& tape, NodeId h, std::span<const EncoderLayerLeaves> layers,
              const std::vector<std::uint8_t>& key_mask, double ln_eps) {
  for (const EncoderLayerLeaves& layer : layers) {
    h = encoder_layer(tape, h, layer, key_mask, ln_eps);
  }
  return h;
}

}  // namespace riskformer
