#include "riskformer/head.hpp"

#include <string>

#include "riskformer/errors.hpp"

namespace riskformer {

PoolLeaves register_pool(Tape& tape, const PoolParams& params) {
  return PoolLeaves{tape.leaf(params.W_a), tape.leaf(params.v)};
}

HeadLeaves register_head(Tape& tape, const HeadParams& params) {
  return HeadLeaves{tape.leaf(params.W_c), tape.leaf(params.b_c)};
}

NodeId pooling_weights(Tape& tape, NodeId h, const PoolLeaves& p,
                       const std::vector<std::uint8_t>& mask) {
  NodeId scores = tape.transpose(tape.matmul(tape.tanh(tape.matmul(h, p.W_a)), p.v));
  if (!mask.empty()) {
    bool any = false;
    for (std::uint8_t m : mask) any = any || m != 0;
    if (!any) throw DegenerateRowError("pooling_weights: no valid positions");
    scores = tape.mask_cols(scores, mask);
  }
  return tape.softmax_rows(scores);
}

NodeId pool(Tape& tape, NodeId h, NodeId a) {
  const Tensor2& weights = tape.value(a);
  if (weights.rows() != 1 || weights.cols() != tape.value(h).rows()) {
    throw ShapeError("pool: weights " + weights.shape_str() + " do not match H " +
                     tape.value(h).shape_str());
  }
  return tape.matmul(a, h);
}

NodeId classify(Tape& tape, NodeId z, const HeadLeaves& p) {
  return tape.sigmoid(tape.add(tape.matmul(z, p.W_c), p.b_c));
}

NodeId bce_loss(Tape& tape, std::span<const NodeId> yhat, std::span<const int> labels) {
  if (yhat.size() != labels.size()) {
    throw ShapeError("bce_loss: " + std::to_string(yhat.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = static_cast<double>(labels[i]);
  return tape.bce_mean(tape.stack_scalars(yhat), std::move(y));
}

}  // namespace riskformer
