#include "riskformer/embedder.hpp"

#include <cmath>
#include <vector>

#include "riskformer/errors.hpp"

namespace riskformer {

EmbedLeaves register_embed(Tape& tape, const EmbedParams& params) {
  EmbedLeaves leaves;
  leaves.W_e = tape.leaf(params.W_e);
  leaves.b_e = tape.leaf(params.b_e);
  leaves.W_t = tape.leaf(params.W_t);
  leaves.b_t = tape.leaf(params.b_t);
  return leaves;
}

NodeId embed_features(Tape& tape, NodeId x, const EmbedLeaves& p) {
  return tape.add_row(tape.matmul(x, p.W_e), p.b_e);
}

NodeId temporal_encode(Tape& tape, std::span<const double> dt, const EmbedLeaves& p,
                       bool log1p_dt) {
  std::vector<double> col(dt.size());
  for (std::size_t i = 0; i < dt.size(); ++i) {
    if (dt[i] < 0.0) {
      throw ContractError("temporal_encode: negative gap at position " + std::to_string(i));
    }
    col[i] = log1p_dt ? std::log1p(dt[i]) : dt[i];
  }
  NodeId dt_col = tape.leaf(Tensor2(static_cast<int>(dt.size()), 1, std::move(col)));
  return tape.relu(tape.add_row(tape.matmul(dt_col, p.W_t), p.b_t));
}

NodeId combine(Tape& tape, NodeId h0, NodeId tmat) { return tape.add(h0, tmat); }

}  // namespace riskformer
