#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "riskformer/tensor.hpp"

namespace riskformer {

using NodeId = std::int32_t;

enum class ActKind { kRelu, kSigmoid, kTanh };

// Recorded forward computation over Tensor2 values with exact reverse-mode
// gradients. Construction order is the topological order; backward walks it
// once in reverse. Activations are saved eagerly on each node.
//
// Single-threaded per tape; node values are immutable once written.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  NodeId leaf(Tensor2 value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  // Elementwise product of same-shape operands.
  NodeId hadamard(NodeId a, NodeId b);
  // Broadcasts a 1xN row vector over every row of m.
  NodeId add_row(NodeId m, NodeId row);
  NodeId scale(NodeId a, double factor);
  NodeId activation(ActKind kind, NodeId a);
  NodeId relu(NodeId a) { return activation(ActKind::kRelu, a); }
  NodeId sigmoid(NodeId a) { return activation(ActKind::kSigmoid, a); }
  NodeId tanh(NodeId a) { return activation(ActKind::kTanh, a); }
  // Row-wise softmax with max subtraction; -inf sentinel entries map to
  // exactly 0. A row with no finite entry raises DegenerateRowError.
  NodeId softmax_rows(NodeId a);
  // Per-row layer normalization with population (1/d) variance.
  // gamma and beta are 1xd rows.
  NodeId layer_norm_rows(NodeId x, NodeId gamma, NodeId beta, double eps);
  NodeId transpose(NodeId a);
  NodeId concat_cols(std::span<const NodeId> parts);
  // Stacks k 1x1 nodes into a kx1 column.
  NodeId stack_scalars(std::span<const NodeId> scalars);
  NodeId sum_all(NodeId a);
  // Sets entries in columns with valid[j]==0 to -inf (additive mask sentinel).
  NodeId mask_cols(NodeId a, std::vector<std::uint8_t> valid);
  // Mean binary cross-entropy of a kx1 probability column against labels,
  // with probabilities clamped to [1e-7, 1-1e-7].
  NodeId bce_mean(NodeId probs, std::vector<double> labels);

  // Stable reference: recording further ops does not invalidate it.
  const Tensor2& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  std::size_t size() const { return nodes_.size(); }

  // Populates gradients of every node w.r.t. the scalar at `loss`.
  // Accumulation is summation over all uses; nodes that do not reach the
  // loss keep a zero gradient.
  void backward(NodeId loss);
  const Tensor2& grad(NodeId id) const;

  static constexpr double kBceClamp = 1e-7;

 private:
  enum class Op {
    kLeaf,
    kMatmul,
    kAdd,
    kHadamard,
    kAddRow,
    kScale,
    kRelu,
    kSigmoid,
    kTanh,
    kSoftmaxRows,
    kLayerNormRows,
    kTranspose,
    kConcatCols,
    kStackScalars,
    kSumAll,
    kMaskCols,
    kBceMean,
  };

  struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    NodeId c = -1;
    std::vector<NodeId> inputs;  // concat/stack only
    Tensor2 value;
    double param = 0.0;       // scale factor or layer-norm eps
    std::vector<double> aux;  // mask (as 0/1) or bce labels
  };

  NodeId push(Node node);
  const Tensor2& val(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  void check_id(NodeId id) const;
  void accumulate(NodeId id, const Tensor2& delta);
  Tensor2& grad_buf(NodeId id);

  std::deque<Node> nodes_;  // deque: node references stay valid as the tape grows
  std::vector<Tensor2> grads_;
  std::vector<std::uint8_t> touched_;
};

}  // namespace riskformer
