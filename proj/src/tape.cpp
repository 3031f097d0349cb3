#include "riskformer/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "riskformer/errors.hpp"

namespace riskformer {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw ContractError("tape node id " + std::to_string(id) + " out of range");
  }
}

NodeId Tape::leaf(Tensor2 value) {
  Node n; n.op = Op::kLeaf;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n; n.op = Op::kMatmul; n.a = a; n.b = b;
  n.value = riskformer::matmul(val(a), val(b));
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  const Tensor2& x = val(a);
  const Tensor2& y = val(b);
  if (!x.same_shape(y)) {
    throw ShapeError("add: shape mismatch " + x.shape_str() + " vs " + y.shape_str());
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] + y.data()[i];
  Node n; n.op = Op::kAdd; n.a = a; n.b = b;
  n.value = Tensor2::unchecked(x.rows(), x.cols(), std::move(out));
  return push(std::move(n));
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  const Tensor2& x = val(a);
  const Tensor2& y = val(b);
  if (!x.same_shape(y)) {
    throw ShapeError("hadamard: shape mismatch " + x.shape_str() + " vs " + y.shape_str());
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * y.data()[i];
  Node n; n.op = Op::kHadamard; n.a = a; n.b = b;
  n.value = Tensor2::unchecked(x.rows(), x.cols(), std::move(out));
  return push(std::move(n));
}

NodeId Tape::add_row(NodeId m, NodeId row) {
  check_id(m);
  check_id(row);
  const Tensor2& x = val(m);
  const Tensor2& r = val(row);
  if (r.rows() != 1 || r.cols() != x.cols()) {
    throw ShapeError("add_row: row " + r.shape_str() + " does not broadcast over " +
                     x.shape_str());
  }
  Tensor2 out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) + r(0, j);
  Node n; n.op = Op::kAddRow; n.a = m; n.b = row;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double factor) {
  check_id(a);
  if (!std::isfinite(factor)) throw ContractError("scale factor must be finite");
  const Tensor2& x = val(a);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x.data()[i];
  Node n; n.op = Op::kScale; n.a = a;
  n.param = factor;
  n.value = Tensor2::unchecked(x.rows(), x.cols(), std::move(out));
  return push(std::move(n));
}

NodeId Tape::activation(ActKind kind, NodeId a) {
  check_id(a);
  const Tensor2& x = val(a);
  std::vector<double> out(x.size());
  Op op = Op::kRelu;
  switch (kind) {
    case ActKind::kRelu:
      op = Op::kRelu;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
      break;
    case ActKind::kSigmoid:
      op = Op::kSigmoid;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x.data()[i]));
      break;
    case ActKind::kTanh:
      op = Op::kTanh;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.data()[i]);
      break;
  }
  Node n; n.op = op; n.a = a;
  n.value = Tensor2::unchecked(x.rows(), x.cols(), std::move(out));
  return push(std::move(n));
}

NodeId Tape::softmax_rows(NodeId a) {
  check_id(a);
  const Tensor2& x = val(a);
  Tensor2 out(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    double mx = kNegInf;
    for (int j = 0; j < x.cols(); ++j) mx = std::max(mx, x(i, j));
    if (mx == kNegInf) {
      throw DegenerateRowError("softmax_rows: row " + std::to_string(i) +
                               " has no finite entry (fully masked)");
    }
    double sum = 0.0;
    for (int j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      const double e = v == kNegInf ? 0.0 : std::exp(v - mx);
      out(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < x.cols(); ++j) out(i, j) /= sum;
  }
  Node n; n.op = Op::kSoftmaxRows; n.a = a;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::layer_norm_rows(NodeId x, NodeId gamma, NodeId beta, double eps) {
  check_id(x);
  check_id(gamma);
  check_id(beta);
  if (eps <= 0.0) throw ContractError("layer_norm eps must be positive");
  const Tensor2& in = val(x);
  const Tensor2& g = val(gamma);
  const Tensor2& b = val(beta);
  const int d = in.cols();
  if (g.rows() != 1 || g.cols() != d || b.rows() != 1 || b.cols() != d) {
    throw ShapeError("layer_norm: gamma " + g.shape_str() + " / beta " + b.shape_str() +
                     " do not match row width " + std::to_string(d));
  }
  Tensor2 out(in.rows(), d);
  for (int i = 0; i < in.rows(); ++i) {
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += in(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = in(i, j) - mean;
      var += c * c;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < d; ++j) out(i, j) = g(0, j) * (in(i, j) - mean) * inv + b(0, j);
  }
  Node n; n.op = Op::kLayerNormRows; n.a = x; n.b = gamma; n.c = beta;
  n.param = eps;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
  check_id(a);
  const Tensor2& x = val(a);
  Tensor2 out(x.cols(), x.rows());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  Node n; n.op = Op::kTranspose; n.a = a;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::concat_cols(std::span<const NodeId> parts) {
  if (parts.empty()) throw ContractError("concat_cols: empty input list");
  int rows = -1, cols = 0;
  for (NodeId id : parts) {
    check_id(id);
    const Tensor2& t = val(id);
    if (rows < 0) rows = t.rows();
    if (t.rows() != rows) {
      throw ShapeError("concat_cols: row count mismatch (" + std::to_string(rows) + " vs " +
                       std::to_string(t.rows()) + ")");
    }
    cols += t.cols();
  }
  Tensor2 out(rows, cols);
  int offset = 0;
  for (NodeId id : parts) {
    const Tensor2& t = val(id);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < t.cols(); ++j) out(i, offset + j) = t(i, j);
    offset += t.cols();
  }
  Node n; n.op = Op::kConcatCols;
  n.inputs.assign(parts.begin(), parts.end());
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::stack_scalars(std::span<const NodeId> scalars) {
  if (scalars.empty()) throw ContractError("stack_scalars: empty input list");
  Tensor2 out(static_cast<int>(scalars.size()), 1);
  for (std::size_t k = 0; k < scalars.size(); ++k) {
    check_id(scalars[k]);
    const Tensor2& t = val(scalars[k]);
    if (t.rows() != 1 || t.cols() != 1) {
      throw ShapeError("stack_scalars: input " + std::to_string(k) + " has shape " +
                       t.shape_str() + ", expected 1x1");
    }
    out(static_cast<int>(k), 0) = t(0, 0);
  }
  Node n; n.op = Op::kStackScalars;
  n.inputs.assign(scalars.begin(), scalars.end());
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId a) {
  check_id(a);
  const Tensor2& x = val(a);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x.data()[i];
  Node n; n.op = Op::kSumAll; n.a = a;
  n.value = Tensor2::unchecked(1, 1, {s});
  return push(std::move(n));
}

NodeId Tape::mask_cols(NodeId a, std::vector<std::uint8_t> valid) {
  check_id(a);
  const Tensor2& x = val(a);
  if (static_cast<int>(valid.size()) != x.cols()) {
    throw ShapeError("mask_cols: mask length " + std::to_string(valid.size()) +
                     " does not match column count " + std::to_string(x.cols()));
  }
  std::vector<double> out(x.size());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      out[static_cast<std::size_t>(i) * x.cols() + j] = valid[j] ? x(i, j) : kNegInf;
  Node n; n.op = Op::kMaskCols; n.a = a;
  n.aux.assign(valid.begin(), valid.end());
  n.value = Tensor2::unchecked(x.rows(), x.cols(), std::move(out));
  return push(std::move(n));
}

NodeId Tape::bce_mean(NodeId probs, std::vector<double> labels) {
  check_id(probs);
  const Tensor2& p = val(probs);
  if (p.cols() != 1) {
    throw ShapeError("bce_mean: expected a kx1 probability column, got " + p.shape_str());
  }
  if (static_cast<int>(labels.size()) != p.rows()) {
    throw ShapeError("bce_mean: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(p.rows()) + " probabilities");
  }
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw ContractError("bce_mean: label outside {0,1}");
  }
  double loss = 0.0;
  for (int i = 0; i < p.rows(); ++i) {
    const double c = std::clamp(p(i, 0), kBceClamp, 1.0 - kBceClamp);
    loss += labels[static_cast<std::size_t>(i)] == 1.0 ? -std::log(c) : -std::log(1.0 - c);
  }
  loss /= p.rows();
  Node n; n.op = Op::kBceMean; n.a = probs;
  n.aux = std::move(labels);
  n.value = Tensor2::unchecked(1, 1, {loss});
  return push(std::move(n));
}

Tensor2& Tape::grad_buf(NodeId id) { return grads_[static_cast<std::size_t>(id)]; }

void Tape::accumulate(NodeId id, const Tensor2& delta) {
  Tensor2& g = grad_buf(id);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += delta.data()[i];
  touched_[static_cast<std::size_t>(id)] = 1;
}

const Tensor2& Tape::grad(NodeId id) const {
  check_id(id);
  if (grads_.size() != nodes_.size()) {
    throw ContractError("grad() called before backward()");
  }
  return grads_[static_cast<std::size_t>(id)];
}

void Tape::backward(NodeId loss) {
  check_id(loss);
  const Tensor2& lv = val(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss node has shape " + lv.shape_str() + ", expected 1x1");
  }

  grads_.clear();
  grads_.reserve(nodes_.size());
  for (const Node& n : nodes_) grads_.emplace_back(n.value.rows(), n.value.cols());
  touched_.assign(nodes_.size(), 0);

  grad_buf(loss)(0, 0) = 1.0;
  touched_[static_cast<std::size_t>(loss)] = 1;

  for (NodeId id = loss; id >= 0; --id) {
    if (!touched_[static_cast<std::size_t>(id)]) continue;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const Tensor2& gout = grad_buf(id);
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatmul: {
        accumulate(n.a, matmul_nt(gout, val(n.b)));
        accumulate(n.b, matmul_tn(val(n.a), gout));
        break;
      }
      case Op::kAdd: {
        accumulate(n.a, gout);
        accumulate(n.b, gout);
        break;
      }
      case Op::kHadamard: {
        const Tensor2& x = val(n.a);
        const Tensor2& y = val(n.b);
        Tensor2 ga(x.rows(), x.cols());
        Tensor2 gb(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.size(); ++i) {
          ga.data()[i] = gout.data()[i] * y.data()[i];
          gb.data()[i] = gout.data()[i] * x.data()[i];
        }
        accumulate(n.a, ga);
        accumulate(n.b, gb);
        break;
      }
      case Op::kAddRow: {
        accumulate(n.a, gout);
        Tensor2 gr(1, gout.cols());
        for (int i = 0; i < gout.rows(); ++i)
          for (int j = 0; j < gout.cols(); ++j) gr(0, j) += gout(i, j);
        accumulate(n.b, gr);
        break;
      }
      case Op::kScale: {
        Tensor2 gx(gout.rows(), gout.cols());
        for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] = n.param * gout.data()[i];
        accumulate(n.a, gx);
        break;
      }
      case Op::kRelu: {
        const Tensor2& x = val(n.a);
        Tensor2 gx(gout.rows(), gout.cols());
        // relu'(0) := 0
        for (std::size_t i = 0; i < gx.size(); ++i)
          gx.data()[i] = x.data()[i] > 0.0 ? gout.data()[i] : 0.0;
        accumulate(n.a, gx);
        break;
      }
      case Op::kSigmoid: {
        const Tensor2& y = n.value;
        Tensor2 gx(gout.rows(), gout.cols());
        for (std::size_t i = 0; i < gx.size(); ++i) {
          const double s = y.data()[i];
          gx.data()[i] = gout.data()[i] * s * (1.0 - s);
        }
        accumulate(n.a, gx);
        break;
      }
      case Op::kTanh: {
        const Tensor2& y = n.value;
        Tensor2 gx(gout.rows(), gout.cols());
        for (std::size_t i = 0; i < gx.size(); ++i) {
          const double t = y.data()[i];
          gx.data()[i] = gout.data()[i] * (1.0 - t * t);
        }
        accumulate(n.a, gx);
        break;
      }
      case Op::kSoftmaxRows: {
        const Tensor2& y = n.value;
        Tensor2 gx(y.rows(), y.cols());
        for (int i = 0; i < y.rows(); ++i) {
          double dot = 0.0;
          for (int j = 0; j < y.cols(); ++j) dot += gout(i, j) * y(i, j);
          for (int j = 0; j < y.cols(); ++j) gx(i, j) = y(i, j) * (gout(i, j) - dot);
        }
        accumulate(n.a, gx);
        break;
      }
      case Op::kLayerNormRows: {
        const Tensor2& x = val(n.a);
        const Tensor2& g = val(n.b);
        const int d = x.cols();
        Tensor2 gx(x.rows(), d);
        Tensor2 ggamma(1, d);
        Tensor2 gbeta(1, d);
        for (int i = 0; i < x.rows(); ++i) {
          double mean = 0.0;
          for (int j = 0; j < d; ++j) mean += x(i, j);
          mean /= d;
          double var = 0.0;
          for (int j = 0; j < d; ++j) {
            const double c = x(i, j) - mean;
            var += c * c;
          }
          var /= d;
          const double inv = 1.0 / std::sqrt(var + n.param);
          double m1 = 0.0, m2 = 0.0;
          for (int j = 0; j < d; ++j) {
            const double xhat = (x(i, j) - mean) * inv;
            const double go = gout(i, j);
            ggamma(0, j) += go * xhat;
            gbeta(0, j) += go;
            const double gh = go * g(0, j);
            m1 += gh;
            m2 += gh * xhat;
          }
          m1 /= d;
          m2 /= d;
          for (int j = 0; j < d; ++j) {
            const double xhat = (x(i, j) - mean) * inv;
            const double gh = gout(i, j) * g(0, j);
            gx(i, j) = inv * (gh - m1 - xhat * m2);
          }
        }
        accumulate(n.a, gx);
        accumulate(n.b, ggamma);
        accumulate(n.c, gbeta);
        break;
      }
      case Op::kTranspose: {
        Tensor2 gx(gout.cols(), gout.rows());
        for (int i = 0; i < gout.rows(); ++i)
          for (int j = 0; j < gout.cols(); ++j) gx(j, i) = gout(i, j);
        accumulate(n.a, gx);
        break;
      }
      case Op::kConcatCols: {
        int offset = 0;
        for (NodeId part : n.inputs) {
          const Tensor2& t = val(part);
          Tensor2 gp(t.rows(), t.cols());
          for (int i = 0; i < t.rows(); ++i)
            for (int j = 0; j < t.cols(); ++j) gp(i, j) = gout(i, offset + j);
          accumulate(part, gp);
          offset += t.cols();
        }
        break;
      }
      case Op::kStackScalars: {
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          Tensor2 gs(1, 1);
          gs(0, 0) = gout(static_cast<int>(k), 0);
          accumulate(n.inputs[k], gs);
        }
        break;
      }
      case Op::kSumAll: {
        const Tensor2& x = val(n.a);
        accumulate(n.a, Tensor2::full(x.rows(), x.cols(), gout(0, 0)));
        break;
      }
      case Op::kMaskCols: {
        const Tensor2& x = val(n.a);
        Tensor2 gx(x.rows(), x.cols());
        for (int i = 0; i < x.rows(); ++i)
          for (int j = 0; j < x.cols(); ++j)
            gx(i, j) = n.aux[static_cast<std::size_t>(j)] != 0.0 ? gout(i, j) : 0.0;
        accumulate(n.a, gx);
        break;
      }
      case Op::kBceMean: {
        const Tensor2& p = val(n.a);
        const double go = gout(0, 0) / p.rows();
        Tensor2 gp(p.rows(), 1);
        for (int i = 0; i < p.rows(); ++i) {
          const double raw = p(i, 0);
          if (raw < kBceClamp || raw > 1.0 - kBceClamp) {
            gp(i, 0) = 0.0;  // clamp is flat outside the interval
          } else {
            const double y = n.aux[static_cast<std::size_t>(i)];
            gp(i, 0) = go * (raw - y) / (raw * (1.0 - raw));
          }
        }
        accumulate(n.a, gp);
        break;
      }
    }
  }
}

}  // namespace riskformer
