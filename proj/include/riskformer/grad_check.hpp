#pragma once

#include <functional>
#include <string>
#include <vector>

#include "riskformer/tensor.hpp"

namespace riskformer {

struct ParamBlock {
  std::string name;
  Tensor2* tensor;  // mutated in place during the numeric sweep, then restored
};

struct GradAuditBlock {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t argmax_index = 0;  // flat row-major index within the block
  double analytic_at_argmax = 0.0;
  double numeric_at_argmax = 0.0;
};

struct GradAuditReport {
  std::vector<GradAuditBlock> blocks;
  bool pass = false;
  double step = 0.0;
  double tolerance = 0.0;
};

// Central-difference audit of analytic gradients.
//
// `f` evaluates the scalar objective at the blocks' current values and must be
// deterministic (verified with two baseline evaluations; a mismatch raises
// AuditError). For every entry theta the numeric gradient uses step
// h' = h*max(1, |theta|) and the comparison is
//   rel = |a - n| / max(|a|, |n|, 1e-12).
// The report passes iff every block's max rel error is below tol.
GradAuditReport grad_check(const std::function<double()>& f,
                           const std::vector<ParamBlock>& blocks,
                           const std::vector<Tensor2>& analytic_grads, double h, double tol);

}  // namespace riskformer
