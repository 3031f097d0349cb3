#include "riskformer/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "riskformer/errors.hpp"

namespace riskformer {

GradAuditReport grad_check(const std::function<double()>& f,
                           const std::vector<ParamBlock>& blocks,
                           const std::vector<Tensor2>& analytic_grads, double h, double tol) {
  if (h <= 0.0) throw ContractError("grad_check: step h must be positive");
  if (blocks.size() != analytic_grads.size()) {
    throw ContractError("grad_check: " + std::to_string(blocks.size()) + " blocks vs " +
                        std::to_string(analytic_grads.size()) + " gradient blocks");
  }

  const double base1 = f();
  const double base2 = f();
  if (std::memcmp(&base1, &base2, sizeof(double)) != 0) {
    throw AuditError("grad_check: objective is not deterministic (baselines differ)");
  }

  GradAuditReport report;
  report.step = h;
  report.tolerance = tol;
  report.pass = true;

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const ParamBlock& block = blocks[b];
    const Tensor2& analytic = analytic_grads[b];
    if (!block.tensor->same_shape(analytic)) {
      throw ShapeError("grad_check: block '" + block.name + "' shape " +
                       block.tensor->shape_str() + " vs gradient " + analytic.shape_str());
    }
    GradAuditBlock result;
    result.name = block.name;
    double* data = block.tensor->data();
    for (std::size_t i = 0; i < block.tensor->size(); ++i) {
      const double theta = data[i];
      const double step = h * std::max(1.0, std::abs(theta));
      data[i] = theta + step;
      const double fp = f();
      data[i] = theta - step;
      const double fm = f();
      data[i] = theta;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic.data()[i];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-12});
      if (rel >= result.max_rel_error) {
        result.max_rel_error = rel;
        result.argmax_index = i;
        result.analytic_at_argmax = a;
        result.numeric_at_argmax = numeric;
      }
    }
    if (result.max_rel_error >= tol) report.pass = false;
    report.blocks.push_back(std::move(result));
  }
  return report;
}

}  // namespace riskformer
