#include "riskformer/baseline.hpp"

#include <cmath>

#include "riskformer/errors.hpp"
#include "riskformer/rng.hpp"

namespace riskformer {

namespace {

Tensor2 xavier(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform_symmetric(bound);
  return t;
}

}  // namespace

std::vector<std::pair<std::string, Tensor2*>> param_blocks(MlpParams& params) {
  return {{"mlp.W1", &params.W1}, {"mlp.b1", &params.b1}, {"mlp.W2", &params.W2},
          {"mlp.b2", &params.b2}, {"mlp.W3", &params.W3}, {"mlp.b3", &params.b3}};
}

MlpParams init_mlp(const MlpConfig& config, int d_in, std::uint64_t seed) {
  if (config.hidden1 < 1 || config.hidden2 < 1) {
    throw ConfigError("mlp: hidden sizes must be >= 1");
  }
  if (d_in < 1) throw ConfigError("mlp: d_in must be >= 1");
  Rng rng(seed);
  MlpParams p;
  p.config = config;
  p.d_in = d_in;
  p.W1 = xavier(d_in, config.hidden1, rng);
  p.b1 = Tensor2(1, config.hidden1);
  p.W2 = xavier(config.hidden1, config.hidden2, rng);
  p.b2 = Tensor2(1, config.hidden2);
  p.W3 = xavier(config.hidden2, 1, rng);
  p.b3 = Tensor2(1, 1);
  return p;
}

MlpLeaves register_mlp(Tape& tape, const MlpParams& params) {
  MlpLeaves leaves;
  leaves.W1 = tape.leaf(params.W1);
  leaves.b1 = tape.leaf(params.b1);
  leaves.W2 = tape.leaf(params.W2);
  leaves.b2 = tape.leaf(params.b2);
  leaves.W3 = tape.leaf(params.W3);
  leaves.b3 = tape.leaf(params.b3);
  leaves.flat = {leaves.W1, leaves.b1, leaves.W2, leaves.b2, leaves.W3, leaves.b3};
  return leaves;
}

NodeId mlp_probability(Tape& tape, const MlpLeaves& leaves, const Tensor2& pooled) {
  NodeId x = tape.leaf(pooled);
  NodeId h1 = tape.relu(tape.add_row(tape.matmul(x, leaves.W1), leaves.b1));
  NodeId h2 = tape.relu(tape.add_row(tape.matmul(h1, leaves.W2), leaves.b2));
  return tape.sigmoid(tape.add(tape.matmul(h2, leaves.W3), leaves.b3));
}

Tensor2 mean_pool_rows(const VectorizedSequence& vseq) {
  const int T = vseq.X.rows();
  if (T == 0) throw ContractError("mean_pool_rows: empty sequence");
  Tensor2 pooled(1, vseq.X.cols());
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < vseq.X.cols(); ++j) pooled(0, j) += vseq.X(i, j);
  for (int j = 0; j < vseq.X.cols(); ++j) pooled(0, j) /= static_cast<double>(T);
  return pooled;
}

double predict_mlp(const MlpParams& params, const Tensor2& pooled) {
  Tape tape;
  MlpLeaves leaves = register_mlp(tape, params);
  return tape.value(mlp_probability(tape, leaves, pooled))(0, 0);
}

MlpTrainResult train_mlp(const Cohort& cohort, const MlpConfig& mlp_config, int vocab_size,
                         const TrainConfig& train_config) {
  train_config.validate();
  SplitIndices split = split_cohort(cohort.size(), train_config);

  Cohort train_split;
  train_split.reserve(split.train.size());
  for (std::size_t i : split.train) train_split.push_back(cohort[i]);
  FeatureSpace fs = fit_feature_space(train_split, vocab_size);

  std::vector<Tensor2> pooled;
  pooled.reserve(cohort.size());
  std::vector<int> labels;
  labels.reserve(cohort.size());
  for (const PatientSequence& seq : cohort) {
    pooled.push_back(mean_pool_rows(vectorize(seq, fs)));
    labels.push_back(seq.label);
  }

  MlpTrainResult result;
  result.feature_space = fs;
  result.model = init_mlp(mlp_config, fs.d_in(), substream(train_config.seed, 1));

  auto named = param_blocks(result.model);
  std::vector<Tensor2*> blocks;
  for (auto& [name, tensor] : named) blocks.push_back(tensor);

  MlpParams& model = result.model;
  GraphBuilder builder = [&model, &pooled, &labels](Tape& tape,
                                                    std::span<const std::size_t> idx) {
    MlpLeaves leaves = register_mlp(tape, model);
    GraphSpec spec;
    spec.params = leaves.flat;
    std::vector<int> batch_labels;
    batch_labels.reserve(idx.size());
    for (std::size_t i : idx) {
      spec.yhat.push_back(mlp_probability(tape, leaves, pooled[i]));
      batch_labels.push_back(labels[i]);
    }
    spec.loss = bce_loss(tape, spec.yhat, batch_labels);
    return spec;
  };

  result.history = fit_loop(blocks, builder, split.train, split.val, labels, train_config);
  return result;
}

}  // namespace riskformer
