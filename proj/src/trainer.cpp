#include "riskformer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "riskformer/config.hpp"
#include "riskformer/errors.hpp"
#include "riskformer/rng.hpp"

namespace riskformer {

namespace {

// substream indices within a training seed
constexpr std::uint64_t kSplitStream = 0;
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kEpochStreamBase = 100;

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

Tensor2 xavier(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform_symmetric(bound);
  return t;
}

}  // namespace

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ConfigError("train: lr must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError("train: beta1 must be in [0,1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("train: beta2 must be in [0,1)");
  if (eps <= 0.0) throw ConfigError("train: eps must be > 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (val_fraction <= 0.0 || val_fraction >= 1.0) {
    throw ConfigError("train: val_fraction must be in (0,1)");
  }
}

OptimState OptimState::like(std::span<Tensor2* const> blocks) {
  OptimState state;
  state.m.reserve(blocks.size());
  state.v.reserve(blocks.size());
  for (const Tensor2* b : blocks) {
    state.m.emplace_back(b->rows(), b->cols());
    state.v.emplace_back(b->rows(), b->cols());
  }
  return state;
}

void adam_step(std::span<Tensor2* const> params, std::span<const Tensor2> grads,
               OptimState& state, const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " grads vs " +
                     std::to_string(state.m.size()) + " moment blocks");
  }
  ++state.t;
  const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t b = 0; b < params.size(); ++b) {
    Tensor2& p = *params[b];
    const Tensor2& g = grads[b];
    if (!p.same_shape(g)) {
      throw ShapeError("adam_step: block " + std::to_string(b) + " shape " + p.shape_str() +
                       " vs gradient " + g.shape_str());
    }
    Tensor2& m = state.m[b];
    Tensor2& v = state.v[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g.data()[i];
      m.data()[i] = cfg.beta1 * m.data()[i] + (1.0 - cfg.beta1) * gi;
      v.data()[i] = cfg.beta2 * v.data()[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = m.data()[i] / corr1;
      const double vhat = v.data()[i] / corr2;
      p.data()[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

namespace {

struct EvalOutput {
  double loss = 0.0;
  std::vector<double> preds;  // in idx order
};

EvalOutput evaluate_indices(const GraphBuilder& builder, std::span<const std::size_t> idx,
                            int chunk_size) {
  EvalOutput out;
  out.preds.reserve(idx.size());
  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(chunk_size)) {
    const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(chunk_size));
    Tape tape;
    GraphSpec spec = builder(tape, idx.subspan(start, end - start));
    out.loss += tape.value(spec.loss)(0, 0) * static_cast<double>(end - start);
    for (NodeId y : spec.yhat) out.preds.push_back(tape.value(y)(0, 0));
  }
  out.loss /= static_cast<double>(idx.size());
  return out;
}

}  // namespace

TrainHistory fit_loop(std::span<Tensor2* const> blocks, const GraphBuilder& builder,
                      std::span<const std::size_t> train_idx,
                      std::span<const std::size_t> val_idx, std::span<const int> labels,
                      const TrainConfig& cfg) {
  cfg.validate();
  if (train_idx.empty() || val_idx.empty()) {
    throw ContractError("fit_loop: empty train or validation index set");
  }

  OptimState state = OptimState::like(blocks);
  TrainHistory history;

  std::vector<int> val_labels;
  val_labels.reserve(val_idx.size());
  for (std::size_t i : val_idx) val_labels.push_back(labels[i]);

  history.initial_train_loss = evaluate_indices(builder, train_idx, cfg.batch_size).loss;
  {
    EvalOutput ev = evaluate_indices(builder, val_idx, cfg.batch_size);
    history.initial_val_loss = ev.loss;
  }

  std::vector<Tensor2> best_blocks;
  double best_val = std::numeric_limits<double>::infinity();
  int patience_left = cfg.patience;

  std::vector<std::size_t> order(train_idx.begin(), train_idx.end());
  std::vector<Tensor2> grads;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(substream(cfg.seed, kEpochStreamBase + static_cast<std::uint64_t>(epoch)));
    std::copy(train_idx.begin(), train_idx.end(), order.begin());
    shuffle_indices(order, shuffle_rng);

    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Tape tape;
      GraphSpec spec =
          builder(tape, std::span<const std::size_t>(order).subspan(start, end - start));
      if (spec.params.size() != blocks.size()) {
        throw ContractError("fit_loop: graph registered " + std::to_string(spec.params.size()) +
                            " parameter leaves for " + std::to_string(blocks.size()) + " blocks");
      }
      const double loss = tape.value(spec.loss)(0, 0);
      if (!std::isfinite(loss)) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                              " (non-finite loss)");
      }
      train_loss += loss * static_cast<double>(end - start);
      tape.backward(spec.loss);
      grads.clear();
      for (NodeId id : spec.params) grads.push_back(tape.grad(id));
      adam_step(blocks, grads, state, cfg);
    }
    train_loss /= static_cast<double>(order.size());

    EvalOutput ev = evaluate_indices(builder, val_idx, cfg.batch_size);
    if (!std::isfinite(ev.loss)) {
      throw DivergenceError("validation loss non-finite at epoch " + std::to_string(epoch));
    }
    EpochStats stats;
    stats.train_loss = train_loss;
    stats.val_loss = ev.loss;
    stats.val_metrics = compute_metrics(confusion(ev.preds, val_labels, cfg.threshold));
    history.epochs.push_back(stats);
    history.stopped_epoch = epoch;

    if (ev.loss < best_val) {
      best_val = ev.loss;
      history.best_epoch = epoch;
      best_blocks.clear();
      for (const Tensor2* b : blocks) best_blocks.push_back(*b);
      patience_left = cfg.patience;
    } else if (--patience_left == 0) {
      break;
    }
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) *blocks[b] = best_blocks[b];
  return history;
}

ModelParams init_params(const ModelConfig& config, int d_in, std::uint64_t seed) {
  config.validate();
  if (d_in < 1) throw ConfigError("init_params: d_in must be >= 1");

  Rng rng(seed);
  ModelParams p;
  p.config = config;
  p.d_in = d_in;

  const int d_m = config.d_m;
  const int d_k = config.encoder().d_k();
  const int d_ff = config.encoder().ffn_dim();
  const int d_a = config.pool_dim();

  p.embed.W_e = xavier(d_in, d_m, rng);
  p.embed.b_e = Tensor2(1, d_m);
  p.embed.W_t = xavier(1, d_m, rng);
  // positive so the dt=0 anchor rows start on the active side of the relu;
  // an exactly-zero pre-activation is a kink where finite differences and
  // the relu'(0)=0 convention cannot agree
  p.embed.b_t = Tensor2::full(1, d_m, 0.1);

  for (int l = 0; l < config.n_layers; ++l) {
    EncoderLayerParams layer;
    layer.ffn_enabled = config.ffn_enabled;
    for (int h = 0; h < config.n_heads; ++h) {
      layer.W_Q.push_back(xavier(d_m, d_k, rng));
      layer.W_K.push_back(xavier(d_m, d_k, rng));
      layer.W_V.push_back(xavier(d_m, d_k, rng));
    }
    layer.W_O = xavier(d_m, d_m, rng);
    layer.ln1_gamma = Tensor2::full(1, d_m, 1.0);
    layer.ln1_beta = Tensor2(1, d_m);
    if (config.ffn_enabled) {
      layer.W1 = xavier(d_m, d_ff, rng);
      layer.b1 = Tensor2(1, d_ff);
      layer.W2 = xavier(d_ff, d_m, rng);
      layer.b2 = Tensor2(1, d_m);
      layer.ln2_gamma = Tensor2::full(1, d_m, 1.0);
      layer.ln2_beta = Tensor2(1, d_m);
    }
    p.layers.push_back(std::move(layer));
  }

  p.pool.W_a = xavier(d_m, d_a, rng);
  p.pool.v = xavier(d_a, 1, rng);
  p.head.W_c = xavier(d_m, 1, rng);
  p.head.b_c = Tensor2(1, 1);
  return p;
}

SplitIndices split_cohort(std::size_t n, const TrainConfig& cfg) {
  const std::size_t n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(n))));
  if (n_val >= n) throw ConfigError("train: cohort too small for the validation split");
  const std::size_t n_train = n - n_val;
  if (n_train < static_cast<std::size_t>(cfg.batch_size)) {
    throw ConfigError("train: training split (" + std::to_string(n_train) +
                      ") smaller than one batch (" + std::to_string(cfg.batch_size) + ")");
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng split_rng(substream(cfg.seed, kSplitStream));
  shuffle_indices(perm, split_rng);

  SplitIndices split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return split;
}

TrainResult train(const Cohort& cohort, const ModelConfig& model_config,
                  const TrainConfig& train_config) {
  model_config.validate();
  train_config.validate();

  SplitIndices split = split_cohort(cohort.size(), train_config);
  std::vector<std::size_t>& train_idx = split.train;
  std::vector<std::size_t>& val_idx = split.val;

  Cohort train_split;
  train_split.reserve(train_idx.size());
  for (std::size_t i : train_idx) train_split.push_back(cohort[i]);
  FeatureSpace fs = fit_feature_space(train_split, model_config.vocab_size);

  std::vector<VectorizedSequence> vseqs;
  vseqs.reserve(cohort.size());
  std::vector<int> labels;
  labels.reserve(cohort.size());
  for (const PatientSequence& seq : cohort) {
    vseqs.push_back(vectorize(seq, fs));
    labels.push_back(seq.label);
  }

  TrainResult result;
  result.feature_space = fs;
  result.model = init_params(model_config, fs.d_in(), substream(train_config.seed, kInitStream));

  auto blocks_named = param_blocks(result.model);
  std::vector<Tensor2*> blocks;
  blocks.reserve(blocks_named.size());
  for (auto& [name, tensor] : blocks_named) blocks.push_back(tensor);

  const ModelConfig& mc = result.model.config;
  ModelParams& model = result.model;
  GraphBuilder builder = [&model, &mc, &vseqs](Tape& tape, std::span<const std::size_t> idx) {
    ModelLeaves leaves = register_model(tape, model);
    GraphSpec spec;
    spec.params = leaves.flat;
    std::vector<int> batch_labels;
    batch_labels.reserve(idx.size());
    for (std::size_t i : idx) {
      const VectorizedSequence& v = vseqs[i];
      spec.yhat.push_back(sequence_probability(tape, leaves, mc, v.X, v.dt, {}));
      batch_labels.push_back(v.label);
    }
    spec.loss = bce_loss(tape, spec.yhat, batch_labels);
    return spec;
  };

  result.history = fit_loop(blocks, builder, train_idx, val_idx, labels, train_config);
  return result;
}

nlohmann::json to_json(const TrainHistory& history) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochStats& e : history.epochs) {
    epochs.push_back({{"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"val_metrics", to_json(e.val_metrics)}});
  }
  return nlohmann::json{{"initial_train_loss", history.initial_train_loss},
                        {"initial_val_loss", history.initial_val_loss},
                        {"best_epoch", history.best_epoch},
                        {"stopped_epoch", history.stopped_epoch},
                        {"epochs", std::move(epochs)}};
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, tensor] : param_blocks(ckpt.model)) {
    params[name] = {{"rows", tensor->rows()}, {"cols", tensor->cols()}, {"data", tensor->values()}};
  }
  nlohmann::json j{{"format_version", kCheckpointFormatVersion},
                   {"model_config", to_json(ckpt.model.config)},
                   {"d_in", ckpt.model.d_in},
                   {"feature_space", to_json(ckpt.feature_space)},
                   {"train_config", to_json(ckpt.train_config)},
                   {"seed", ckpt.seed},
                   {"metrics_at_best", to_json(ckpt.metrics_at_best)},
                   {"params", std::move(params)}};
  std::ofstream out(path);
  if (!out) throw IntegrityError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IntegrityError("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IntegrityError("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("checkpoint '" + path + "' is corrupt: " + e.what());
  }

  if (!j.contains("format_version")) {
    throw IntegrityError("checkpoint '" + path + "' has no format_version");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointFormatVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       ", this build supports version " +
                       std::to_string(kCheckpointFormatVersion));
  }

  try {
    const ModelConfig config = model_config_from_json(j.at("model_config"));
    const int d_in = j.at("d_in").get<int>();

    Checkpoint ckpt;
    // shape skeleton, then overwrite every block from the file
    ckpt.model = init_params(config, d_in, 0);
    ckpt.feature_space = feature_space_from_json(j.at("feature_space"));
    ckpt.train_config = train_config_from_json(j.at("train_config"));
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    ckpt.metrics_at_best = metrics_from_json(j.at("metrics_at_best"));

    const nlohmann::json& params = j.at("params");
    auto blocks = param_blocks(ckpt.model);
    if (params.size() != blocks.size()) {
      throw IntegrityError("checkpoint '" + path + "' has " + std::to_string(params.size()) +
                           " parameter blocks, expected " + std::to_string(blocks.size()));
    }
    for (auto& [name, tensor] : blocks) {
      if (!params.contains(name)) {
        throw IntegrityError("checkpoint '" + path + "' is missing block '" + name + "'");
      }
      const nlohmann::json& block = params.at(name);
      const int rows = block.at("rows").get<int>();
      const int cols = block.at("cols").get<int>();
      if (rows != tensor->rows() || cols != tensor->cols()) {
        throw IntegrityError("checkpoint block '" + name + "' has shape " + std::to_string(rows) +
                             "x" + std::to_string(cols) + ", expected " + tensor->shape_str());
      }
      *tensor = Tensor2(rows, cols, block.at("data").get<std::vector<double>>());
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("checkpoint '" + path + "' is corrupt: " + e.what());
  }
}

GradAuditReport gradient_audit(ModelParams& model, const Batch& batch, double h, double tol) {
  auto named = param_blocks(model);
  std::vector<ParamBlock> blocks;
  blocks.reserve(named.size());
  for (auto& [name, tensor] : named) blocks.push_back({name, tensor});

  std::vector<Tensor2> analytic;
  {
    Tape tape;
    ModelLeaves leaves = register_model(tape, model);
    BatchGraph graph = batch_graph(tape, leaves, model.config, batch);
    tape.backward(graph.loss);
    analytic.reserve(leaves.flat.size());
    for (NodeId id : leaves.flat) analytic.push_back(tape.grad(id));
  }

  auto f = [&model, &batch]() {
    Tape tape;
    ModelLeaves leaves = register_model(tape, model);
    BatchGraph graph = batch_graph(tape, leaves, model.config, batch);
    return tape.value(graph.loss)(0, 0);
  };
  return grad_check(f, blocks, analytic, h, tol);
}

nlohmann::json to_json(const GradAuditReport& report) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const GradAuditBlock& b : report.blocks) {
    blocks.push_back({{"name", b.name},
                      {"max_rel_error", b.max_rel_error},
                      {"argmax_index", b.argmax_index},
                      {"analytic", b.analytic_at_argmax},
                      {"numeric", b.numeric_at_argmax}});
  }
  return nlohmann::json{{"pass", report.pass},
                        {"h", report.step},
                        {"tol", report.tolerance},
                        {"blocks", std::move(blocks)}};
}

std::string format_report(const GradAuditReport& report) {
  std::ostringstream out;
  out << "gradient audit: " << (report.pass ? "PASS" : "FAIL") << " (h=" << report.step
      << ", tol=" << report.tolerance << ")\n";
  for (const GradAuditBlock& b : report.blocks) {
    out << "  " << (b.max_rel_error < report.tolerance ? "ok  " : "FAIL") << "  " << b.name
        << "  max_rel_error=" << b.max_rel_error << "  (analytic=" << b.analytic_at_argmax
        << ", numeric=" << b.numeric_at_argmax << " at index " << b.argmax_index << ")\n";
  }
  return out.str();
}

}  // namespace riskformer
