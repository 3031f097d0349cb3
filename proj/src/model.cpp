#include "riskformer/model.hpp"

#include <utility>

#include "riskformer/errors.hpp"

namespace riskformer {

EncoderConfig ModelConfig::encoder() const {
  EncoderConfig ec;
  ec.d_m = d_m;
  ec.n_heads = n_heads;
  ec.n_layers = n_layers;
  ec.ffn_enabled = ffn_enabled;
  ec.d_ff = d_ff;
  ec.ln_eps = ln_eps;
  return ec;
}

void ModelConfig::validate() const {
  if (vocab_size < 1) throw ConfigError("model: vocab_size must be >= 1");
  if (d_a < 0) throw ConfigError("model: d_a must be >= 0");
  encoder().validate();
}

namespace {

template <typename Params, typename TensorPtr>
std::vector<std::pair<std::string, TensorPtr>> enumerate_blocks(Params& p) {
  std::vector<std::pair<std::string, TensorPtr>> blocks;
  blocks.emplace_back("embed.W_e", &p.embed.W_e);
  blocks.emplace_back("embed.b_e", &p.embed.b_e);
  blocks.emplace_back("embed.W_t", &p.embed.W_t);
  blocks.emplace_back("embed.b_t", &p.embed.b_t);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    const std::string prefix = "enc" + std::to_string(l) + ".";
    for (std::size_t h = 0; h < layer.W_Q.size(); ++h) {
      blocks.emplace_back(prefix + "W_Q" + std::to_string(h), &layer.W_Q[h]);
      blocks.emplace_back(prefix + "W_K" + std::to_string(h), &layer.W_K[h]);
      blocks.emplace_back(prefix + "W_V" + std::to_string(h), &layer.W_V[h]);
    }
    blocks.emplace_back(prefix + "W_O", &layer.W_O);
    blocks.emplace_back(prefix + "ln1.gamma", &layer.ln1_gamma);
    blocks.emplace_back(prefix + "ln1.beta", &layer.ln1_beta);
    if (layer.ffn_enabled) {
      blocks.emplace_back(prefix + "ffn.W1", &layer.W1);
      blocks.emplace_back(prefix + "ffn.b1", &layer.b1);
      blocks.emplace_back(prefix + "ffn.W2", &layer.W2);
      blocks.emplace_back(prefix + "ffn.b2", &layer.b2);
      blocks.emplace_back(prefix + "ln2.gamma", &layer.ln2_gamma);
      blocks.emplace_back(prefix + "ln2.beta", &layer.ln2_beta);
    }
  }
  blocks.emplace_back("pool.W_a", &p.pool.W_a);
  blocks.emplace_back("pool.v", &p.pool.v);
  blocks.emplace_back("cls.W_c", &p.head.W_c);
  blocks.emplace_back("cls.b_c", &p.head.b_c);
  return blocks;
}

}  // namespace

std::vector<std::pair<std::string, Tensor2*>> param_blocks(ModelParams& params) {
  return enumerate_blocks<ModelParams, Tensor2*>(params);
}

std::vector<std::pair<std::string, const Tensor2*>> param_blocks(const ModelParams& params) {
  return enumerate_blocks<const ModelParams, const Tensor2*>(params);
}

std::size_t param_count(const ModelParams& params) {
  std::size_t n = 0;
  for (const auto& [name, tensor] : param_blocks(params)) n += tensor->size();
  return n;
}

ModelLeaves register_model(Tape& tape, const ModelParams& params) {
  ModelLeaves leaves;
  leaves.embed = register_embed(tape, params.embed);
  for (const EncoderLayerParams& layer : params.layers) {
    leaves.layers.push_back(register_layer(tape, layer));
  }
  leaves.pool = register_pool(tape, params.pool);
  leaves.head = register_head(tape, params.head);

  leaves.flat = {leaves.embed.W_e, leaves.embed.b_e, leaves.embed.W_t, leaves.embed.b_t};
  for (const EncoderLayerLeaves& layer : leaves.layers) {
    for (std::size_t h = 0; h < layer.W_Q.size(); ++h) {
      leaves.flat.push_back(layer.W_Q[h]);
      leaves.flat.push_back(layer.W_K[h]);
      leaves.flat.push_back(layer.W_V[h]);
    }
    leaves.flat.push_back(layer.W_O);
    leaves.flat.push_back(layer.ln1_gamma);
    leaves.flat.push_back(layer.ln1_beta);
    if (layer.ffn_enabled) {
      leaves.flat.push_back(layer.W1);
      leaves.flat.push_back(layer.b1);
      leaves.flat.push_back(layer.W2);
      leaves.flat.push_back(layer.b2);
      leaves.flat.push_back(layer.ln2_gamma);
      leaves.flat.push_back(layer.ln2_beta);
    }
  }
  leaves.flat.push_back(leaves.pool.W_a);
  leaves.flat.push_back(leaves.pool.v);
  leaves.flat.push_back(leaves.head.W_c);
  leaves.flat.push_back(leaves.head.b_c);
  return leaves;
}

NodeId sequence_probability(Tape& tape, const ModelLeaves& leaves, const ModelConfig& config,
                            const Tensor2& x, std::span<const double> dt,
                            const std::vector<std::uint8_t>& mask) {
  if (static_cast<int>(dt.size()) != x.rows()) {
    throw ShapeError("sequence_probability: dt length " + std::to_string(dt.size()) +
                     " does not match " + std::to_string(x.rows()) + " rows");
  }
  NodeId xn = tape.leaf(x);
  NodeId h0 = embed_features(tape, xn, leaves.embed);
  NodeId tm = temporal_encode(tape, dt, leaves.embed, config.dt_log1p);
  NodeId h = combine(tape, h0, tm);
  h = encode(tape, h, leaves.layers, mask, config.ln_eps);
  NodeId a = pooling_weights(tape, h, leaves.pool, mask);
  NodeId z = pool(tape, h, a);
  return classify(tape, z, leaves.head);
}

BatchGraph batch_graph(Tape& tape, const ModelLeaves& leaves, const ModelConfig& config,
                       const Batch& batch) {
  if (batch.size() == 0) throw ContractError("batch_graph: empty batch");
  BatchGraph graph;
  graph.yhat.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    graph.yhat.push_back(
        sequence_probability(tape, leaves, config, batch.X[b], batch.dt[b], batch.mask[b]));
  }
  graph.loss = bce_loss(tape, graph.yhat, batch.labels);
  return graph;
}

double predict(const ModelParams& params, const VectorizedSequence& vseq) {
  Tape tape;
  ModelLeaves leaves = register_model(tape, params);
  NodeId yhat = sequence_probability(tape, leaves, params.config, vseq.X, vseq.dt, {});
  return tape.value(yhat)(0, 0);
}

std::vector<double> predict_batch(const ModelParams& params, const Batch& batch) {
  Tape tape;
  ModelLeaves leaves = register_model(tape, params);
  std::vector<double> out;
  out.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    NodeId yhat =
        sequence_probability(tape, leaves, params.config, batch.X[b], batch.dt[b], batch.mask[b]);
    out.push_back(tape.value(yhat)(0, 0));
  }
  return out;
}

}  // namespace riskformer
