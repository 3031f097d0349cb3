#include "riskformer/model.hpp"

#include <doctest.h>

#include <cmath>

#include "riskformer/datagen.hpp"
#include "riskformer/errors.hpp"
#include "riskformer/trainer.hpp"

using namespace riskformer;

namespace {

ModelConfig tiny_config(bool ffn = true) {
  ModelConfig cfg;
  cfg.vocab_size = 6;
  cfg.d_m = 8;
  cfg.n_heads = 2;
  cfg.n_layers = 2;
  cfg.ffn_enabled = ffn;
  cfg.d_ff = 16;
  return cfg;
}

GenConfig tiny_gen(int n, std::uint64_t seed) {
  GenConfig gen;
  gen.n_patients = n;
  gen.vocab_size = 6;
  gen.cont_dim = 3;
  gen.risk_code = 2;
  gen.len_min = 2;
  gen.len_max = 6;
  gen.seed = seed;
  return gen;
}

std::vector<VectorizedSequence> vectorize_all(const Cohort& cohort, const FeatureSpace& fs) {
  std::vector<VectorizedSequence> out;
  for (const PatientSequence& seq : cohort) out.push_back(vectorize(seq, fs));
  return out;
}

}  // namespace

TEST_CASE("registered leaves align with the canonical block enumeration") {
  ModelParams model = init_params(tiny_config(), 9, 42);
  Tape tape;
  ModelLeaves leaves = register_model(tape, model);
  auto blocks = param_blocks(model);
  REQUIRE(leaves.flat.size() == blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(tape.value(leaves.flat[i]) == *blocks[i].second);
  }
}

TEST_CASE("parameter count follows the configuration") {
  ModelConfig cfg = tiny_config();
  ModelParams model = init_params(cfg, 9, 1);
  const std::size_t d_m = 8, d_k = 4, d_ff = 16, d_in = 9;
  std::size_t expected = d_in * d_m + d_m + d_m + d_m;                       // embed
  expected += 2 * (2 * 3 * (d_m * d_k) + d_m * d_m + 2 * d_m                 // attention + ln1
                   + d_m * d_ff + d_ff + d_ff * d_m + d_m + 2 * d_m);        // ffn + ln2
  expected += d_m * d_m + d_m;                                               // pooling
  expected += d_m + 1;                                                       // classifier
  CHECK(param_count(model) == expected);
}

TEST_CASE("prediction is deterministic and in (0,1)") {
  GenConfig gen = tiny_gen(6, 3);
  Cohort cohort = generate_cohort(gen);
  FeatureSpace fs = fit_feature_space(cohort, gen.vocab_size);
  ModelParams model = init_params(tiny_config(), fs.d_in(), 7);
  for (const PatientSequence& seq : cohort) {
    const double p1 = predict(model, vectorize(seq, fs));
    const double p2 = predict(model, vectorize(seq, fs));
    CHECK(p1 == p2);
    CHECK(p1 > 0.0);
    CHECK(p1 < 1.0);
  }
}

TEST_CASE("padding invariance: batched equals unbatched exactly") {
  GenConfig gen = tiny_gen(8, 5);
  Cohort cohort = generate_cohort(gen);
  FeatureSpace fs = fit_feature_space(cohort, gen.vocab_size);
  std::vector<VectorizedSequence> vseqs = vectorize_all(cohort, fs);
  ModelParams model = init_params(tiny_config(), fs.d_in(), 11);

  Batch batch = batch_pad(vseqs);
  std::vector<double> batched = predict_batch(model, batch);
  REQUIRE(batched.size() == vseqs.size());
  for (std::size_t i = 0; i < vseqs.size(); ++i) {
    CHECK(std::abs(batched[i] - predict(model, vseqs[i])) <= 1e-9);
  }
}

TEST_CASE("a single-event patient flows end to end") {
  GenConfig gen = tiny_gen(1, 9);
  gen.len_min = 1;
  gen.len_max = 1;
  Cohort cohort = generate_cohort(gen);
  REQUIRE(cohort[0].events.size() == 1);
  FeatureSpace fs = fit_feature_space(cohort, gen.vocab_size);
  ModelParams model = init_params(tiny_config(), fs.d_in(), 2);

  VectorizedSequence v = vectorize(cohort[0], fs);
  Tape tape;
  ModelLeaves leaves = register_model(tape, model);
  NodeId a = pooling_weights(
      tape,
      encode(tape,
             combine(tape, embed_features(tape, tape.leaf(v.X), leaves.embed),
                     temporal_encode(tape, v.dt, leaves.embed)),
             leaves.layers, {}, model.config.ln_eps),
      leaves.pool, {});
  CHECK(tape.value(a) == Tensor2(1, 1, {1.0}));
  const double p = predict(model, v);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
}

TEST_CASE("prediction is invariant under joint (row, gap) swaps") {
  // temporal distinctions enter only through the per-event gap feature, so
  // permuting events together with their gaps cannot change the pooled output
  GenConfig gen = tiny_gen(1, 13);
  gen.len_min = 4;
  gen.len_max = 4;
  Cohort cohort = generate_cohort(gen);
  FeatureSpace fs = fit_feature_space(cohort, gen.vocab_size);
  VectorizedSequence v = vectorize(cohort[0], fs);

  VectorizedSequence swapped = v;
  for (int j = 0; j < v.X.cols(); ++j) std::swap(swapped.X(1, j), swapped.X(2, j));
  std::swap(swapped.dt[1], swapped.dt[2]);

  ModelParams model = init_params(tiny_config(), fs.d_in(), 17);
  CHECK(predict(model, v) == doctest::Approx(predict(model, swapped)).epsilon(1e-12));
}

TEST_CASE("end-to-end gradients pass grad_check at 1e-4, FFN on and off") {
  for (bool ffn : {true, false}) {
    GenConfig gen = tiny_gen(2, 21);
    Cohort cohort = generate_cohort(gen);
    FeatureSpace fs = fit_feature_space(cohort, gen.vocab_size);
    std::vector<VectorizedSequence> vseqs = vectorize_all(cohort, fs);
    Batch batch = batch_pad(vseqs);

    ModelParams model = init_params(tiny_config(ffn), fs.d_in(), 23);
    GradAuditReport report = gradient_audit(model, batch, 1e-5, 1e-4);
    CHECK(report.pass);
    CHECK(report.blocks.size() == param_blocks(model).size());
  }
}
