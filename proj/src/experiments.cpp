#include "riskformer/experiments.hpp"

#include <cmath>
#include <iostream>
#include <map>

#include "riskformer/errors.hpp"
#include "riskformer/rng.hpp"
#include "riskformer/trainer.hpp"

namespace riskformer {

namespace {
constexpr std::uint64_t kTestSeedSalt = 0x7E57C0DEULL;
constexpr std::uint64_t kContamSeedSalt = 0xC047A31BULL;
}  // namespace

std::uint64_t test_cohort_seed(std::uint64_t train_seed) {
  return splitmix64(train_seed ^ kTestSeedSalt);
}

std::uint64_t contamination_seed(std::uint64_t train_seed) {
  return splitmix64(train_seed ^ kContamSeedSalt);
}

MetricsReport evaluate_model(const ModelParams& model, const FeatureSpace& fs,
                             const Cohort& test, double threshold) {
  std::vector<double> preds;
  preds.reserve(test.size());
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const PatientSequence& seq : test) {
    preds.push_back(predict(model, vectorize(seq, fs)));
    labels.push_back(seq.label);
  }
  return compute_metrics(confusion(preds, labels, threshold));
}

MetricsReport evaluate_mlp(const MlpParams& model, const FeatureSpace& fs, const Cohort& test,
                           double threshold) {
  std::vector<double> preds;
  preds.reserve(test.size());
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const PatientSequence& seq : test) {
    preds.push_back(predict_mlp(model, mean_pool_rows(vectorize(seq, fs))));
    labels.push_back(seq.label);
  }
  return compute_metrics(confusion(preds, labels, threshold));
}

namespace {

Cohort make_train_cohort(const GenConfig& gen, std::uint64_t seed) {
  GenConfig cfg = gen;
  cfg.seed = seed;
  return generate_cohort(cfg);
}

Cohort make_test_cohort(const GenConfig& gen, int n_test, std::uint64_t seed) {
  GenConfig cfg = gen;
  cfg.n_patients = n_test;
  cfg.seed = test_cohort_seed(seed);
  return generate_cohort(cfg);
}

}  // namespace

ComparisonResult run_comparison(const AppConfig& config) {
  config.gen.validate();
  config.model.validate();
  config.train.validate();
  config.experiment.validate();

  ComparisonResult result;
  result.config = config;
  for (std::uint64_t seed : config.experiment.seeds) {
    const Cohort train_cohort = make_train_cohort(config.gen, seed);
    const Cohort test_cohort = make_test_cohort(config.gen, config.experiment.n_test, seed);
    TrainConfig tc = config.train;
    tc.seed = seed;

    RunRow transformer_row;
    transformer_row.model = "transformer";
    transformer_row.seed = seed;
    try {
      TrainResult tr = train(train_cohort, config.model, tc);
      transformer_row.metrics =
          evaluate_model(tr.model, tr.feature_space, test_cohort, tc.threshold);
      transformer_row.ok = true;
    } catch (const std::exception& e) {
      transformer_row.error = e.what();
      std::cerr << "[compare] transformer seed " << seed << " failed: " << e.what() << "\n";
    }
    result.rows.push_back(std::move(transformer_row));

    RunRow mlp_row;
    mlp_row.model = "mlp";
    mlp_row.seed = seed;
    try {
      MlpTrainResult mr = train_mlp(train_cohort, MlpConfig{}, config.model.vocab_size, tc);
      mlp_row.metrics = evaluate_mlp(mr.model, mr.feature_space, test_cohort, tc.threshold);
      mlp_row.ok = true;
    } catch (const std::exception& e) {
      mlp_row.error = e.what();
      std::cerr << "[compare] mlp seed " << seed << " failed: " << e.what() << "\n";
    }
    result.rows.push_back(std::move(mlp_row));
  }
  return result;
}

SweepResult sweep_heads(const AppConfig& config) {
  config.gen.validate();
  config.train.validate();
  config.experiment.validate();

  // fail fast: every configuration must be valid before any training starts
  std::vector<ModelConfig> cells;
  for (int heads : config.experiment.head_list) {
    ModelConfig mc = config.model;
    mc.d_m = config.experiment.sweep_d_m;
    mc.n_heads = heads;
    mc.validate();
    cells.push_back(mc);
  }

  SweepResult result;
  result.swept = "n_heads";
  result.config = config;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::uint64_t seed : config.experiment.seeds) {
      RunRow row;
      row.model = "transformer";
      row.value = static_cast<double>(config.experiment.head_list[c]);
      row.seed = seed;
      try {
        const Cohort train_cohort = make_train_cohort(config.gen, seed);
        const Cohort test_cohort = make_test_cohort(config.gen, config.experiment.n_test, seed);
        TrainConfig tc = config.train;
        tc.seed = seed;
        TrainResult tr = train(train_cohort, cells[c], tc);
        row.metrics = evaluate_model(tr.model, tr.feature_space, test_cohort, tc.threshold);
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
        std::cerr << "[sweep-heads] heads=" << config.experiment.head_list[c] << " seed " << seed
                  << " failed: " << e.what() << "\n";
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

SweepResult sweep_contamination(const AppConfig& config) {
  config.gen.validate();
  config.model.validate();
  config.train.validate();
  config.experiment.validate();

  SweepResult result;
  result.swept = "rho";
  result.config = config;
  for (double rho : config.experiment.rho_list) {
    for (std::uint64_t seed : config.experiment.seeds) {
      RunRow row;
      row.model = "transformer";
      row.value = rho;
      row.seed = seed;
      try {
        const Cohort train_cohort = make_train_cohort(config.gen, seed);
        const Cohort test_cohort = make_test_cohort(config.gen, config.experiment.n_test, seed);
        ContaminationSpec spec{rho, config.experiment.noise_sigma, contamination_seed(seed)};
        const Cohort contaminated = contaminate(train_cohort, spec);
        TrainConfig tc = config.train;
        tc.seed = seed;
        TrainResult tr = train(contaminated, config.model, tc);
        row.metrics = evaluate_model(tr.model, tr.feature_space, test_cohort, tc.threshold);
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
        std::cerr << "[sweep-contamination] rho=" << rho << " seed " << seed
                  << " failed: " << e.what() << "\n";
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

namespace {

nlohmann::json row_to_json(const RunRow& row, bool with_value, const char* value_key) {
  nlohmann::json j{{"model", row.model}, {"seed", row.seed}, {"ok", row.ok}};
  if (with_value) j[value_key] = row.value;
  if (row.ok) j["metrics"] = to_json(row.metrics);
  else j["error"] = row.error;
  return j;
}

struct Moments {
  std::map<std::string, double> mean;
  std::map<std::string, double> stddev;
  int n_ok = 0;
};

Moments aggregate(const std::vector<const RunRow*>& rows) {
  Moments m;
  std::map<std::string, std::vector<double>> samples;
  for (const RunRow* row : rows) {
    if (!row->ok) continue;
    ++m.n_ok;
    samples["acc"].push_back(row->metrics.acc);
    samples["precision"].push_back(row->metrics.precision);
    samples["recall"].push_back(row->metrics.recall);
    samples["f1"].push_back(row->metrics.f1);
  }
  for (const auto& [key, values] : samples) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    m.mean[key] = mean;
    m.stddev[key] = std::sqrt(var);
  }
  return m;
}

nlohmann::json moments_to_json(const Moments& m) {
  return nlohmann::json{{"n_ok", m.n_ok}, {"mean", m.mean}, {"std", m.stddev}};
}

nlohmann::json config_echo(const AppConfig& config) {
  return nlohmann::json{{"gen", to_json(config.gen)},
                        {"model", to_json(config.model)},
                        {"train", to_json(config.train)},
                        {"experiment", to_json(config.experiment)}};
}

}  // namespace

nlohmann::json to_json(const ComparisonResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const RunRow& row : result.rows) rows.push_back(row_to_json(row, false, ""));

  nlohmann::json aggregate_json = nlohmann::json::object();
  for (const std::string& model : {std::string("transformer"), std::string("mlp")}) {
    std::vector<const RunRow*> selected;
    for (const RunRow& row : result.rows) {
      if (row.model == model) selected.push_back(&row);
    }
    aggregate_json[model] = moments_to_json(aggregate(selected));
  }
  return nlohmann::json{{"protocol", "comparison"},
                        {"config", config_echo(result.config)},
                        {"rows", std::move(rows)},
                        {"aggregate", std::move(aggregate_json)}};
}

nlohmann::json to_json(const SweepResult& result) {
  const char* value_key = result.swept == "rho" ? "rho" : "n_heads";
  nlohmann::json rows = nlohmann::json::array();
  for (const RunRow& row : result.rows) rows.push_back(row_to_json(row, true, value_key));

  // aggregate per swept value, preserving first-seen order
  std::vector<double> values;
  for (const RunRow& row : result.rows) {
    bool seen = false;
    for (double v : values) seen = seen || v == row.value;
    if (!seen) values.push_back(row.value);
  }
  nlohmann::json aggregate_json = nlohmann::json::array();
  for (double v : values) {
    std::vector<const RunRow*> selected;
    for (const RunRow& row : result.rows) {
      if (row.value == v) selected.push_back(&row);
    }
    nlohmann::json entry = moments_to_json(aggregate(selected));
    entry[value_key] = v;
    aggregate_json.push_back(std::move(entry));
  }
  return nlohmann::json{{"protocol", result.swept == "rho" ? "sweep-contamination" : "sweep-heads"},
                        {"swept", result.swept},
                        {"config", config_echo(result.config)},
                        {"rows", std::move(rows)},
                        {"aggregate", std::move(aggregate_json)}};
}

}  // namespace riskformer
