#include "riskformer/config.hpp"

#include <fstream>
#include <set>

#include "riskformer/errors.hpp"

namespace riskformer {

namespace {

using nlohmann::json;

// Applies known keys and rejects unknown ones so config typos fail fast.
class SectionReader {
 public:
  SectionReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j.is_object()) throw ConfigError("config section '" + section_ + "' must be an object");
  }

  template <typename T>
  void field(const char* key, T& out) {
    known_.insert(key);
    if (j_.contains(key)) {
      try {
        out = j_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError("config key '" + section_ + "." + key + "': " + e.what());
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.contains(key)) {
        throw ConfigError("unknown config key '" + section_ + "." + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> known_;
};

}  // namespace

void ExperimentConfig::validate() const {
  if (n_test < 1) throw ConfigError("experiment: n_test must be >= 1");
  if (head_list.empty()) throw ConfigError("experiment: head_list must be non-empty");
  for (int h : head_list) {
    if (h < 1) throw ConfigError("experiment: head counts must be >= 1");
  }
  if (sweep_d_m < 1) throw ConfigError("experiment: sweep_d_m must be >= 1");
  for (double r : rho_list) {
    if (r < 0.0 || r > 1.0) throw ConfigError("experiment: rho values must be in [0,1]");
  }
  if (noise_sigma < 0.0) throw ConfigError("experiment: noise_sigma must be >= 0");
  if (seeds.empty()) throw ConfigError("experiment: at least one seed is required");
}

nlohmann::json to_json(const GenConfig& cfg) {
  return json{{"n_patients", cfg.n_patients},
              {"len_min", cfg.len_min},
              {"len_max", cfg.len_max},
              {"gap_rate", cfg.gap_rate},
              {"vocab_size", cfg.vocab_size},
              {"cont_dim", cfg.cont_dim},
              {"risk_code", cfg.risk_code},
              {"gap_threshold", cfg.gap_threshold},
              {"beta0", cfg.beta0},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"seed", cfg.seed}};
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return json{{"vocab_size", cfg.vocab_size},
              {"d_m", cfg.d_m},
              {"n_heads", cfg.n_heads},
              {"n_layers", cfg.n_layers},
              {"ffn_enabled", cfg.ffn_enabled},
              {"d_ff", cfg.d_ff},
              {"d_a", cfg.d_a},
              {"ln_eps", cfg.ln_eps},
              {"dt_log1p", cfg.dt_log1p}};
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return json{{"lr", cfg.lr},
              {"beta1", cfg.beta1},
              {"beta2", cfg.beta2},
              {"eps", cfg.eps},
              {"batch_size", cfg.batch_size},
              {"max_epochs", cfg.max_epochs},
              {"patience", cfg.patience},
              {"val_fraction", cfg.val_fraction},
              {"seed", cfg.seed},
              {"threshold", cfg.threshold}};
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return json{{"n_test", cfg.n_test},
              {"head_list", cfg.head_list},
              {"sweep_d_m", cfg.sweep_d_m},
              {"rho_list", cfg.rho_list},
              {"noise_sigma", cfg.noise_sigma},
              {"seeds", cfg.seeds}};
}

nlohmann::json to_json(const FeatureSpace& fs) {
  return json{{"vocab_size", fs.vocab_size},
              {"cont_dim", fs.cont_dim},
              {"cont_mean", fs.cont_mean},
              {"cont_std", fs.cont_std}};
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig cfg;
  SectionReader r(j, "gen");
  r.field("n_patients", cfg.n_patients);
  r.field("len_min", cfg.len_min);
  r.field("len_max", cfg.len_max);
  r.field("gap_rate", cfg.gap_rate);
  r.field("vocab_size", cfg.vocab_size);
  r.field("cont_dim", cfg.cont_dim);
  r.field("risk_code", cfg.risk_code);
  r.field("gap_threshold", cfg.gap_threshold);
  r.field("beta0", cfg.beta0);
  r.field("beta1", cfg.beta1);
  r.field("beta2", cfg.beta2);
  r.field("seed", cfg.seed);
  r.finish();
  cfg.validate();
  return cfg;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  SectionReader r(j, "model");
  r.field("vocab_size", cfg.vocab_size);
  r.field("d_m", cfg.d_m);
  r.field("n_heads", cfg.n_heads);
  r.field("n_layers", cfg.n_layers);
  r.field("ffn_enabled", cfg.ffn_enabled);
  r.field("d_ff", cfg.d_ff);
  r.field("d_a", cfg.d_a);
  r.field("ln_eps", cfg.ln_eps);
  r.field("dt_log1p", cfg.dt_log1p);
  r.finish();
  cfg.validate();
  return cfg;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  SectionReader r(j, "train");
  r.field("lr", cfg.lr);
  r.field("beta1", cfg.beta1);
  r.field("beta2", cfg.beta2);
  r.field("eps", cfg.eps);
  r.field("batch_size", cfg.batch_size);
  r.field("max_epochs", cfg.max_epochs);
  r.field("patience", cfg.patience);
  r.field("val_fraction", cfg.val_fraction);
  r.field("seed", cfg.seed);
  r.field("threshold", cfg.threshold);
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  SectionReader r(j, "experiment");
  r.field("n_test", cfg.n_test);
  r.field("head_list", cfg.head_list);
  r.field("sweep_d_m", cfg.sweep_d_m);
  r.field("rho_list", cfg.rho_list);
  r.field("noise_sigma", cfg.noise_sigma);
  r.field("seeds", cfg.seeds);
  r.finish();
  cfg.validate();
  return cfg;
}

FeatureSpace feature_space_from_json(const nlohmann::json& j) {
  FeatureSpace fs;
  SectionReader r(j, "feature_space");
  r.field("vocab_size", fs.vocab_size);
  r.field("cont_dim", fs.cont_dim);
  r.field("cont_mean", fs.cont_mean);
  r.field("cont_std", fs.cont_std);
  r.finish();
  if (fs.vocab_size < 1 || fs.cont_dim < 0 ||
      fs.cont_mean.size() != static_cast<std::size_t>(fs.cont_dim) ||
      fs.cont_std.size() != static_cast<std::size_t>(fs.cont_dim)) {
    throw IntegrityError("feature_space block is inconsistent");
  }
  return fs;
}

AppConfig app_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  static const std::set<std::string> sections{"gen", "model", "train", "experiment"};
  for (const auto& [key, value] : j.items()) {
    if (!sections.contains(key)) throw ConfigError("unknown config section '" + key + "'");
  }
  AppConfig cfg;
  if (j.contains("gen")) cfg.gen = gen_config_from_json(j.at("gen"));
  if (j.contains("model")) cfg.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
  if (j.contains("experiment")) cfg.experiment = experiment_config_from_json(j.at("experiment"));
  return cfg;
}

AppConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return app_config_from_json(j);
}

}  // namespace riskformer
