#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskformer/datagen.hpp"
#include "riskformer/model.hpp"
#include "riskformer/trainer.hpp"

namespace riskformer {

// Protocol knobs for the experiment drivers.
struct ExperimentConfig {
  int n_test = 500;
  std::vector<int> head_list = {2, 4, 6, 8, 10, 12};
  int sweep_d_m = 24;  // every default head count divides 24
  std::vector<double> rho_list = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
  double noise_sigma = 10.0;
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  void validate() const;
};

// One config file drives every subcommand: a JSON object with optional
// "gen", "model", "train" and "experiment" sections mirroring the struct
// field names. Unknown keys are rejected.
struct AppConfig {
  GenConfig gen;
  ModelConfig model;
  TrainConfig train;
  ExperimentConfig experiment;
};

nlohmann::json to_json(const GenConfig& cfg);
nlohmann::json to_json(const ModelConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const FeatureSpace& fs);

GenConfig gen_config_from_json(const nlohmann::json& j);
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
FeatureSpace feature_space_from_json(const nlohmann::json& j);

AppConfig app_config_from_json(const nlohmann::json& j);
AppConfig load_config_file(const std::string& path);

}  // namespace riskformer
