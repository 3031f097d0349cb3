#include "riskformer/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "riskformer/baseline.hpp"
#include "riskformer/config.hpp"
#include "riskformer/datagen.hpp"
#include "riskformer/errors.hpp"
#include "riskformer/experiments.hpp"
#include "riskformer/rng.hpp"
#include "riskformer/trainer.hpp"

namespace riskformer {

namespace {

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IntegrityError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IntegrityError("write to '" + path + "' failed");
}

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool out_required) {
  cmd->add_option("--config", opts.config_path, "JSON config file (gen/model/train/experiment)");
  cmd->add_option("--seed", opts.seed, "override every seed in the config");
  auto* out = cmd->add_option("--out", opts.out_path, "output file");
  if (out_required) out->required();
}

AppConfig resolve_config(const CommonOpts& opts) {
  AppConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path);
  if (opts.seed) {
    cfg.gen.seed = *opts.seed;
    cfg.train.seed = *opts.seed;
    cfg.experiment.seeds = {*opts.seed};
  }
  return cfg;
}

// A small synthetic batch for gradient audits.
Batch audit_batch(const AppConfig& cfg, int n_patients) {
  GenConfig gen = cfg.gen;
  gen.n_patients = n_patients;
  gen.len_min = 4;
  gen.len_max = 8;
  gen.seed = substream(cfg.gen.seed, 777);
  Cohort cohort = generate_cohort(gen);
  FeatureSpace fs = fit_feature_space(cohort, cfg.model.vocab_size);
  std::vector<VectorizedSequence> vseqs;
  for (const PatientSequence& seq : cohort) vseqs.push_back(vectorize(seq, fs));
  return batch_pad(vseqs);
}

int run_generate(const CommonOpts& opts) {
  AppConfig cfg = resolve_config(opts);
  Cohort cohort = generate_cohort(cfg.gen);
  write_cohort_file(opts.out_path, cohort);
  std::cerr << "wrote " << cohort.size() << " patients to " << opts.out_path << "\n";
  return 0;
}

int run_train(const CommonOpts& opts, const std::string& cohort_path,
              const std::string& history_path) {
  AppConfig cfg = resolve_config(opts);
  Cohort cohort = read_cohort_file(cohort_path);
  TrainResult result = train(cohort, cfg.model, cfg.train);

  Checkpoint ckpt;
  ckpt.model = std::move(result.model);
  ckpt.feature_space = result.feature_space;
  ckpt.train_config = cfg.train;
  ckpt.seed = cfg.train.seed;
  if (result.history.best_epoch >= 1) {
    ckpt.metrics_at_best =
        result.history.epochs[static_cast<std::size_t>(result.history.best_epoch) - 1].val_metrics;
  }
  save_checkpoint(ckpt, opts.out_path);
  if (!history_path.empty()) write_json_file(history_path, to_json(result.history));
  std::cerr << "trained " << result.history.stopped_epoch << " epochs (best "
            << result.history.best_epoch << "), checkpoint written to " << opts.out_path << "\n";
  return 0;
}

int run_evaluate(const CommonOpts& opts, const std::string& checkpoint_path,
                 const std::string& cohort_path, std::optional<double> threshold) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Cohort cohort = read_cohort_file(cohort_path);
  const double thr = threshold.value_or(ckpt.train_config.threshold);
  MetricsReport report = evaluate_model(ckpt.model, ckpt.feature_space, cohort, thr);
  nlohmann::json j = to_json(report);
  if (!opts.out_path.empty()) write_json_file(opts.out_path, j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_audit(const CommonOpts& opts, const std::string& checkpoint_path, double h, double tol,
              int batch_patients) {
  AppConfig cfg = resolve_config(opts);
  ModelParams model;
  Batch batch;
  if (!checkpoint_path.empty()) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    model = std::move(ckpt.model);
    GenConfig gen = cfg.gen;
    gen.vocab_size = model.config.vocab_size;
    gen.cont_dim = model.d_in - model.config.vocab_size;
    AppConfig audit_cfg = cfg;
    audit_cfg.gen = gen;
    audit_cfg.model = model.config;
    batch = audit_batch(audit_cfg, batch_patients);
  } else {
    batch = audit_batch(cfg, batch_patients);
    const int d_in = batch.X.front().cols();
    model = init_params(cfg.model, d_in, substream(cfg.train.seed, 1));
  }
  GradAuditReport report = gradient_audit(model, batch, h, tol);
  std::cout << format_report(report);
  if (!opts.out_path.empty()) write_json_file(opts.out_path, to_json(report));
  return report.pass ? 0 : 2;
}

int run_compare(const CommonOpts& opts, const std::vector<std::uint64_t>& seeds, int n_test) {
  AppConfig cfg = resolve_config(opts);
  if (!seeds.empty()) cfg.experiment.seeds = seeds;
  if (n_test > 0) cfg.experiment.n_test = n_test;
  ComparisonResult result = run_comparison(cfg);
  write_json_file(opts.out_path, to_json(result));
  std::cerr << "comparison written to " << opts.out_path << "\n";
  return 0;
}

int run_sweep_heads(const CommonOpts& opts, const std::vector<std::uint64_t>& seeds,
                    const std::vector<int>& heads, int d_m, int n_test) {
  AppConfig cfg = resolve_config(opts);
  if (!seeds.empty()) cfg.experiment.seeds = seeds;
  if (!heads.empty()) cfg.experiment.head_list = heads;
  if (d_m > 0) cfg.experiment.sweep_d_m = d_m;
  if (n_test > 0) cfg.experiment.n_test = n_test;
  SweepResult result = sweep_heads(cfg);
  write_json_file(opts.out_path, to_json(result));
  std::cerr << "head sweep written to " << opts.out_path << "\n";
  return 0;
}

int run_sweep_contamination(const CommonOpts& opts, const std::vector<std::uint64_t>& seeds,
                            const std::vector<double>& rhos, int n_test) {
  AppConfig cfg = resolve_config(opts);
  if (!seeds.empty()) cfg.experiment.seeds = seeds;
  if (!rhos.empty()) cfg.experiment.rho_list = rhos;
  if (n_test > 0) cfg.experiment.n_test = n_test;
  SweepResult result = sweep_contamination(cfg);
  write_json_file(opts.out_path, to_json(result));
  std::cerr << "contamination sweep written to " << opts.out_path << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Longitudinal clinical-risk classifier on synthetic event sequences"};
  app.require_subcommand(1);

  CommonOpts gen_opts;
  auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic cohort file");
  add_common(gen_cmd, gen_opts, true);
  int gen_n = 0;
  gen_cmd->add_option("--n", gen_n, "override gen.n_patients");

  CommonOpts train_opts;
  std::string train_cohort, train_history;
  auto* train_cmd = app.add_subcommand("train", "train on a cohort file, write a checkpoint");
  add_common(train_cmd, train_opts, true);
  train_cmd->add_option("--cohort", train_cohort, "cohort file")->required();
  train_cmd->add_option("--history", train_history, "write per-epoch history JSON here");

  CommonOpts eval_opts;
  std::string eval_checkpoint, eval_cohort;
  std::optional<double> eval_threshold;
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a cohort file");
  add_common(eval_cmd, eval_opts, false);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--cohort", eval_cohort, "cohort file")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "decision threshold");

  CommonOpts audit_opts;
  std::string audit_checkpoint;
  double audit_h = 1e-5, audit_tol = 1e-4;
  int audit_patients = 4;
  auto* audit_cmd = app.add_subcommand("audit", "finite-difference gradient audit");
  add_common(audit_cmd, audit_opts, false);
  audit_cmd->add_option("--checkpoint", audit_checkpoint, "audit a trained model");
  audit_cmd->add_option("--step", audit_h, "finite-difference step");
  audit_cmd->add_option("--tol", audit_tol, "max relative error tolerance");
  audit_cmd->add_option("--patients", audit_patients, "audit batch size");

  CommonOpts cmp_opts;
  std::vector<std::uint64_t> cmp_seeds;
  int cmp_n_test = 0;
  auto* cmp_cmd = app.add_subcommand("compare", "full model vs mean-pool MLP baseline");
  add_common(cmp_cmd, cmp_opts, true);
  cmp_cmd->add_option("--seeds", cmp_seeds, "training seeds")->delimiter(',');
  cmp_cmd->add_option("--n-test", cmp_n_test, "held-out cohort size");

  CommonOpts heads_opts;
  std::vector<std::uint64_t> heads_seeds;
  std::vector<int> heads_list;
  int heads_dm = 0, heads_n_test = 0;
  auto* heads_cmd = app.add_subcommand("sweep-heads", "accuracy vs attention head count");
  add_common(heads_cmd, heads_opts, true);
  heads_cmd->add_option("--seeds", heads_seeds, "training seeds")->delimiter(',');
  heads_cmd->add_option("--heads", heads_list, "head counts")->delimiter(',');
  heads_cmd->add_option("--d-m", heads_dm, "model width for the sweep");
  heads_cmd->add_option("--n-test", heads_n_test, "held-out cohort size");

  CommonOpts rho_opts;
  std::vector<std::uint64_t> rho_seeds;
  std::vector<double> rho_list;
  int rho_n_test = 0;
  auto* rho_cmd = app.add_subcommand("sweep-contamination",
                                     "precision vs training-data outlier ratio");
  add_common(rho_cmd, rho_opts, true);
  rho_cmd->add_option("--seeds", rho_seeds, "training seeds")->delimiter(',');
  rho_cmd->add_option("--rhos", rho_list, "contamination ratios")->delimiter(',');
  rho_cmd->add_option("--n-test", rho_n_test, "held-out cohort size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (gen_cmd->parsed()) {
      if (gen_n > 0) {
        AppConfig probe = resolve_config(gen_opts);
        probe.gen.n_patients = gen_n;
        Cohort cohort = generate_cohort(probe.gen);
        write_cohort_file(gen_opts.out_path, cohort);
        std::cerr << "wrote " << cohort.size() << " patients to " << gen_opts.out_path << "\n";
        return 0;
      }
      return run_generate(gen_opts);
    }
    if (train_cmd->parsed()) return run_train(train_opts, train_cohort, train_history);
    if (eval_cmd->parsed()) {
      return run_evaluate(eval_opts, eval_checkpoint, eval_cohort, eval_threshold);
    }
    if (audit_cmd->parsed()) {
      return run_audit(audit_opts, audit_checkpoint, audit_h, audit_tol, audit_patients);
    }
    if (cmp_cmd->parsed()) return run_compare(cmp_opts, cmp_seeds, cmp_n_test);
    if (heads_cmd->parsed()) {
      return run_sweep_heads(heads_opts, heads_seeds, heads_list, heads_dm, heads_n_test);
    }
    if (rho_cmd->parsed()) {
      return run_sweep_contamination(rho_opts, rho_seeds, rho_list, rho_n_test);
    }
    std::cerr << app.help();
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace riskformer
