#include "riskformer/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskformer/errors.hpp"
#include "riskformer/rng.hpp"

namespace riskformer {

void GenConfig::validate() const {
  if (n_patients < 0) throw ConfigError("gen: n_patients must be >= 0");
  if (len_min < 1) throw ConfigError("gen: len_min must be >= 1");
  if (len_min > len_max) throw ConfigError("gen: len_min > len_max");
  if (gap_rate <= 0.0) throw ConfigError("gen: gap_rate must be > 0");
  if (vocab_size < 1) throw ConfigError("gen: vocab_size must be >= 1");
  if (cont_dim < 1) throw ConfigError("gen: cont_dim must be >= 1");
  if (risk_code < 0 || risk_code >= vocab_size) {
    throw ConfigError("gen: risk_code must be in [0, vocab_size)");
  }
  if (gap_threshold < 0.0) throw ConfigError("gen: gap_threshold must be >= 0");
}

void ContaminationSpec::validate() const {
  if (rho < 0.0 || rho > 1.0) throw ConfigError("contaminate: rho must be in [0,1]");
  if (noise_sigma < 0.0) throw ConfigError("contaminate: noise_sigma must be >= 0");
}

double label_probability(const PatientSequence& seq, const GenConfig& cfg) {
  seq.validate();
  if (static_cast<int>(seq.events.front().values.size()) != cfg.cont_dim) {
    throw SchemaError("label_probability: sequence has " +
                      std::to_string(seq.events.front().values.size()) +
                      " continuous features, config expects " + std::to_string(cfg.cont_dim));
  }
  int risk_count = 0;
  double sum_f0 = 0.0;
  int window = 0;
  for (std::size_t i = 1; i < seq.events.size(); ++i) {
    const double dt = seq.events[i].t - seq.events[i - 1].t;
    if (dt < cfg.gap_threshold) continue;
    ++window;
    sum_f0 += seq.events[i].values[0];
    if (seq.events[i].code == cfg.risk_code) ++risk_count;
  }
  const double mean_f0 = window > 0 ? sum_f0 / window : 0.0;
  const double s = cfg.beta0 + cfg.beta1 * risk_count + cfg.beta2 * mean_f0;
  return 1.0 / (1.0 + std::exp(-s));
}

Cohort generate_cohort(const GenConfig& cfg) {
  cfg.validate();
  Cohort cohort;
  cohort.reserve(static_cast<std::size_t>(cfg.n_patients));
  for (int p = 0; p < cfg.n_patients; ++p) {
    Rng rng(substream(cfg.seed, static_cast<std::uint64_t>(p)));
    PatientSequence seq;
    seq.patient_id = "p" + std::to_string(p);

    const int T = rng.uniform_int(cfg.len_min, cfg.len_max);
    seq.events.resize(static_cast<std::size_t>(T));
    double t = 0.0;
    for (Event& e : seq.events) {
      t += rng.exponential(cfg.gap_rate);
      e.t = t;
      e.code = rng.uniform_int(0, cfg.vocab_size - 1);
      e.values.resize(static_cast<std::size_t>(cfg.cont_dim));
      for (double& v : e.values) v = rng.normal();
    }

    const double prob = label_probability(seq, cfg);
    seq.label = rng.uniform() < prob ? 1 : 0;
    cohort.push_back(std::move(seq));
  }
  return cohort;
}

Cohort contaminate(const Cohort& cohort, const ContaminationSpec& spec) {
  spec.validate();
  Cohort out = cohort;

  std::size_t total = 0;
  for (const PatientSequence& seq : cohort) total += seq.events.size();
  const std::size_t k = static_cast<std::size_t>(std::llround(spec.rho * static_cast<double>(total)));
  if (k == 0) return out;

  Rng rng(spec.seed);
  std::vector<std::size_t> indices(total);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  // partial Fisher-Yates: the first k entries are a uniform sample without
  // replacement
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(total - i) - 1));
    std::swap(indices[i], indices[j]);
  }
  std::vector<std::size_t> chosen(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(chosen.begin(), chosen.end());

  // noise draws happen in sorted global-event order so the result does not
  // depend on the selection order
  std::size_t patient = 0, base = 0;
  for (std::size_t flat : chosen) {
    while (flat >= base + out[patient].events.size()) {
      base += out[patient].events.size();
      ++patient;
    }
    Event& e = out[patient].events[flat - base];
    for (double& v : e.values) v = spec.noise_sigma * rng.normal();
  }
  return out;
}

}  // namespace riskformer
