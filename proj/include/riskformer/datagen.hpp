#pragma once

#include <cstdint>

#include "riskformer/ingest.hpp"

namespace riskformer {

// Synthetic heterogeneous event-sequence cohorts with a planted risk signal.
//
// Per patient: T ~ DiscreteUniform[len_min, len_max]; inter-event gaps (hours)
// ~ Exponential(gap_rate), timestamps cumulative; event code ~ Uniform(vocab);
// continuous vector ~ N(0, I).
//
// The risk window is the set of events that follow a long monitoring gap,
// W = {i : dt_i >= gap_threshold} with dt_1 = 0. The planted score is
//   s = beta0 + beta1 * |{i in W : code_i = risk_code}|
//             + beta2 * mean{values_i[0] : i in W}        (terms 0 if W empty)
// and the label is drawn y ~ Bernoulli(sigmoid(s)). Sampled labels keep the
// Bayes accuracy below 1, and the gap-gated window ties the label to the
// pairing of each event's timing and measurements, which mean-pooling
// destroys.
struct GenConfig {
  int n_patients = 1000;
  int len_min = 5;
  int len_max = 50;
  double gap_rate = 0.2;  // mean gap 1/rate hours
  int vocab_size = 100;
  int cont_dim = 8;
  int risk_code = 7;
  double gap_threshold = 6.0;  // hours
  double beta0 = -1.0;
  double beta1 = 2.0;
  double beta2 = 14.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ContaminationSpec {
  double rho = 0.0;  // fraction of events to contaminate, in [0,1]
  double noise_sigma = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Fully determined by cfg.seed; each patient draws from its own substream so
// generation is order-independent.
Cohort generate_cohort(const GenConfig& cfg);

// Bayes oracle: the exact sigmoid(s) used to draw the label. Throws
// SchemaError if the sequence does not match cfg's feature schema.
double label_probability(const PatientSequence& seq, const GenConfig& cfg);

// Replaces the continuous vectors of round(rho * total_events) events, chosen
// uniformly without replacement by spec.seed, with draws from
// N(0, noise_sigma^2 * I). Codes, timestamps and labels are unchanged; the
// input cohort is untouched.
Cohort contaminate(const Cohort& cohort, const ContaminationSpec& spec);

}  // namespace riskformer
