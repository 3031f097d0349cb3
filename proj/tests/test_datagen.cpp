#include "riskformer/datagen.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "riskformer/errors.hpp"

using namespace riskformer;

namespace {

std::string cohort_bytes(const Cohort& cohort) {
  std::ostringstream out;
  write_cohort(out, cohort);
  return out.str();
}

PatientSequence two_event_seq(double gap, int code2, double f0, int cont_dim = 8) {
  PatientSequence seq;
  seq.patient_id = "x";
  seq.label = 0;
  Event e1{1.0, 0, std::vector<double>(static_cast<std::size_t>(cont_dim), 0.0)};
  Event e2{1.0 + gap, code2, std::vector<double>(static_cast<std::size_t>(cont_dim), 0.0)};
  e2.values[0] = f0;
  seq.events = {e1, e2};
  return seq;
}

}  // namespace

TEST_CASE("same config and seed produce byte-identical cohorts") {
  GenConfig cfg;
  cfg.n_patients = 50;
  cfg.seed = 42;
  CHECK(cohort_bytes(generate_cohort(cfg)) == cohort_bytes(generate_cohort(cfg)));

  GenConfig other = cfg;
  other.seed = 43;
  CHECK(cohort_bytes(generate_cohort(other)) != cohort_bytes(generate_cohort(cfg)));
}

TEST_CASE("cohort cardinality, lengths, and ordering") {
  GenConfig cfg;
  cfg.n_patients = 100;
  cfg.seed = 7;
  Cohort cohort = generate_cohort(cfg);
  REQUIRE(cohort.size() == 100);
  for (const PatientSequence& seq : cohort) {
    CHECK(seq.events.size() >= static_cast<std::size_t>(cfg.len_min));
    CHECK(seq.events.size() <= static_cast<std::size_t>(cfg.len_max));
    CHECK((seq.label == 0 || seq.label == 1));
    double prev = 0.0;
    for (const Event& e : seq.events) {
      CHECK(e.t > prev);
      prev = e.t;
      CHECK(e.code >= 0);
      CHECK(e.code < cfg.vocab_size);
      CHECK(e.values.size() == static_cast<std::size_t>(cfg.cont_dim));
    }
  }
}

TEST_CASE("empirical positive rate matches the Bayes oracle's Monte-Carlo mean") {
  GenConfig cfg;
  cfg.n_patients = 20000;
  cfg.seed = 2024;
  Cohort cohort = generate_cohort(cfg);

  double sum_p = 0.0, sum_var = 0.0, sum_y = 0.0;
  for (const PatientSequence& seq : cohort) {
    const double p = label_probability(seq, cfg);
    sum_p += p;
    sum_var += p * (1.0 - p);
    sum_y += seq.label;
  }
  const double n = static_cast<double>(cohort.size());
  const double diff = std::abs(sum_y / n - sum_p / n);
  // 99% interval of the label mean around the oracle mean
  const double bound = 2.576 * std::sqrt(sum_var) / n;
  CHECK(diff <= bound);
}

TEST_CASE("label_probability base case is sigmoid(beta0)") {
  GenConfig cfg;
  cfg.beta0 = -2.0;  // example value; the oracle is sigma(beta0) whenever the
                     // window contributes nothing

  // the second event follows a 7h gap -> in the window, but neutral
  PatientSequence in_window = two_event_seq(7.0, 1, 0.0);
  CHECK(label_probability(in_window, cfg) == doctest::Approx(0.11920292).epsilon(1e-6));

  // no event follows a long gap -> empty window
  PatientSequence no_window = two_event_seq(0.5, 1, 3.0);
  CHECK(label_probability(no_window, cfg) == doctest::Approx(0.11920292).epsilon(1e-6));
}

TEST_CASE("a risk-code event in the window strictly increases the probability") {
  GenConfig cfg;
  PatientSequence neutral = two_event_seq(9.0, 1, 0.4);
  PatientSequence risky = two_event_seq(9.0, cfg.risk_code, 0.4);
  CHECK(label_probability(risky, cfg) > label_probability(neutral, cfg));
}

TEST_CASE("beta1=beta2=0 gives sigmoid(beta0) for every sequence") {
  GenConfig cfg;
  cfg.n_patients = 30;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.seed = 5;
  const double expected = 1.0 / (1.0 + std::exp(-cfg.beta0));
  for (const PatientSequence& seq : generate_cohort(cfg)) {
    CHECK(label_probability(seq, cfg) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("label_probability rejects schema mismatch") {
  GenConfig cfg;
  PatientSequence seq = two_event_seq(7.0, 1, 0.0, 3);  // cont_dim 3, config expects 8
  CHECK_THROWS_AS(static_cast<void>(label_probability(seq, cfg)), SchemaError);
}

TEST_CASE("contaminate: rho=0 is the identity, rho=1 replaces everything") {
  GenConfig cfg;
  cfg.n_patients = 20;
  cfg.seed = 9;
  Cohort cohort = generate_cohort(cfg);

  ContaminationSpec none{0.0, 10.0, 1};
  CHECK(contaminate(cohort, none) == cohort);

  ContaminationSpec all{1.0, 10.0, 1};
  Cohort out = contaminate(cohort, all);
  std::size_t changed = 0, total = 0;
  for (std::size_t p = 0; p < cohort.size(); ++p) {
    for (std::size_t e = 0; e < cohort[p].events.size(); ++e) {
      ++total;
      if (out[p].events[e].values != cohort[p].events[e].values) ++changed;
    }
  }
  CHECK(changed == total);
}

TEST_CASE("contaminate replaces exactly round(rho * total) events and nothing else") {
  GenConfig cfg;
  cfg.n_patients = 50;
  cfg.len_min = 20;
  cfg.len_max = 20;  // exactly 1000 events
  cfg.seed = 11;
  Cohort cohort = generate_cohort(cfg);
  const Cohort backup = cohort;

  ContaminationSpec spec{0.2, 10.0, 3};
  Cohort out = contaminate(cohort, spec);
  CHECK(cohort == backup);  // input untouched

  std::size_t changed = 0;
  for (std::size_t p = 0; p < cohort.size(); ++p) {
    CHECK(out[p].label == cohort[p].label);
    CHECK(out[p].patient_id == cohort[p].patient_id);
    REQUIRE(out[p].events.size() == cohort[p].events.size());
    for (std::size_t e = 0; e < cohort[p].events.size(); ++e) {
      CHECK(out[p].events[e].t == cohort[p].events[e].t);
      CHECK(out[p].events[e].code == cohort[p].events[e].code);
      if (out[p].events[e].values != cohort[p].events[e].values) ++changed;
    }
  }
  CHECK(changed == 200);

  // determinism
  CHECK(contaminate(cohort, spec) == out);
}

TEST_CASE("gen config validation") {
  GenConfig cfg;
  cfg.len_min = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GenConfig{};
  cfg.len_min = 10;
  cfg.len_max = 5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GenConfig{};
  cfg.risk_code = cfg.vocab_size;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  ContaminationSpec spec{1.5, 10.0, 0};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}
