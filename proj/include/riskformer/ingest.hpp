#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskformer/tensor.hpp"

namespace riskformer {

struct Event {
  double t = 0.0;  // hours
  int code = 0;
  std::vector<double> values;
  bool operator==(const Event&) const = default;
};

// One patient's timestamped event history plus binary outcome label.
// `static_features` is an optional per-patient vector (demographics) that is
// appended to every event row at vectorization time.
struct PatientSequence {
  std::string patient_id;
  int label = 0;
  std::vector<double> static_features;
  std::vector<Event> events;

  // events non-empty, timestamps strictly increasing, values finite and of
  // uniform length. Throws SchemaError / ContractError.
  void validate() const;
  // Event-level continuous width plus static width.
  int cont_width() const;
  bool operator==(const PatientSequence&) const = default;
};

using Cohort = std::vector<PatientSequence>;

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  Cohort records;
  std::vector<ParseIssue> errors;
};

// One JSON object per line. Malformed or invalid records are collected into
// `errors` with their line number; remaining lines are still processed.
ParseResult parse_lines(std::span<const std::string> lines);
ParseResult parse_stream(std::istream& in);

// Throws SchemaError on a malformed record (no line context).
PatientSequence parse_record(const std::string& line);
std::string serialize_record(const PatientSequence& seq);

void write_cohort(std::ostream& out, const Cohort& cohort);
void write_cohort_file(const std::string& path, const Cohort& cohort);
// Strict variant for CLI paths: any line error raises SchemaError naming the
// first offending line.
Cohort read_cohort_file(const std::string& path);

// Frozen featurization: code vocabulary size plus z-score statistics for the
// continuous block, fitted on the training split only.
struct FeatureSpace {
  int vocab_size = 0;
  int cont_dim = 0;
  std::vector<double> cont_mean;
  std::vector<double> cont_std;  // population std, floored at 1e-6

  int d_in() const { return vocab_size + cont_dim; }
  bool operator==(const FeatureSpace&) const = default;

  static constexpr double kStdFloor = 1e-6;
};

FeatureSpace fit_feature_space(const Cohort& train, int vocab_size);

// Dense model inputs for one sequence: X rows are
// [one-hot(code) | z-scored continuous], dt[0] = 0, dt[i] = t_i - t_{i-1}.
struct VectorizedSequence {
  Tensor2 X;
  std::vector<double> dt;
  int label = 0;
};

VectorizedSequence vectorize(const PatientSequence& seq, const FeatureSpace& fs);

// Variable-length sequences padded to the longest member. Padded rows are
// exactly zero with mask 0; original order is preserved.
struct Batch {
  std::vector<Tensor2> X;
  std::vector<std::vector<double>> dt;
  std::vector<std::vector<std::uint8_t>> mask;
  std::vector<int> labels;
  int t_max = 0;

  std::size_t size() const { return X.size(); }
};

Batch batch_pad(std::span<const VectorizedSequence> vseqs);

}  // namespace riskformer
