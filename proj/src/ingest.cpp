#include "riskformer/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <limits>

#include "riskformer/errors.hpp"

namespace riskformer {

using nlohmann::json;

void PatientSequence::validate() const {
  if (events.empty()) throw SchemaError("patient '" + patient_id + "': no events");
  if (label != 0 && label != 1) {
    throw SchemaError("patient '" + patient_id + "': label must be 0 or 1");
  }
  const std::size_t width = events.front().values.size();
  double prev_t = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (!std::isfinite(e.t)) {
      throw SchemaError("patient '" + patient_id + "': non-finite timestamp");
    }
    if (e.t <= prev_t) {
      throw SchemaError("patient '" + patient_id + "': timestamps not strictly increasing at event " +
                        std::to_string(i));
    }
    prev_t = e.t;
    if (e.code < 0) throw SchemaError("patient '" + patient_id + "': negative code");
    if (e.values.size() != width) {
      throw SchemaError("patient '" + patient_id + "': inconsistent values length at event " +
                        std::to_string(i));
    }
    for (double v : e.values) {
      if (!std::isfinite(v)) {
        throw SchemaError("patient '" + patient_id + "': non-finite value");
      }
    }
  }
  for (double v : static_features) {
    if (!std::isfinite(v)) {
      throw SchemaError("patient '" + patient_id + "': non-finite static feature");
    }
  }
}

int PatientSequence::cont_width() const {
  return static_cast<int>(events.front().values.size() + static_features.size());
}

PatientSequence parse_record(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("record is not an object");

  PatientSequence seq;
  try {
    seq.patient_id = j.at("patient_id").get<std::string>();
    seq.label = j.at("label").get<int>();
    if (j.contains("static")) seq.static_features = j.at("static").get<std::vector<double>>();
    for (const json& je : j.at("events")) {
      Event e;
      e.t = je.at("t").get<double>();
      e.code = je.at("code").get<int>();
      e.values = je.at("values").get<std::vector<double>>();
      seq.events.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed record: ") + e.what());
  }
  seq.validate();
  return seq;
}

std::string serialize_record(const PatientSequence& seq) {
  json j;
  j["patient_id"] = seq.patient_id;
  j["label"] = seq.label;
  if (!seq.static_features.empty()) j["static"] = seq.static_features;
  json events = json::array();
  for (const Event& e : seq.events) {
    events.push_back({{"t", e.t}, {"code", e.code}, {"values", e.values}});
  }
  j["events"] = std::move(events);
  return j.dump();
}

ParseResult parse_lines(std::span<const std::string> lines) {
  ParseResult result;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      result.records.push_back(parse_record(lines[i]));
    } catch (const SchemaError& e) {
      result.errors.push_back({i + 1, e.what()});
    }
  }
  return result;
}

ParseResult parse_stream(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return parse_lines(lines);
}

void write_cohort(std::ostream& out, const Cohort& cohort) {
  for (const PatientSequence& seq : cohort) out << serialize_record(seq) << '\n';
}

void write_cohort_file(const std::string& path, const Cohort& cohort) {
  std::ofstream out(path);
  if (!out) throw IntegrityError("cannot open '" + path + "' for writing");
  write_cohort(out, cohort);
  if (!out) throw IntegrityError("write to '" + path + "' failed");
}

Cohort read_cohort_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IntegrityError("cannot open cohort file '" + path + "'");
  ParseResult result = parse_stream(in);
  if (!result.errors.empty()) {
    const ParseIssue& first = result.errors.front();
    std::string msg = "line " + std::to_string(first.line) + ": " + first.message;
    if (result.errors.size() > 1) {
      msg += " (and " + std::to_string(result.errors.size() - 1) + " more)";
    }
    throw SchemaError(msg);
  }
  return result.records;
}

FeatureSpace fit_feature_space(const Cohort& train, int vocab_size) {
  if (train.empty()) throw ContractError("fit_feature_space: empty cohort");
  if (vocab_size < 1) throw ConfigError("fit_feature_space: vocab_size must be >= 1");

  const int width = train.front().cont_width();
  FeatureSpace fs;
  fs.vocab_size = vocab_size;
  fs.cont_dim = width;
  fs.cont_mean.assign(width, 0.0);
  fs.cont_std.assign(width, 0.0);

  std::size_t n = 0;
  std::vector<double> row(width);
  auto fill_row = [&](const PatientSequence& seq, const Event& e) {
    std::copy(e.values.begin(), e.values.end(), row.begin());
    std::copy(seq.static_features.begin(), seq.static_features.end(),
              row.begin() + static_cast<std::ptrdiff_t>(e.values.size()));
  };

  for (const PatientSequence& seq : train) {
    seq.validate();
    if (seq.cont_width() != width) {
      throw SchemaError("patient '" + seq.patient_id + "': continuous width " +
                        std::to_string(seq.cont_width()) + " != " + std::to_string(width));
    }
    for (const Event& e : seq.events) {
      if (e.code >= vocab_size) {
        throw SchemaError("patient '" + seq.patient_id + "': code " + std::to_string(e.code) +
                          " out of range for vocab_size " + std::to_string(vocab_size));
      }
      fill_row(seq, e);
      for (int d = 0; d < width; ++d) fs.cont_mean[d] += row[d];
      ++n;
    }
  }
  for (int d = 0; d < width; ++d) fs.cont_mean[d] /= static_cast<double>(n);

  for (const PatientSequence& seq : train) {
    for (const Event& e : seq.events) {
      fill_row(seq, e);
      for (int d = 0; d < width; ++d) {
        const double c = row[d] - fs.cont_mean[d];
        fs.cont_std[d] += c * c;
      }
    }
  }
  for (int d = 0; d < width; ++d) {
    fs.cont_std[d] = std::max(std::sqrt(fs.cont_std[d] / static_cast<double>(n)),
                              FeatureSpace::kStdFloor);
  }
  return fs;
}

VectorizedSequence vectorize(const PatientSequence& seq, const FeatureSpace& fs) {
  seq.validate();
  if (seq.cont_width() != fs.cont_dim) {
    throw SchemaError("patient '" + seq.patient_id + "': continuous width " +
                      std::to_string(seq.cont_width()) + " does not match feature space (" +
                      std::to_string(fs.cont_dim) + ")");
  }
  const int T = static_cast<int>(seq.events.size());
  VectorizedSequence out;
  out.label = seq.label;
  out.X = Tensor2(T, fs.d_in());
  out.dt.assign(T, 0.0);

  for (int i = 0; i < T; ++i) {
    const Event& e = seq.events[static_cast<std::size_t>(i)];
    if (e.code >= fs.vocab_size) {
      throw SchemaError("patient '" + seq.patient_id + "': code " + std::to_string(e.code) +
                        " out of range for vocab_size " + std::to_string(fs.vocab_size));
    }
    out.X(i, e.code) = 1.0;
    int d = 0;
    for (double v : e.values) {
      out.X(i, fs.vocab_size + d) = (v - fs.cont_mean[d]) / fs.cont_std[d];
      ++d;
    }
    for (double v : seq.static_features) {
      out.X(i, fs.vocab_size + d) = (v - fs.cont_mean[d]) / fs.cont_std[d];
      ++d;
    }
    // dt_1 := 0 anchors the first event's temporal encoding at the bias.
    if (i > 0) out.dt[static_cast<std::size_t>(i)] = e.t - seq.events[static_cast<std::size_t>(i) - 1].t;
  }
  return out;
}

Batch batch_pad(std::span<const VectorizedSequence> vseqs) {
  if (vseqs.empty()) throw ContractError("batch_pad: empty sequence list");
  Batch batch;
  for (const VectorizedSequence& v : vseqs) batch.t_max = std::max(batch.t_max, v.X.rows());
  const int d_in = vseqs.front().X.cols();
  for (const VectorizedSequence& v : vseqs) {
    if (v.X.cols() != d_in) {
      throw ShapeError("batch_pad: feature width mismatch (" + std::to_string(v.X.cols()) +
                       " vs " + std::to_string(d_in) + ")");
    }
    Tensor2 x(batch.t_max, d_in);
    std::vector<double> dt(static_cast<std::size_t>(batch.t_max), 0.0);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(batch.t_max), 0);
    for (int i = 0; i < v.X.rows(); ++i) {
      for (int j = 0; j < d_in; ++j) x(i, j) = v.X(i, j);
      dt[static_cast<std::size_t>(i)] = v.dt[static_cast<std::size_t>(i)];
      mask[static_cast<std::size_t>(i)] = 1;
    }
    batch.X.push_back(std::move(x));
    batch.dt.push_back(std::move(dt));
    batch.mask.push_back(std::move(mask));
    batch.labels.push_back(v.label);
  }
  return batch;
}

}  // namespace riskformer
