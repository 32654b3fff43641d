#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "multinst/core.hpp"
#include "multinst/stats.hpp"
#include "multinst/synth.hpp"
#include "multinst/train.hpp"

namespace multinst::io {

// File formats. CSV columns are fixed, headers are matched byte for byte,
// and doubles are written with 17 significant digits so a read-back is
// lossless. JSON documents use self-describing field names.

/// Shortest lossless text form used in CSV output.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw io_error("cannot open for reading: " + path);
  }
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw io_error("cannot open for writing: " + path);
  }
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

inline double parse_double(std::string_view text, const std::string& path) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw io_error("malformed number '" + std::string(text) + "' in " + path);
  }
  return value;
}

inline long long parse_int(std::string_view text, const std::string& path) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw io_error("malformed integer '" + std::string(text) + "' in " + path);
  }
  return value;
}

inline void expect_header(const std::vector<std::string>& got, std::span<const char* const> want,
                          const std::string& path) {
  if (got.size() != want.size()) {
    throw io_error("unexpected column count in " + path);
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (got[i] != want[i]) {
      throw io_error("unexpected header column '" + got[i] + "' in " + path);
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// dataset CSV: x1,...,xd,omega_a,omega_b

inline void write_dataset_csv(const std::string& path, std::span<const WeightedInstance> data) {
  if (data.empty()) {
    throw domain_error("refusing to write an empty dataset");
  }
  auto out = detail::open_output(path);
  const std::size_t d = data.front().features.size();
  for (std::size_t k = 0; k < d; ++k) {
    out << 'x' << (k + 1) << ',';
  }
  out << "omega_a,omega_b\n";
  for (const WeightedInstance& inst : data) {
    if (inst.features.size() != d) {
      throw dimension_mismatch_error("inconsistent feature dimension in dataset");
    }
    for (double x : inst.features) {
      out << format_double(x) << ',';
    }
    out << format_double(inst.omega_a) << ',' << format_double(inst.omega_b) << '\n';
  }
  if (!out) {
    throw io_error("write failed: " + path);
  }
}

inline std::vector<WeightedInstance> read_dataset_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error("empty dataset file: " + path);
  }
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "omega_a" ||
      header.back() != "omega_b") {
    throw io_error("dataset header must end with omega_a,omega_b in " + path);
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k) {
    if (header[k] != "x" + std::to_string(k + 1)) {
      throw io_error("dataset feature columns must be x1..xd in " + path);
    }
  }
  std::vector<WeightedInstance> data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != d + 2) {
      throw io_error("row width does not match header in " + path);
    }
    WeightedInstance inst;
    inst.features.reserve(d);
    for (std::size_t k = 0; k < d; ++k) {
      inst.features.push_back(detail::parse_double(fields[k], path));
    }
    inst.omega_a = detail::parse_double(fields[d], path);
    inst.omega_b = detail::parse_double(fields[d + 1], path);
    data.push_back(std::move(inst));
  }
  return data;
}

// ---------------------------------------------------------------------------
// scores CSV: score,omega_a,omega_b

inline void write_scores_csv(const std::string& path, std::span<const ScoredInstance> scored) {
  auto out = detail::open_output(path);
  out << "score,omega_a,omega_b\n";
  for (const ScoredInstance& s : scored) {
    out << format_double(s.score) << ',' << format_double(s.omega_a) << ','
        << format_double(s.omega_b) << '\n';
  }
  if (!out) {
    throw io_error("write failed: " + path);
  }
}

inline std::vector<ScoredInstance> read_scores_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error("empty scores file: " + path);
  }
  static constexpr const char* kHeader[] = {"score", "omega_a", "omega_b"};
  detail::expect_header(detail::split_csv_line(line), kHeader, path);
  std::vector<ScoredInstance> scored;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) {
      throw io_error("row width does not match header in " + path);
    }
    scored.push_back(ScoredInstance{detail::parse_double(fields[0], path),
                                    detail::parse_double(fields[1], path),
                                    detail::parse_double(fields[2], path)});
  }
  return scored;
}

// ---------------------------------------------------------------------------
// rates CSV: n,theta,c,tpr,fpr,miss,auc_n

struct RateRow {
  int n = 1;
  double theta = 0.5;
  double c = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double miss = 0.0;
  double auc_n = 0.0;
};

inline void write_rates_csv(const std::string& path, std::span<const RateRow> rows) {
  auto out = detail::open_output(path);
  out << "n,theta,c,tpr,fpr,miss,auc_n\n";
  for (const RateRow& r : rows) {
    out << r.n << ',' << format_double(r.theta) << ',' << format_double(r.c) << ','
        << format_double(r.tpr) << ',' << format_double(r.fpr) << ',' << format_double(r.miss)
        << ',' << format_double(r.auc_n) << '\n';
  }
  if (!out) {
    throw io_error("write failed: " + path);
  }
}

inline std::vector<RateRow> read_rates_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error("empty rates file: " + path);
  }
  static constexpr const char* kHeader[] = {"n", "theta", "c", "tpr", "fpr", "miss", "auc_n"};
  detail::expect_header(detail::split_csv_line(line), kHeader, path);
  std::vector<RateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) {
      throw io_error("row width does not match header in " + path);
    }
    rows.push_back(RateRow{static_cast<int>(detail::parse_int(f[0], path)),
                           detail::parse_double(f[1], path), detail::parse_double(f[2], path),
                           detail::parse_double(f[3], path), detail::parse_double(f[4], path),
                           detail::parse_double(f[5], path), detail::parse_double(f[6], path)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// comparison CSV:
// n,theta,tpr_mc,tpr_se,tpr_analytic,fpr_mc,fpr_se,fpr_analytic,auc_mc,auc_se,auc_analytic

struct ComparisonRow {
  int n = 1;
  double theta = 0.5;
  double tpr_mc = 0.0, tpr_se = 0.0, tpr_analytic = 0.0;
  double fpr_mc = 0.0, fpr_se = 0.0, fpr_analytic = 0.0;
  double auc_mc = 0.0, auc_se = 0.0, auc_analytic = 0.0;
};

inline void write_comparison_csv(const std::string& path, std::span<const ComparisonRow> rows) {
  auto out = detail::open_output(path);
  out << "n,theta,tpr_mc,tpr_se,tpr_analytic,fpr_mc,fpr_se,fpr_analytic,auc_mc,auc_se,"
         "auc_analytic\n";
  for (const ComparisonRow& r : rows) {
    out << r.n << ',' << format_double(r.theta) << ',' << format_double(r.tpr_mc) << ','
        << format_double(r.tpr_se) << ',' << format_double(r.tpr_analytic) << ','
        << format_double(r.fpr_mc) << ',' << format_double(r.fpr_se) << ','
        << format_double(r.fpr_analytic) << ',' << format_double(r.auc_mc) << ','
        << format_double(r.auc_se) << ',' << format_double(r.auc_analytic) << '\n';
  }
  if (!out) {
    throw io_error("write failed: " + path);
  }
}

inline std::vector<ComparisonRow> read_comparison_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error("empty comparison file: " + path);
  }
  static constexpr const char* kHeader[] = {"n",      "theta",  "tpr_mc", "tpr_se",
                                            "tpr_analytic", "fpr_mc", "fpr_se", "fpr_analytic",
                                            "auc_mc", "auc_se", "auc_analytic"};
  detail::expect_header(detail::split_csv_line(line), kHeader, path);
  std::vector<ComparisonRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 11) {
      throw io_error("row width does not match header in " + path);
    }
    ComparisonRow r;
    r.n = static_cast<int>(detail::parse_int(f[0], path));
    r.theta = detail::parse_double(f[1], path);
    r.tpr_mc = detail::parse_double(f[2], path);
    r.tpr_se = detail::parse_double(f[3], path);
    r.tpr_analytic = detail::parse_double(f[4], path);
    r.fpr_mc = detail::parse_double(f[5], path);
    r.fpr_se = detail::parse_double(f[6], path);
    r.fpr_analytic = detail::parse_double(f[7], path);
    r.auc_mc = detail::parse_double(f[8], path);
    r.auc_se = detail::parse_double(f[9], path);
    r.auc_analytic = detail::parse_double(f[10], path);
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// training trace CSV: epoch,loss_train,loss_val,auc_val

inline void write_trace_csv(const std::string& path, const train::TrainTrace& trace) {
  auto out = detail::open_output(path);
  out << "epoch,loss_train,loss_val,auc_val\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    out << (e + 1) << ',' << format_double(trace[e].loss_train) << ','
        << format_double(trace[e].loss_val) << ',' << format_double(trace[e].auc_val) << '\n';
  }
  if (!out) {
    throw io_error("write failed: " + path);
  }
}

inline train::TrainTrace read_trace_csv(const std::string& path) {
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error("empty trace file: " + path);
  }
  static constexpr const char* kHeader[] = {"epoch", "loss_train", "loss_val", "auc_val"};
  detail::expect_header(detail::split_csv_line(line), kHeader, path);
  train::TrainTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 4) {
      throw io_error("row width does not match header in " + path);
    }
    trace.push_back(train::EpochStats{detail::parse_double(f[1], path),
                                      detail::parse_double(f[2], path),
                                      detail::parse_double(f[3], path)});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// JSON documents

using json = nlohmann::ordered_json;

namespace detail {

inline json load_json(const std::string& path) {
  auto in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("malformed JSON in " + path + ": " + e.what());
  }
  return doc;
}

inline void save_json(const std::string& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  if (!out) {
    throw io_error("write failed: " + path);
  }
}

template <typename T>
T get_field(const json& doc, const char* key, const std::string& path) {
  if (!doc.contains(key)) {
    throw io_error(std::string("missing field '") + key + "' in " + path);
  }
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("bad field '") + key + "' in " + path + ": " + e.what());
  }
}

}  // namespace detail

struct MomentsDocument {
  ClassMoments moments;
  double auc_1 = 0.5;
};

inline void write_moments_json(const std::string& path, const ClassMoments& m, double auc_1) {
  json doc;
  doc["mu_a"] = m.mu_a;
  doc["sigma_a"] = m.sigma_a;
  doc["mu_b"] = m.mu_b;
  doc["sigma_b"] = m.sigma_b;
  doc["n_effective_a"] = m.n_effective_a;
  doc["n_effective_b"] = m.n_effective_b;
  doc["auc_1"] = auc_1;
  detail::save_json(path, doc);
}

inline MomentsDocument read_moments_json(const std::string& path) {
  const json doc = detail::load_json(path);
  MomentsDocument out;
  out.moments.mu_a = detail::get_field<double>(doc, "mu_a", path);
  out.moments.sigma_a = detail::get_field<double>(doc, "sigma_a", path);
  out.moments.mu_b = detail::get_field<double>(doc, "mu_b", path);
  out.moments.sigma_b = detail::get_field<double>(doc, "sigma_b", path);
  out.moments.n_effective_a = detail::get_field<double>(doc, "n_effective_a", path);
  out.moments.n_effective_b = detail::get_field<double>(doc, "n_effective_b", path);
  out.auc_1 = detail::get_field<double>(doc, "auc_1", path);
  if (!(out.moments.sigma_a > 0.0) || !(out.moments.sigma_b > 0.0)) {
    throw io_error("moments file has non-positive sigma in " + path);
  }
  return out;
}

struct ThresholdDocument {
  int n = 1;
  double c_opt = 0.0;
  double theta_opt = 0.5;
  double sigma_discrepancy = 0.0;
  double c_opt_numeric = 0.0;
};

inline void write_threshold_json(const std::string& path, const ThresholdDocument& t) {
  json doc;
  doc["n"] = t.n;
  doc["c_opt"] = t.c_opt;
  doc["theta_opt"] = t.theta_opt;
  doc["sigma_discrepancy"] = t.sigma_discrepancy;
  doc["c_opt_numeric"] = t.c_opt_numeric;
  detail::save_json(path, doc);
}

inline ThresholdDocument read_threshold_json(const std::string& path) {
  const json doc = detail::load_json(path);
  ThresholdDocument t;
  t.n = detail::get_field<int>(doc, "n", path);
  t.c_opt = detail::get_field<double>(doc, "c_opt", path);
  t.theta_opt = detail::get_field<double>(doc, "theta_opt", path);
  t.sigma_discrepancy = detail::get_field<double>(doc, "sigma_discrepancy", path);
  t.c_opt_numeric = detail::get_field<double>(doc, "c_opt_numeric", path);
  return t;
}

inline constexpr int kModelVersion = 1;

inline void write_model_json(const std::string& path, const train::ScorerModel& model) {
  json doc;
  doc["version"] = kModelVersion;
  doc["dim"] = model.weights.size();
  doc["weights"] = model.weights;
  doc["bias"] = model.bias;
  doc["config"] = {{"learning_rate", model.config.learning_rate},
                   {"epochs", model.config.epochs},
                   {"batch_size", model.config.batch_size},
                   {"val_fraction", model.config.val_fraction},
                   {"seed", model.config.seed}};
  detail::save_json(path, doc);
}

inline train::ScorerModel read_model_json(const std::string& path) {
  const json doc = detail::load_json(path);
  if (detail::get_field<int>(doc, "version", path) != kModelVersion) {
    throw io_error("unsupported model version in " + path);
  }
  train::ScorerModel model;
  model.weights = detail::get_field<std::vector<double>>(doc, "weights", path);
  model.bias = detail::get_field<double>(doc, "bias", path);
  if (model.weights.size() != detail::get_field<std::size_t>(doc, "dim", path)) {
    throw io_error("model dim disagrees with weights length in " + path);
  }
  if (doc.contains("config")) {
    const json& c = doc.at("config");
    model.config.learning_rate = detail::get_field<double>(c, "learning_rate", path);
    model.config.epochs = detail::get_field<int>(c, "epochs", path);
    model.config.batch_size = detail::get_field<int>(c, "batch_size", path);
    model.config.val_fraction = detail::get_field<double>(c, "val_fraction", path);
    model.config.seed = detail::get_field<std::uint64_t>(c, "seed", path);
  }
  return model;
}

inline void write_synth_config_json(const std::string& path, const synth::SynthConfig& config) {
  json doc;
  doc["dim"] = config.dim;
  doc["mean_a"] = config.mean_a;
  doc["mean_b"] = config.mean_b;
  doc["scale"] = config.scale;
  doc["observed_dims"] = config.observed_dims;
  doc["class_prior"] = config.class_prior;
  doc["seed"] = config.seed;
  detail::save_json(path, doc);
}

inline synth::SynthConfig read_synth_config_json(const std::string& path) {
  const json doc = detail::load_json(path);
  synth::SynthConfig config;
  config.dim = detail::get_field<int>(doc, "dim", path);
  config.mean_a = detail::get_field<std::vector<double>>(doc, "mean_a", path);
  config.mean_b = detail::get_field<std::vector<double>>(doc, "mean_b", path);
  config.scale = detail::get_field<double>(doc, "scale", path);
  config.observed_dims = detail::get_field<std::vector<int>>(doc, "observed_dims", path);
  config.class_prior = detail::get_field<double>(doc, "class_prior", path);
  if (doc.contains("seed")) {
    config.seed = detail::get_field<std::uint64_t>(doc, "seed", path);
  }
  synth::validate(config);
  return config;
}

}  // namespace multinst::io
