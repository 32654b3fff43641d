// Command-line front end: dataset generation, scoring, moment estimation,
// analytic curve emission, threshold calibration and Monte Carlo validation,
// all exchanged through CSV/JSON files.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multinst/multinst.hpp"

namespace {

using namespace multinst;

// Exit codes: 0 success, 2 usage, 3 data degeneracy, 4 validation failure,
// 1 anything else.
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitValidation = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t env_or_default_seed() {
  if (const char* env = std::getenv("MULTINST_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw UsageError("MULTINST_SEED is not a valid unsigned integer");
    }
    return static_cast<std::uint64_t>(v);
  }
  return synth::kDefaultSeed;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  return flag ? *flag : env_or_default_seed();
}

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      const int n = std::stoi(tok);
      if (n < 1) throw std::invalid_argument("non-positive");
      out.push_back(n);
    } catch (const std::exception&) {
      throw UsageError("--n-list entries must be positive integers, got '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) {
    throw UsageError("--n-list must contain at least one group size");
  }
  return out;
}

// Either "lo:hi:count" or a comma-separated list of thresholds in (0,1).
std::vector<double> parse_theta_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0;
    long count = 0;
    char trailing = '\0';
    if (std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &lo, &hi, &count, &trailing) != 3 ||
        count < 1) {
      throw UsageError("--theta-grid range form must be lo:hi:count");
    }
    try {
      grid = default_theta_grid(static_cast<std::size_t>(count), lo, hi);
    } catch (const domain_error& e) {
      throw UsageError(std::string("invalid --theta-grid: ") + e.what());
    }
    return grid;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      grid.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("--theta-grid entries must be numbers, got '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (double theta : grid) {
    if (!(theta > 0.0) || !(theta < 1.0)) {
      throw UsageError("--theta-grid values must lie strictly inside (0, 1)");
    }
  }
  if (grid.empty()) {
    throw UsageError("--theta-grid must contain at least one threshold");
  }
  return grid;
}

std::vector<train::TrainSample> dataset_to_samples(const std::vector<WeightedInstance>& data) {
  std::vector<train::TrainSample> samples;
  samples.reserve(data.size());
  for (const WeightedInstance& inst : data) {
    samples.push_back(train::TrainSample{inst.features, soft_label_from_weights(inst.omega_a,
                                                                                inst.omega_b)});
  }
  return samples;
}

// --- subcommand bodies ------------------------------------------------------

int run_gen(const std::optional<std::string>& config_path, const std::string& out,
            std::int64_t m, const std::optional<std::uint64_t>& seed_flag) {
  synth::SynthConfig config;
  if (config_path) {
    config = io::read_synth_config_json(*config_path);
  } else {
    config = synth::default_config();
    config.seed = env_or_default_seed();
  }
  if (seed_flag) {
    config.seed = *seed_flag;
  }
  const std::vector<WeightedInstance> data = synth::generate(config, m);
  io::write_dataset_csv(out, data);
  double sum_a = 0.0, sum_b = 0.0;
  for (const WeightedInstance& inst : data) {
    sum_a += inst.omega_a;
    sum_b += inst.omega_b;
  }
  std::cout << "wrote " << out << ": m=" << m << " d=" << data.front().features.size()
            << " observed_dims=";
  for (std::size_t i = 0; i < config.observed_dims.size(); ++i) {
    std::cout << (i ? "," : "") << config.observed_dims[i];
  }
  std::cout << " sum_omega_a=" << io::format_double(sum_a)
            << " sum_omega_b=" << io::format_double(sum_b) << "\n";
  return 0;
}

int run_train(const std::string& data_path, const std::string& model_out,
              const std::optional<std::string>& trace_out, train::TrainConfig config,
              const std::optional<std::uint64_t>& seed_flag) {
  config.seed = resolve_seed(seed_flag);
  const auto samples = dataset_to_samples(io::read_dataset_csv(data_path));
  const auto [model, trace] = train::fit(samples, config);
  io::write_model_json(model_out, model);
  if (trace_out) {
    io::write_trace_csv(*trace_out, trace);
  }
  std::cout << "trained on " << samples.size() << " instances, " << trace.size() << " epochs";
  if (!trace.empty()) {
    std::cout << ", final loss_val=" << io::format_double(trace.back().loss_val)
              << " auc_val=" << io::format_double(trace.back().auc_val);
  }
  std::cout << "\n";
  return 0;
}

int run_score(const std::string& model_path, const std::string& data_path,
              const std::string& out) {
  const train::ScorerModel model = io::read_model_json(model_path);
  const std::vector<WeightedInstance> data = io::read_dataset_csv(data_path);
  std::vector<ScoredInstance> scored;
  scored.reserve(data.size());
  for (const WeightedInstance& inst : data) {
    scored.push_back(
        ScoredInstance{train::score(model, inst.features), inst.omega_a, inst.omega_b});
  }
  io::write_scores_csv(out, scored);
  std::cout << "wrote " << out << ": " << scored.size() << " scores\n";
  return 0;
}

int run_estimate(const std::string& scores_path, const std::string& out, double clamp_eps) {
  const std::vector<ScoredInstance> scored = io::read_scores_csv(scores_path);
  const ClassMoments m = class_moments(scored, clamp_eps);
  const double auc_1 = weighted_auc(scored);
  io::write_moments_json(out, m, auc_1);
  std::cout << "wrote " << out << ": mu_a=" << io::format_double(m.mu_a)
            << " mu_b=" << io::format_double(m.mu_b) << " auc_1=" << io::format_double(auc_1)
            << "\n";
  return 0;
}

int run_curves(const std::string& moments_path, const std::string& out,
               const std::string& n_list_text, const std::string& theta_grid_text) {
  const ClassMoments m = io::read_moments_json(moments_path).moments;
  const std::vector<int> n_list = parse_n_list(n_list_text);
  const std::vector<double> grid = parse_theta_grid(theta_grid_text);
  std::vector<io::RateRow> rows;
  rows.reserve(n_list.size() * grid.size());
  for (int n : n_list) {
    const double auc_n = analytic_auc(m, n);
    for (double theta : grid) {
      const Threshold thr = threshold_from_theta(theta);
      const RatePrediction p = analytic_rates(m, n, thr);
      rows.push_back(io::RateRow{n, thr.theta, thr.c, p.tpr, p.fpr, p.miss, auc_n});
    }
  }
  io::write_rates_csv(out, rows);
  std::cout << "wrote " << out << ": " << rows.size() << " rows\n";
  return 0;
}

int run_calibrate(const std::string& moments_path, const std::string& out, int n) {
  const ClassMoments m = io::read_moments_json(moments_path).moments;
  const OptimalThreshold opt = optimal_c(m, n);
  io::ThresholdDocument doc;
  doc.n = n;
  doc.c_opt = opt.c_opt;
  doc.theta_opt = opt.theta_opt;
  doc.sigma_discrepancy = opt.sigma_discrepancy;
  doc.c_opt_numeric = optimal_c_numeric(m, n);
  io::write_threshold_json(out, doc);
  std::cout << "wrote " << out << ": c_opt=" << io::format_double(doc.c_opt)
            << " theta_opt=" << io::format_double(doc.theta_opt) << "\n";
  return 0;
}

int run_simulate(const std::string& scores_path, const std::string& out,
                 const std::string& n_list_text, std::int64_t groups,
                 const std::optional<double>& theta_flag, bool use_optimal,
                 const std::optional<std::uint64_t>& seed_flag, int threads, double clamp_eps) {
  if (theta_flag.has_value() == use_optimal) {
    throw UsageError("exactly one of --theta or --use-optimal is required");
  }
  const std::vector<int> n_list = parse_n_list(n_list_text);
  const std::uint64_t seed = resolve_seed(seed_flag);
  const std::vector<ScoredInstance> scored = io::read_scores_csv(scores_path);
  const ClassMoments m = class_moments(scored, clamp_eps);

  std::vector<io::ComparisonRow> rows;
  rows.reserve(n_list.size());
  bool validation_ok = true;
  for (int n : n_list) {
    const Threshold thr =
        use_optimal ? threshold_from_c(optimal_c(m, n).c_opt) : threshold_from_theta(*theta_flag);
    const std::uint64_t seed_n = derive_stream(seed, 0x6e, static_cast<std::uint64_t>(n));
    const synth::McRates mc = synth::mc_rates(scored, n, thr, groups, seed_n, threads, clamp_eps);
    const synth::McEstimate auc = synth::mc_auc(scored, n, groups, seed_n, threads, clamp_eps);
    const RatePrediction pred = analytic_rates(m, n, thr);
    const double auc_pred = analytic_auc(m, n);

    io::ComparisonRow row;
    row.n = n;
    row.theta = thr.theta;
    row.tpr_mc = mc.tpr.value;
    row.tpr_se = mc.tpr.std_error;
    row.tpr_analytic = pred.tpr;
    row.fpr_mc = mc.fpr.value;
    row.fpr_se = mc.fpr.std_error;
    row.fpr_analytic = pred.fpr;
    row.auc_mc = auc.value;
    row.auc_se = auc.std_error;
    row.auc_analytic = auc_pred;
    rows.push_back(row);

    // Self-validation at 5 standard errors. The SE of the binomial count is
    // taken at whichever of the measured or predicted rate gives the wider
    // band, so a saturated measurement (se = 0) is still compared fairly.
    const auto violates = [groups](double mc_v, double se, double pred_v) {
      const double se_pred = std::sqrt(pred_v * (1.0 - pred_v) / static_cast<double>(groups));
      return std::abs(mc_v - pred_v) > 5.0 * std::max(se, se_pred);
    };
    if (violates(row.tpr_mc, row.tpr_se, row.tpr_analytic) ||
        violates(row.fpr_mc, row.fpr_se, row.fpr_analytic) ||
        violates(row.auc_mc, row.auc_se, row.auc_analytic)) {
      validation_ok = false;
    }
  }
  io::write_comparison_csv(out, rows);
  std::cout << "wrote " << out << ": " << rows.size() << " rows"
            << (validation_ok ? "" : " (VALIDATION FAILURE: mc vs analytic beyond 5 se)") << "\n";
  return validation_ok ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-instance binary classification toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic weighted dataset CSV");
  std::optional<std::string> gen_config;
  std::string gen_out;
  std::int64_t gen_m = 0;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("config", gen_config, "SynthConfig JSON (defaults to the built-in config)")
      ->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output dataset CSV")->required();
  gen->add_option("--m", gen_m, "number of instances")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "overrides the config seed");

  // train
  auto* tr = app.add_subcommand("train", "Fit the logistic scorer on a dataset CSV");
  std::string tr_data, tr_model;
  std::optional<std::string> tr_trace;
  std::optional<std::uint64_t> tr_seed;
  train::TrainConfig tr_config;
  tr->add_option("data", tr_data, "dataset CSV")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", tr_model, "output model JSON")->required();
  tr->add_option("--trace", tr_trace, "output per-epoch trace CSV");
  tr->add_option("--lr", tr_config.learning_rate, "learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--epochs", tr_config.epochs, "training epochs")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  tr->add_option("--batch", tr_config.batch_size, "mini-batch size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--val-frac", tr_config.val_fraction, "held-out validation fraction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.99));
  tr->add_option("--seed", tr_seed, "training seed");

  // score
  auto* sc = app.add_subcommand("score", "Score a dataset CSV with a model JSON");
  std::string sc_model, sc_data, sc_out;
  sc->add_option("model", sc_model, "model JSON")->required()->check(CLI::ExistingFile);
  sc->add_option("data", sc_data, "dataset CSV")->required()->check(CLI::ExistingFile);
  sc->add_option("--out", sc_out, "output scores CSV")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate log-odds class moments from scores");
  std::string est_scores, est_out;
  double est_eps = kDefaultScoreClamp;
  est->add_option("scores", est_scores, "scores CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--out", est_out, "output moments JSON")->required();
  est->add_option("--clamp-eps", est_eps, "score clamp before log-odds")
      ->capture_default_str()
      ->check(CLI::Range(1e-15, 0.1));

  // curves
  auto* cur = app.add_subcommand("curves", "Emit analytic TPR/FPR/MISS/AUC tables");
  std::string cur_moments, cur_out, cur_nlist = "1";
  std::string cur_grid = "0.001:0.999:999";
  cur->add_option("moments", cur_moments, "moments JSON")->required()->check(CLI::ExistingFile);
  cur->add_option("--out", cur_out, "output rates CSV")->required();
  cur->add_option("--n-list", cur_nlist, "comma-separated group sizes")->capture_default_str();
  cur->add_option("--theta-grid", cur_grid, "lo:hi:count or comma-separated thresholds")
      ->capture_default_str();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Optimal decision threshold for a group size");
  std::string cal_moments, cal_out;
  int cal_n = 1;
  cal->add_option("moments", cal_moments, "moments JSON")->required()->check(CLI::ExistingFile);
  cal->add_option("--out", cal_out, "output threshold JSON")->required();
  cal->add_option("--n", cal_n, "group size")->required()->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo vs analytic comparison table");
  std::string sim_scores, sim_out, sim_nlist = "1";
  std::int64_t sim_groups = 10000;
  std::optional<double> sim_theta;
  bool sim_useopt = false;
  std::optional<std::uint64_t> sim_seed;
  int sim_threads = 1;
  double sim_eps = kDefaultScoreClamp;
  sim->add_option("scores", sim_scores, "scores CSV")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "output comparison CSV")->required();
  sim->add_option("--n-list", sim_nlist, "comma-separated group sizes")->capture_default_str();
  sim->add_option("--groups", sim_groups, "Monte Carlo groups per estimate (>= 100)")
      ->capture_default_str()
      ->check(CLI::Range(static_cast<std::int64_t>(100), std::numeric_limits<std::int64_t>::max()));
  auto* sim_theta_opt =
      sim->add_option("--theta", sim_theta, "fixed threshold in (0,1)")
          ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
  auto* sim_useopt_flag =
      sim->add_flag("--use-optimal", sim_useopt, "calibrate theta_opt per group size");
  sim_theta_opt->excludes(sim_useopt_flag);
  sim_useopt_flag->excludes(sim_theta_opt);
  sim->add_option("--seed", sim_seed, "Monte Carlo seed");
  sim->add_option("--threads", sim_threads, "worker threads (result is thread-count independent)")
      ->capture_default_str()
      ->check(CLI::Range(1, 256));
  sim->add_option("--clamp-eps", sim_eps, "score clamp before log-odds")
      ->capture_default_str()
      ->check(CLI::Range(1e-15, 0.1));

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return run_gen(gen_config, gen_out, gen_m, gen_seed);
    if (tr->parsed()) return run_train(tr_data, tr_model, tr_trace, tr_config, tr_seed);
    if (sc->parsed()) return run_score(sc_model, sc_data, sc_out);
    if (est->parsed()) return run_estimate(est_scores, est_out, est_eps);
    if (cur->parsed()) return run_curves(cur_moments, cur_out, cur_nlist, cur_grid);
    if (cal->parsed()) return run_calibrate(cal_moments, cal_out, cal_n);
    if (sim->parsed())
      return run_simulate(sim_scores, sim_out, sim_nlist, sim_groups, sim_theta, sim_useopt,
                          sim_seed, sim_threads, sim_eps);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const degenerate_dataset_error& e) {
    std::cerr << "degenerate data: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const insufficient_data_error& e) {
    std::cerr << "degenerate data: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
