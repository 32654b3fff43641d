#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "multinst/core.hpp"

namespace multinst {

/// A scored instance: the single-instance posterior p = P(A|X) together with
/// the class weights it is evaluated under. Hard ground-truth labels are the
/// special case (omega_a, omega_b) in {(1,0), (0,1)}.
struct ScoredInstance {
  double score = 0.0;
  double omega_a = 0.0;
  double omega_b = 0.0;
};

/// Class-conditional moments of the log-odds variable Q = log(p/(1-p)):
/// weighted mean and standard deviation under each class, plus the Kish
/// effective sample sizes (sum w)^2 / sum w^2 as an estimator-noise gauge.
struct ClassMoments {
  double mu_a = 0.0;
  double sigma_a = 0.0;
  double mu_b = 0.0;
  double sigma_b = 0.0;
  double n_effective_a = 0.0;
  double n_effective_b = 0.0;
};

struct RocPoint {
  double theta = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct Rates {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Weighted expectation sum(w_i v_i) / sum(w_i).
inline double weighted_expectation(std::span<const double> weights,
                                   std::span<const double> values) {
  if (weights.size() != values.size()) {
    throw dimension_mismatch_error("weights and values differ in length");
  }
  double sum_w = 0.0;
  double sum_wv = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (std::isnan(weights[i]) || weights[i] < 0.0) {
      throw invalid_instance_error("expectation weights must be non-negative");
    }
    sum_w += weights[i];
    sum_wv += weights[i] * values[i];
  }
  if (!(sum_w > 0.0)) {
    throw degenerate_dataset_error("all expectation weights are zero");
  }
  return sum_wv / sum_w;
}

namespace detail {

struct WeightedMomentAccumulator {
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  std::size_t nonzero = 0;
};

inline void check_class_weight(double w, const char* klass) {
  if (std::isnan(w) || w < 0.0) {
    throw invalid_instance_error(std::string("negative or NaN weight for class ") + klass);
  }
}

}  // namespace detail

/// Weighted mean/stddev of the log-odds under each class. The variance is the
/// plain weighted second central moment; no small-sample correction is
/// applied, n_effective is reported instead.
inline ClassMoments class_moments(std::span<const ScoredInstance> scored,
                                  double eps = kDefaultScoreClamp) {
  detail::WeightedMomentAccumulator acc_a, acc_b;
  std::vector<double> q(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const ScoredInstance& s = scored[i];
    detail::check_class_weight(s.omega_a, "A");
    detail::check_class_weight(s.omega_b, "B");
    q[i] = log_odds(s.score, eps);
    acc_a.sum_w += s.omega_a;
    acc_a.sum_w2 += s.omega_a * s.omega_a;
    if (s.omega_a > 0.0) ++acc_a.nonzero;
    acc_b.sum_w += s.omega_b;
    acc_b.sum_w2 += s.omega_b * s.omega_b;
    if (s.omega_b > 0.0) ++acc_b.nonzero;
  }
  const auto check = [](const detail::WeightedMomentAccumulator& acc, const char* klass) {
    if (!(acc.sum_w > 0.0)) {
      throw degenerate_dataset_error(std::string("class ") + klass + " has zero total weight");
    }
    if (acc.nonzero < 2) {
      throw insufficient_data_error(std::string("class ") + klass +
                                    " has fewer than 2 instances with nonzero weight");
    }
  };
  check(acc_a, "A");
  check(acc_b, "B");

  double mu_a = 0.0, mu_b = 0.0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    mu_a += scored[i].omega_a * q[i];
    mu_b += scored[i].omega_b * q[i];
  }
  mu_a /= acc_a.sum_w;
  mu_b /= acc_b.sum_w;

  double var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const double da = q[i] - mu_a;
    const double db = q[i] - mu_b;
    var_a += scored[i].omega_a * da * da;
    var_b += scored[i].omega_b * db * db;
  }
  var_a /= acc_a.sum_w;
  var_b /= acc_b.sum_w;
  if (!(var_a > 0.0) || !(var_b > 0.0)) {
    throw degenerate_dataset_error("zero log-odds variance in one of the classes");
  }

  ClassMoments m;
  m.mu_a = mu_a;
  m.sigma_a = std::sqrt(var_a);
  m.mu_b = mu_b;
  m.sigma_b = std::sqrt(var_b);
  m.n_effective_a = acc_a.sum_w * acc_a.sum_w / acc_a.sum_w2;
  m.n_effective_b = acc_b.sum_w * acc_b.sum_w / acc_b.sum_w2;
  return m;
}

/// Weighted TPR/FPR at a threshold: the fraction of class-A (class-B) weight
/// carried by instances with score strictly above theta.
inline Rates empirical_rates(std::span<const ScoredInstance> scored, const Threshold& threshold) {
  double sum_a = 0.0, sum_b = 0.0, hit_a = 0.0, hit_b = 0.0;
  for (const ScoredInstance& s : scored) {
    detail::check_class_weight(s.omega_a, "A");
    detail::check_class_weight(s.omega_b, "B");
    if (std::isnan(s.score)) {
      throw invalid_score_error("score is NaN");
    }
    sum_a += s.omega_a;
    sum_b += s.omega_b;
    if (s.score > threshold.theta) {
      hit_a += s.omega_a;
      hit_b += s.omega_b;
    }
  }
  if (!(sum_a > 0.0) || !(sum_b > 0.0)) {
    throw degenerate_dataset_error("one of the classes has zero total weight");
  }
  return Rates{hit_a / sum_a, hit_b / sum_b};
}

/// The default ROC grid: 999 thresholds uniform over [0.001, 0.999].
inline std::vector<double> default_theta_grid(std::size_t count = 999, double lo = 0.001,
                                              double hi = 0.999) {
  if (count == 0 || !(lo > 0.0) || !(hi < 1.0) || !(lo <= hi)) {
    throw domain_error("invalid theta grid parameters");
  }
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + step * static_cast<double>(i);
  }
  return grid;
}

inline std::vector<RocPoint> roc_curve(std::span<const ScoredInstance> scored,
                                       std::span<const double> thetas) {
  if (thetas.empty()) {
    throw domain_error("theta grid must be non-empty");
  }
  std::vector<double> sorted(thetas.begin(), thetas.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<RocPoint> curve;
  curve.reserve(sorted.size());
  for (double theta : sorted) {
    const Rates r = empirical_rates(scored, threshold_from_theta(theta));
    curve.push_back(RocPoint{theta, r.tpr, r.fpr});
  }
  return curve;
}

/// Weighted AUC, the probability that an A-weighted instance outscores a
/// B-weighted one, ties counting one half (Mann-Whitney convention):
///   sum_{i,j} wA_i wB_j [ (p_i > p_j) + 0.5 (p_i == p_j) ] / (sum wA sum wB).
/// Computed in O(M log M) by sorting and sweeping runs of equal scores.
inline double weighted_auc(std::span<const ScoredInstance> scored) {
  double sum_a = 0.0, sum_b = 0.0;
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const ScoredInstance& s : scored) {
    detail::check_class_weight(s.omega_a, "A");
    detail::check_class_weight(s.omega_b, "B");
    if (std::isnan(s.score)) {
      throw invalid_score_error("score is NaN");
    }
    sum_a += s.omega_a;
    sum_b += s.omega_b;
  }
  if (!(sum_a > 0.0) || !(sum_b > 0.0)) {
    throw degenerate_dataset_error("one of the classes has zero total weight");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scored[i].score < scored[j].score;
  });

  double wins = 0.0;
  double cum_b = 0.0;  // B-weight strictly below the current score
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double run_a = 0.0, run_b = 0.0;
    while (j < order.size() && scored[order[j]].score == scored[order[i]].score) {
      run_a += scored[order[j]].omega_a;
      run_b += scored[order[j]].omega_b;
      ++j;
    }
    wins += run_a * cum_b + 0.5 * run_a * run_b;
    cum_b += run_b;
    i = j;
  }
  return wins / (sum_a * sum_b);
}

}  // namespace multinst
