#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace multinst {

// Error hierarchy. Everything thrown by the library derives from multinst::error,
// so callers can map failures to exit codes in one place.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct invalid_instance_error : error {
  using error::error;
};
struct invalid_score_error : error {
  using error::error;
};
struct domain_error : error {
  using error::error;
};
struct degenerate_dataset_error : error {
  using error::error;
};
struct insufficient_data_error : error {
  using error::error;
};
struct dimension_mismatch_error : error {
  using error::error;
};
struct io_error : error {
  using error::error;
};
struct training_diverged_error : error {
  using error::error;
};

/// Scores are clamped into [eps, 1-eps] before taking log-odds; trained
/// scorers can saturate at exactly 0 or 1 where the log diverges.
inline constexpr double kDefaultScoreClamp = 1e-7;

enum class ClassLabel { A, B };

/// Soft class assignment {w1, w2} with w1 + w2 = 1. w1 is the probability
/// mass on class A.
struct SoftLabel {
  double w1 = 0.0;
  double w2 = 0.0;
};

inline SoftLabel make_soft_label(double w1, double w2) {
  if (std::isnan(w1) || std::isnan(w2) || w1 < 0.0 || w2 < 0.0) {
    throw invalid_instance_error("soft label components must be non-negative");
  }
  if (std::abs(w1 + w2 - 1.0) > 1e-12) {
    throw invalid_instance_error("soft label components must sum to 1");
  }
  return SoftLabel{w1, w2};
}

/// One instance of the weighted dataset: a feature vector plus the two
/// non-negative class weights (omega_a, omega_b), proportional to the
/// probability that the instance belongs to class A or B.
struct WeightedInstance {
  std::vector<double> features;
  double omega_a = 0.0;
  double omega_b = 0.0;
};

/// P(A|X) = omega_a / (omega_a + omega_b).
inline double posterior_from_weights(double omega_a, double omega_b) {
  if (std::isnan(omega_a) || std::isnan(omega_b) || omega_a < 0.0 || omega_b < 0.0) {
    throw invalid_instance_error("class weights must be non-negative");
  }
  const double total = omega_a + omega_b;
  if (!(total > 0.0)) {
    throw invalid_instance_error("both class weights are zero");
  }
  return omega_a / total;
}

inline SoftLabel soft_label_from_weights(double omega_a, double omega_b) {
  const double w1 = posterior_from_weights(omega_a, omega_b);
  return SoftLabel{w1, 1.0 - w1};
}

/// log(p / (1-p)) after clamping p into [eps, 1-eps].
inline double log_odds(double p, double eps = kDefaultScoreClamp) {
  if (std::isnan(p)) {
    throw invalid_score_error("score is NaN");
  }
  if (p < eps) p = eps;
  if (p > 1.0 - eps) p = 1.0 - eps;
  return std::log(p) - std::log1p(-p);
}

/// Inverse of log_odds: 1 / (1 + e^{-q}).
inline double sigmoid(double q) {
  if (q >= 0.0) {
    return 1.0 / (1.0 + std::exp(-q));
  }
  const double e = std::exp(q);
  return e / (1.0 + e);
}

/// Decision threshold in both representations: theta on the probability
/// scale and C(theta) = log((1-theta)/theta) on the log-odds scale.
/// theta = 0.5 corresponds to c = 0.
struct Threshold {
  double theta = 0.5;
  double c = 0.0;
};

inline Threshold threshold_from_theta(double theta) {
  if (std::isnan(theta) || !(theta > 0.0) || !(theta < 1.0)) {
    throw domain_error("threshold theta must lie strictly inside (0, 1)");
  }
  return Threshold{theta, std::log1p(-theta) - std::log(theta)};
}

inline Threshold threshold_from_c(double c) {
  if (std::isnan(c)) {
    throw domain_error("threshold offset c is NaN");
  }
  // theta = 1 / (1 + e^c); may saturate to 0 or 1 for extreme |c|.
  return Threshold{sigmoid(-c), c};
}

}  // namespace multinst
