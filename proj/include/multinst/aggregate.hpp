#pragma once

#include <span>

#include "multinst/core.hpp"

namespace multinst {

// Multi-instance classification of a group of scores known to share one
// class. All aggregation happens in log-odds space: the naive product of
// per-instance posteriors underflows for a few hundred instances, while the
// sum of log-odds is exact up to rounding.

/// Sum of per-instance log-odds, the additive evidence for class A.
inline double group_log_odds(std::span<const double> scores,
                             double eps = kDefaultScoreClamp) {
  if (scores.empty()) {
    throw domain_error("group of scores must be non-empty");
  }
  double sum = 0.0;
  for (double p : scores) {
    sum += log_odds(p, eps);
  }
  return sum;
}

/// Group posterior: sigmoid of the summed log-odds. Equivalent to the
/// product formula prod(p_i) / (prod(p_i) + prod(1-p_i)).
inline double multi_posterior(std::span<const double> scores,
                              double eps = kDefaultScoreClamp) {
  return sigmoid(group_log_odds(scores, eps));
}

/// Group decision: A iff C(theta) + sum of log-odds > 0. Ties (exactly 0)
/// classify as B, matching the strict inequality P(A|{X_i}) > theta.
inline ClassLabel classify_group(std::span<const double> scores, const Threshold& threshold,
                                 double eps = kDefaultScoreClamp) {
  return (threshold.c + group_log_odds(scores, eps) > 0.0) ? ClassLabel::A : ClassLabel::B;
}

}  // namespace multinst
