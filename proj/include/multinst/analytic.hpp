#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "multinst/core.hpp"
#include "multinst/erf.hpp"
#include "multinst/stats.hpp"

namespace multinst {

// Closed-form Gaussian predictions for the multi-instance classifier. The
// summed log-odds of an N-instance group is treated as N(N*mu, sqrt(N)*sigma)
// per class, which turns TPR/FPR/MISS/AUC into erf expressions of the
// class-conditional moments.

/// Predicted operating point of the N-instance classifier at one threshold.
/// miss = 1 - tpr + fpr is the misclassification total being minimized.
struct RatePrediction {
  int n = 1;
  Threshold threshold;
  double tpr = 0.0;
  double fpr = 0.0;
  double miss = 0.0;
};

/// Closed-form optimum of MISS under the sigma_a = sigma_b simplification:
/// c_opt = -N (mu_a + mu_b) / 2. sigma_discrepancy records how far the
/// dataset deviates from that simplification, |sa - sb| / max(sa, sb).
struct OptimalThreshold {
  double c_opt = 0.0;
  double theta_opt = 0.5;
  double sigma_discrepancy = 0.0;
};

namespace detail {

inline void check_group_size(int n) {
  if (n < 1) {
    throw domain_error("group size n must be a positive integer");
  }
}

inline double rate_from_moments(double mu, double sigma, int n, double c) {
  const double nn = static_cast<double>(n);
  return 0.5 * (1.0 + multinst::erf((nn * mu + c) / (std::sqrt(2.0 * nn) * sigma)));
}

}  // namespace detail

/// TPR(theta) = (1 + erf((N mu_a + C) / (sqrt(2N) sigma_a))) / 2, and the
/// same for FPR with the B moments.
inline RatePrediction analytic_rates(const ClassMoments& m, int n, const Threshold& threshold) {
  detail::check_group_size(n);
  RatePrediction p;
  p.n = n;
  p.threshold = threshold;
  p.tpr = detail::rate_from_moments(m.mu_a, m.sigma_a, n, threshold.c);
  p.fpr = detail::rate_from_moments(m.mu_b, m.sigma_b, n, threshold.c);
  p.miss = 1.0 - p.tpr + p.fpr;
  return p;
}

inline OptimalThreshold optimal_c(const ClassMoments& m, int n) {
  detail::check_group_size(n);
  OptimalThreshold opt;
  opt.c_opt = -0.5 * static_cast<double>(n) * (m.mu_a + m.mu_b);
  opt.theta_opt = threshold_from_c(opt.c_opt).theta;
  opt.sigma_discrepancy =
      std::abs(m.sigma_a - m.sigma_b) / std::max(m.sigma_a, m.sigma_b);
  return opt;
}

/// MISS(theta) evaluated on a grid of thresholds.
inline std::vector<RatePrediction> miss_curve(const ClassMoments& m, int n,
                                              std::span<const double> theta_grid) {
  detail::check_group_size(n);
  std::vector<RatePrediction> curve;
  curve.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    curve.push_back(analytic_rates(m, n, threshold_from_theta(theta)));
  }
  return curve;
}

namespace detail {

inline double miss_of_c(const ClassMoments& m, int n, double c) {
  return 1.0 - rate_from_moments(m.mu_a, m.sigma_a, n, c) +
         rate_from_moments(m.mu_b, m.sigma_b, n, c);
}

}  // namespace detail

namespace detail {

// Sign of dMISS/dC in log space: log of the B Gaussian term minus log of the
// A term. Stays meaningful where MISS itself is flat to double precision.
inline double miss_slope_log_ratio(const ClassMoments& m, int n, double c) {
  const double nn = static_cast<double>(n);
  const double za = c + nn * m.mu_a;
  const double zb = c + nn * m.mu_b;
  const double lb = -zb * zb / (2.0 * nn * m.sigma_b * m.sigma_b) - std::log(m.sigma_b);
  const double la = -za * za / (2.0 * nn * m.sigma_a * m.sigma_a) - std::log(m.sigma_a);
  return lb - la;
}

}  // namespace detail

/// Numeric minimizer of MISS over C, for datasets where sigma_a != sigma_b
/// and the closed form is only approximate. A coarse scan over
/// [-N|mu_a| - 10 sqrt(N) sigma, N|mu_b| + 10 sqrt(N) sigma] brackets the
/// minimum; the bracket is then resolved by bisecting the sign of dMISS/dC
/// (in log space, so near-saturated rates do not flatten it away), with
/// golden-section as the fallback when the slope does not change sign.
inline double optimal_c_numeric(const ClassMoments& m, int n) {
  detail::check_group_size(n);
  const double nn = static_cast<double>(n);
  const double sigma = std::max(m.sigma_a, m.sigma_b);
  const double lo = -nn * std::abs(m.mu_a) - 10.0 * std::sqrt(nn) * sigma;
  const double hi = nn * std::abs(m.mu_b) + 10.0 * std::sqrt(nn) * sigma;

  constexpr int kScanPoints = 4097;
  double best_c = lo;
  double best_miss = detail::miss_of_c(m, n, lo);
  for (int i = 1; i < kScanPoints; ++i) {
    const double c = lo + (hi - lo) * static_cast<double>(i) / (kScanPoints - 1);
    const double miss = detail::miss_of_c(m, n, c);
    if (miss < best_miss) {
      best_miss = miss;
      best_c = c;
    }
  }
  const double step = (hi - lo) / (kScanPoints - 1);
  double a = std::max(lo, best_c - step);
  double b = std::min(hi, best_c + step);

  if (detail::miss_slope_log_ratio(m, n, a) < 0.0 && detail::miss_slope_log_ratio(m, n, b) > 0.0) {
    for (int iter = 0; iter < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++iter) {
      const double mid = 0.5 * (a + b);
      if (detail::miss_slope_log_ratio(m, n, mid) < 0.0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = detail::miss_of_c(m, n, x1);
  double f2 = detail::miss_of_c(m, n, x2);
  for (int iter = 0; iter < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++iter) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = detail::miss_of_c(m, n, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = detail::miss_of_c(m, n, x2);
    }
  }
  return 0.5 * (a + b);
}

/// The two sides of the stationarity condition dMISS/dC = 0:
///   exp(-(C + N mu_b)^2 / (2 N sigma_b^2)) / sigma_b
///   exp(-(C + N mu_a)^2 / (2 N sigma_a^2)) / sigma_a.
/// At the exact optimum the two Gaussian terms balance.
inline std::pair<double, double> miss_stationarity_terms(const ClassMoments& m, int n, double c) {
  detail::check_group_size(n);
  const double nn = static_cast<double>(n);
  const double tb = (c + nn * m.mu_b) / (std::sqrt(nn) * m.sigma_b);
  const double ta = (c + nn * m.mu_a) / (std::sqrt(nn) * m.sigma_a);
  return {std::exp(-0.5 * tb * tb) / m.sigma_b, std::exp(-0.5 * ta * ta) / m.sigma_a};
}

/// AUC(N) = (1 + erf(sqrt(N) (mu_a - mu_b) / (sqrt(2) sqrt(sa^2 + sb^2)))) / 2.
inline double analytic_auc(const ClassMoments& m, int n) {
  detail::check_group_size(n);
  const double nn = static_cast<double>(n);
  const double arg = std::sqrt(nn) * (m.mu_a - m.mu_b) /
                     (std::sqrt(2.0) * std::sqrt(m.sigma_a * m.sigma_a + m.sigma_b * m.sigma_b));
  return 0.5 * (1.0 + multinst::erf(arg));
}

/// (mu_a / sigma_a, mu_b / sigma_b). When the first is positive and the
/// second negative, the multi-instance classifier converges to a perfect one
/// as N grows, for any fixed threshold in (0, 1).
inline std::pair<double, double> quality_ratios(const ClassMoments& m) {
  return {m.mu_a / m.sigma_a, m.mu_b / m.sigma_b};
}

}  // namespace multinst
