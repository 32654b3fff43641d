#pragma once

// Test-only oracles, kept independent of the library code paths they check:
// quadrature for erf, brute-force pair sums for AUC, finite differences for
// gradients.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "multinst/erf.hpp"
#include "multinst/stats.hpp"
#include "multinst/train.hpp"

namespace oracles {

namespace detail {

inline double gauss_kernel(double t) { return std::exp(-t * t); }

inline double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                               double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = gauss_kernel(lm);
  const double frm = gauss_kernel(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         adaptive_simpson(m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

}  // namespace detail

/// erf(x) by adaptive Simpson quadrature of (2/sqrt(pi)) exp(-t^2) on [0, x].
inline double erf_quadrature(double x, double tol = 1e-15) {
  if (x < 0.0) {
    return -erf_quadrature(-x, tol);
  }
  if (x == 0.0) {
    return 0.0;
  }
  const double fa = detail::gauss_kernel(0.0);
  const double fb = detail::gauss_kernel(x);
  const double fm = detail::gauss_kernel(0.5 * x);
  const double whole = x / 6.0 * (fa + 4.0 * fm + fb);
  const double integral = detail::adaptive_simpson(0.0, x, fa, fm, fb, whole, tol, 50);
  return integral * 2.0 / std::sqrt(std::acos(-1.0));
}

/// Inverse of the library erf by bisection (for deriving test fixtures).
inline double erfinv_bisect(double y) {
  double lo = -6.0, hi = 6.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (multinst::erf(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// O(M^2) weighted AUC: the literal double sum over all (A-weight, B-weight)
/// ordered pairs, including the diagonal, ties at one half.
inline double brute_force_auc(std::span<const multinst::ScoredInstance> scored) {
  double sum_a = 0.0, sum_b = 0.0, wins = 0.0;
  for (const auto& s : scored) {
    sum_a += s.omega_a;
    sum_b += s.omega_b;
  }
  for (const auto& i : scored) {
    for (const auto& j : scored) {
      if (i.score > j.score) {
        wins += i.omega_a * j.omega_b;
      } else if (i.score == j.score) {
        wins += 0.5 * i.omega_a * j.omega_b;
      }
    }
  }
  return wins / (sum_a * sum_b);
}

/// Central finite differences of the training loss over all parameters
/// (weights then bias), step h.
inline std::vector<double> finite_difference_gradient(
    const multinst::train::ScorerModel& model,
    std::span<const multinst::train::TrainSample> batch, double h = 1e-6) {
  std::vector<double> g(model.weights.size() + 1, 0.0);
  for (std::size_t k = 0; k <= model.weights.size(); ++k) {
    multinst::train::ScorerModel plus = model;
    multinst::train::ScorerModel minus = model;
    if (k < model.weights.size()) {
      plus.weights[k] += h;
      minus.weights[k] -= h;
    } else {
      plus.bias += h;
      minus.bias -= h;
    }
    g[k] = (multinst::train::loss(plus, batch) - multinst::train::loss(minus, batch)) / (2.0 * h);
  }
  return g;
}

/// Trapezoidal area under a ROC polyline, with the (0,0) and (1,1) corners
/// appended. Points are traversed from high theta (low fpr) to low theta.
inline double trapezoid_roc_area(std::span<const multinst::RocPoint> curve) {
  std::vector<std::pair<double, double>> pts;  // (fpr, tpr), fpr ascending
  pts.emplace_back(0.0, 0.0);
  for (auto it = curve.rbegin(); it != curve.rend(); ++it) {
    pts.emplace_back(it->fpr, it->tpr);
  }
  pts.emplace_back(1.0, 1.0);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
  }
  return area;
}

}  // namespace oracles
