#pragma once
// Test-only reference computations. Nothing here calls into the library's
// implementation of the quantity being checked; formulas are re-derived by
// hand so that the library and the oracle fail independently.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace oracle {

/// O(n+ n-) pair enumeration.
inline double auc_pairs(std::span<const double> pos, std::span<const double> neg, bool half_ties) {
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) {
      if (p > n)
        wins += 1.0;
      else if (p == n && half_ties)
        wins += 0.5;
    }
  return wins / double(pos.size() * neg.size());
}

/// The surrogate, written out term by term.
inline double g(double a, double b, double alpha, double p, double f, int y) {
  const double ipos = y == 1 ? 1.0 : 0.0;
  const double ineg = 1.0 - ipos;
  return (1 - p) * (f - a) * (f - a) * ipos + p * (f - b) * (f - b) * ineg +
         2 * (1 + alpha) * (p * f * ineg - (1 - p) * f * ipos) - p * (1 - p) * alpha * alpha;
}

inline double central_diff(const std::function<double(double)>& fn, double x, double h) {
  return (fn(x + h) - fn(x - h)) / (2 * h);
}

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

/// max over a uniform grid of `points` nodes on [0,1] of fn.
inline std::pair<double, double> grid_max_1d(const std::function<double(double)>& fn,
                                             std::size_t points) {
  double best = -std::numeric_limits<double>::infinity(), arg = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = double(k) / double(points - 1);
    const double v = fn(x);
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  return {best, arg};
}

/// min_{a,b} max_alpha of the empirical mean of g over a grid with the given step,
/// a,b in [0,1], alpha in [-1,1]. The empirical mean is additively separable into
/// A(a) + B(b) + C(alpha), so the 3-D grid min-max equals the sum of three 1-D searches.
inline double grid_minmax_separable(std::span<const double> f, std::span<const int> y,
                                    double step) {
  const std::size_t n = f.size();
  double n_pos = 0;
  for (int v : y) n_pos += v;
  const double p = n_pos / double(n);
  const auto steps = std::size_t(std::llround(1.0 / step));
  double min_a = std::numeric_limits<double>::infinity();
  double min_b = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = double(k) / double(steps);
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] == 1)
        sa += (1 - p) * (f[i] - t) * (f[i] - t);
      else
        sb += p * (f[i] - t) * (f[i] - t);
    }
    min_a = std::min(min_a, sa / double(n));
    min_b = std::min(min_b, sb / double(n));
  }
  double max_c = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= 2 * steps; ++k) {
    const double alpha = -1.0 + double(k) / double(steps);
    double sc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ipos = y[i] == 1 ? 1.0 : 0.0;
      sc += 2 * (1 + alpha) * (p * f[i] * (1 - ipos) - (1 - p) * f[i] * ipos) -
            p * (1 - p) * alpha * alpha;
    }
    max_c = std::max(max_c, sc / double(n));
  }
  return min_a + min_b + max_c;
}

/// Literal nested 3-D grid min-max (expensive; coarse steps only).
inline double grid_minmax_literal(std::span<const double> f, std::span<const int> y, double step) {
  const std::size_t n = f.size();
  double n_pos = 0;
  for (int v : y) n_pos += v;
  const double p = n_pos / double(n);
  const auto steps = std::size_t(std::llround(1.0 / step));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t ia = 0; ia <= steps; ++ia)
    for (std::size_t ib = 0; ib <= steps; ++ib) {
      double inner = -std::numeric_limits<double>::infinity();
      for (std::size_t ic = 0; ic <= 2 * steps; ++ic) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
          s += g(double(ia) / double(steps), double(ib) / double(steps),
                 -1.0 + double(ic) / double(steps), p, f[i], y[i]);
        inner = std::max(inner, s / double(n));
      }
      best = std::min(best, inner);
    }
  return best;
}

/// Joint enumeration of every destination assignment on the grid (plus staying put).
/// value(i, x') is the per-point objective; feasible iff mean squared move <= eps.
inline double joint_worst_case(std::span<const double> xs,
                               const std::function<double(std::size_t, double)>& value,
                               double eps, std::size_t points) {
  const std::size_t n = xs.size();
  std::vector<std::vector<double>> cand(n);
  for (std::size_t i = 0; i < n; ++i) {
    cand[i].push_back(xs[i]);
    for (std::size_t k = 0; k < points; ++k) cand[i].push_back(double(k) / double(points - 1));
  }
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    double cost = 0, val = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = xs[i] - cand[i][idx[i]];
      cost += d * d;
      val += value(i, cand[i][idx[i]]);
    }
    if (cost <= double(n) * eps * (1 + 1e-12)) best = std::max(best, val / double(n));
    std::size_t k = 0;
    while (k < n && ++idx[k] == cand[k].size()) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace oracle
