#pragma once
// Instance-wise minimax square-loss AUC surrogate g(a, b, alpha; f, y), its
// partial derivatives, the closed-form saddle point, and AUC metrics.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "drauc/error.hpp"

namespace drauc {

/// Auxiliary saddle variables: a, b in [0,1], alpha in [-1,1].
struct AuxParams {
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;

  friend bool operator==(const AuxParams&, const AuxParams&) = default;
};

struct LabeledScore {
  double f = 0.0;
  int y = 0;
};

struct GGrads {
  double df = 0.0;
  double da = 0.0;
  double db = 0.0;
  double dalpha = 0.0;
};

enum class TiePolicy { Half, Strict };

inline void check_aux(const AuxParams& aux) {
  if (!(aux.a >= 0.0 && aux.a <= 1.0) || !(aux.b >= 0.0 && aux.b <= 1.0))
    throw DomainError("a and b must lie in [0,1]");
  if (!(aux.alpha >= -1.0 && aux.alpha <= 1.0)) throw DomainError("alpha must lie in [-1,1]");
}

inline void check_p_hat(double p_hat) {
  if (!(p_hat > 0.0 && p_hat < 1.0)) throw DomainError("p_hat must lie in (0,1)");
}

inline void check_label(int y) {
  if (y != 0 && y != 1) throw DomainError("label must be 0 or 1, got " + std::to_string(y));
}

/// g = (1-p)(f-a)^2 [y=1] + p(f-b)^2 [y=0] + 2(1+alpha)(p f [y=0] - (1-p) f [y=1]) - p(1-p) alpha^2.
/// The alpha^2 penalty sits outside the 2(1+alpha) factor so that the saddle point is
/// a* = E+[f], b* = E-[f], alpha* = b* - a*.
inline double g_loss(const AuxParams& aux, double p_hat, double f, int y) {
  check_aux(aux);
  check_p_hat(p_hat);
  check_label(y);
  const double p = p_hat;
  const double penalty = p * (1.0 - p) * aux.alpha * aux.alpha;
  if (y == 1) {
    const double r = f - aux.a;
    return (1.0 - p) * r * r - 2.0 * (1.0 + aux.alpha) * (1.0 - p) * f - penalty;
  }
  const double r = f - aux.b;
  return p * r * r + 2.0 * (1.0 + aux.alpha) * p * f - penalty;
}

inline GGrads g_grads(const AuxParams& aux, double p_hat, double f, int y) {
  check_aux(aux);
  check_p_hat(p_hat);
  check_label(y);
  const double p = p_hat;
  GGrads g;
  g.dalpha = -2.0 * p * (1.0 - p) * aux.alpha;
  if (y == 1) {
    g.df = 2.0 * (1.0 - p) * (f - aux.a) - 2.0 * (1.0 + aux.alpha) * (1.0 - p);
    g.da = -2.0 * (1.0 - p) * (f - aux.a);
    g.dalpha += -2.0 * (1.0 - p) * f;
  } else {
    g.df = 2.0 * p * (f - aux.b) + 2.0 * (1.0 + aux.alpha) * p;
    g.db = -2.0 * p * (f - aux.b);
    g.dalpha += 2.0 * p * f;
  }
  return g;
}

namespace detail {

inline void check_nonempty(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty()) throw DataError("no positive scores");
  if (neg.empty()) throw DataError("no negative scores");
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

}  // namespace detail

/// a* = mean positive score, b* = mean negative score, alpha* = b* - a*.
inline AuxParams closed_form_aux(std::span<const double> pos_scores,
                                 std::span<const double> neg_scores) {
  detail::check_nonempty(pos_scores, neg_scores);
  const double a = detail::mean(pos_scores);
  const double b = detail::mean(neg_scores);
  return {a, b, std::clamp(b - a, -1.0, 1.0)};
}

/// Mean over all (i, j) of (1 - (f_i+ - f_j-))^2.
inline double pairwise_sq_risk(std::span<const double> pos_scores,
                               std::span<const double> neg_scores) {
  detail::check_nonempty(pos_scores, neg_scores);
  double total = 0.0;
  for (double fp : pos_scores) {
    double row = 0.0;
    for (double fn : neg_scores) {
      const double r = 1.0 - (fp - fn);
      row += r * r;
    }
    total += row;
  }
  return total / (double(pos_scores.size()) * double(neg_scores.size()));
}

/// Empirical mean of g at the closed-form saddle point, with p_hat = n+/n.
inline double saddle_value(std::span<const LabeledScore> scores) {
  std::vector<double> pos, neg;
  for (const auto& s : scores) {
    check_label(s.y);
    (s.y == 1 ? pos : neg).push_back(s.f);
  }
  if (pos.empty() || neg.empty()) throw DataError("saddle_value needs both classes");
  const double p_hat = double(pos.size()) / double(scores.size());
  const AuxParams aux = closed_form_aux(pos, neg);
  double total = 0.0;
  for (const auto& s : scores) total += g_loss(aux, p_hat, s.f, s.y);
  return total / double(scores.size());
}

/// Fraction of (pos, neg) pairs ranked correctly; ties count 1/2 (Half) or 0 (Strict).
inline double auc_mann_whitney(std::span<const double> pos_scores,
                               std::span<const double> neg_scores,
                               TiePolicy ties = TiePolicy::Half) {
  detail::check_nonempty(pos_scores, neg_scores);
  std::vector<double> neg(neg_scores.begin(), neg_scores.end());
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  double tied = 0.0;
  for (double fp : pos_scores) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), fp);
    const auto hi = std::upper_bound(lo, neg.end(), fp);
    wins += double(lo - neg.begin());
    tied += double(hi - lo);
  }
  if (ties == TiePolicy::Half) wins += 0.5 * tied;
  return wins / (double(pos_scores.size()) * double(neg.size()));
}

}  // namespace drauc
