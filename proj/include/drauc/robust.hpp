#pragma once
// Wasserstein-Lagrangian inner maximisation
//   phi_lambda(z) = max_{z'} g(z') - lambda * c(z, z'),
// the transport cost, duality diagnostics, exact worst-case oracles for tiny
// 1-D instances and the two-cluster barycenter attack.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "drauc/auc.hpp"
#include "drauc/data.hpp"
#include "drauc/error.hpp"
#include "drauc/model.hpp"

namespace drauc {

struct AttackConfig {
  int steps = 10;                    // K
  double step_size = 15.0 / 255.0;   // eta_z
  int restarts = 0;                  // extra random starts around z, off by default
  double restart_radius = 0.05;
  std::uint64_t restart_seed = 0;

  void validate() const {
    if (steps < 1) throw ConfigError("attack steps K must be >= 1");
    if (!(step_size >= 0.0)) throw ConfigError("attack step size must be >= 0");
    if (restarts < 0) throw ConfigError("attack restarts must be >= 0");
  }
};

/// Lagrange multipliers and radii. Df uses the *_pos fields for both classes.
struct DualState {
  double lambda_pos = 1.0;
  double lambda_neg = 1.0;
  double eps_pos = 0.0;
  double eps_neg = 0.0;
  double lambda_max = 1e3;

  friend bool operator==(const DualState&, const DualState&) = default;
};

/// Squared Euclidean distance for equal labels; nullopt (infinite cost) across labels.
inline std::optional<double> transport_cost(std::span<const double> x, int y,
                                            std::span<const double> x_prime, int y_prime) {
  if (x.size() != x_prime.size()) throw DimensionError("transport_cost: feature dimensions differ");
  if (y != y_prime) return std::nullopt;
  double c = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - x_prime[j];
    c += d * d;
  }
  return c;
}

struct PhiResult {
  double value = 0.0;          // g(z_adv) - lambda * c(z, z_adv)
  std::vector<double> x_adv;   // label is always that of z
  double cost = 0.0;           // c(z, z_adv)
};

namespace detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double c = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    c += d * d;
  }
  return c;
}

// Projected gradient ascent from `start`; keeps the best iterate seen (start included).
inline PhiResult ascend(const ScoringModel& model, const AuxParams& aux, double p_hat, double lambda,
                        std::span<const double> x, int y, const AttackConfig& cfg,
                        std::vector<double> start) {
  std::vector<double> cur = std::move(start);
  std::vector<double> grad_f;
  PhiResult best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int k = 0;; ++k) {
    const double f = forward(model, cur, nullptr, &grad_f);
    const double cost = sq_dist(x, cur);
    const double value = g_loss(aux, p_hat, f, y) - lambda * cost;
    if (value > best.value) {
      best.value = value;
      best.x_adv = cur;
      best.cost = cost;
    }
    if (k == cfg.steps) break;
    const double dg_df = g_grads(aux, p_hat, f, y).df;
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const double step = dg_df * grad_f[j] - 2.0 * lambda * (cur[j] - x[j]);
      cur[j] = std::clamp(cur[j] + cfg.step_size * step, 0.0, 1.0);
    }
  }
  return best;
}

}  // namespace detail

/// K-step projected gradient ascent on z' -> g(z') - lambda ||x - x'||^2 over [0,1]^d,
/// started at z' = z. Returns the best iterate, so phi.value >= g(z) always.
inline PhiResult phi(const ScoringModel& model, const AuxParams& aux, double p_hat, double lambda,
                     std::span<const double> x, int y, const AttackConfig& cfg) {
  cfg.validate();
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (x.size() != model.input_dim) throw DimensionError("phi: input dimension mismatch");
  PhiResult best = detail::ascend(model, aux, p_hat, lambda, x, y, cfg,
                                  std::vector<double>(x.begin(), x.end()));
  if (cfg.restarts > 0) {
    std::mt19937_64 rng(cfg.restart_seed);
    std::uniform_real_distribution<double> jitter(-cfg.restart_radius, cfg.restart_radius);
    for (int r = 0; r < cfg.restarts; ++r) {
      std::vector<double> start(x.begin(), x.end());
      for (double& v : start) v = std::clamp(v + jitter(rng), 0.0, 1.0);
      PhiResult cand = detail::ascend(model, aux, p_hat, lambda, x, y, cfg, std::move(start));
      if (cand.value > best.value) best = std::move(cand);
    }
  }
  return best;
}

/// Exact phi for scalar features: maximum over the grid {k/(G-1)} together with x itself.
inline PhiResult phi_exact_1d(const ScoringModel& model, const AuxParams& aux, double p_hat,
                              double lambda, double x, int y, std::size_t grid_resolution) {
  if (model.input_dim != 1) throw DimensionError("phi_exact_1d needs d = 1");
  if (grid_resolution < 2) throw ConfigError("grid resolution must be >= 2");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  PhiResult best;
  best.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](double xp) {
    const double f = score(model, std::span<const double>(&xp, 1));
    const double cost = (x - xp) * (x - xp);
    const double value = g_loss(aux, p_hat, f, y) - lambda * cost;
    if (value > best.value) {
      best.value = value;
      best.x_adv = {xp};
      best.cost = cost;
    }
  };
  consider(x);
  for (std::size_t k = 0; k < grid_resolution; ++k)
    consider(double(k) / double(grid_resolution - 1));
  return best;
}

/// lambda * eps + mean(phi_values).
inline double lagrangian_objective(double lambda, double eps, std::span<const double> phi_values) {
  if (!(lambda >= 0.0) || !(eps >= 0.0)) throw DomainError("lambda and eps must be >= 0");
  if (phi_values.empty()) throw DataError("lagrangian_objective: empty phi list");
  double s = 0.0;
  for (double v : phi_values) s += v;
  return lambda * eps + s / double(phi_values.size());
}

struct DualPoint {
  double lambda = 0.0;
  double value = 0.0;
};

struct DualCurve {
  double best_lambda = 0.0;
  double best_value = 0.0;
  std::vector<DualPoint> curve;
};

struct DualCurveOptions {
  std::size_t grid_resolution = 1001;  // exact inner oracle, used when d = 1
  AttackConfig attack;                 // PGA inner solver, used when d > 1
};

/// lambda * eps + mean phi_lambda for each lambda in the grid; returns the minimiser.
inline DualCurve dual_curve(const ScoringModel& model, const AuxParams& aux, double p_hat,
                            const Dataset& data, double eps, std::span<const double> lambda_grid,
                            const DualCurveOptions& opts = {}) {
  if (lambda_grid.empty()) throw ConfigError("dual_curve: empty lambda grid");
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()) || lambda_grid.front() < 0.0)
    throw ConfigError("dual_curve: lambda grid must be ascending and non-negative");
  if (data.size() == 0) throw DataError("dual_curve: empty dataset");
  DualCurve out;
  out.best_value = std::numeric_limits<double>::infinity();
  std::vector<double> phis(data.size());
  for (double lambda : lambda_grid) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      phis[i] = data.dim == 1
                    ? phi_exact_1d(model, aux, p_hat, lambda, data.row(i)[0], data.labels[i],
                                   opts.grid_resolution)
                          .value
                    : phi(model, aux, p_hat, lambda, data.row(i), data.labels[i], opts.attack).value;
    }
    const double value = lagrangian_objective(lambda, eps, phis);
    out.curve.push_back({lambda, value});
    if (value < out.best_value) {
      out.best_value = value;
      out.best_lambda = lambda;
    }
  }
  return out;
}

struct WorstCase {
  double sup_value = 0.0;          // max of mean g over feasible Monge maps on the grid
  std::vector<double> positions;   // achieving destination of each point
};

namespace detail {

inline constexpr std::size_t kMaxBruteForcePoints = 6;

struct FrontierEntry {
  double cost = 0.0;
  double value = 0.0;
  std::array<std::uint32_t, kMaxBruteForcePoints> choice{};
};

// Keeps entries that are strictly better in value than every cheaper entry.
inline void pareto_prune(std::vector<FrontierEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& l, const auto& r) {
    return l.cost < r.cost || (l.cost == r.cost && l.value > r.value);
  });
  std::vector<FrontierEntry> kept;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    if (e.value > best) {
      kept.push_back(e);
      best = e.value;
    }
  }
  entries = std::move(kept);
}

struct PointCandidates {
  std::vector<double> position;
  std::vector<double> cost;
  std::vector<double> value;
};

inline std::vector<FrontierEntry> frontier_for(std::span<const PointCandidates> points,
                                               std::span<const std::size_t> members, double budget) {
  std::vector<FrontierEntry> frontier(1);
  for (std::size_t m : members) {
    const auto& pc = points[m];
    std::vector<FrontierEntry> single;
    for (std::size_t k = 0; k < pc.position.size(); ++k)
      if (pc.cost[k] <= budget) {
        FrontierEntry e;
        e.cost = pc.cost[k];
        e.value = pc.value[k];
        e.choice[0] = std::uint32_t(k);
        single.push_back(e);
      }
    pareto_prune(single);
    std::vector<FrontierEntry> merged;
    merged.reserve(frontier.size() * single.size());
    for (const auto& a : frontier)
      for (const auto& b : single) {
        const double cost = a.cost + b.cost;
        if (cost > budget) break;  // single is sorted by cost
        FrontierEntry e = a;
        e.cost = cost;
        e.value = a.value + b.value;
        e.choice[m] = b.choice[0];
        merged.push_back(e);
      }
    pareto_prune(merged);
    frontier = std::move(merged);
  }
  return frontier;
}

}  // namespace detail

/// Exact (up to the grid) worst case of mean g over distributions reachable by moving each
/// point to one destination on {k/(G-1)} (or leaving it in place), same label only, subject
/// to (1/n) sum (x_i - x_i')^2 <= eps. Refuses n > 6 or d > 1.
inline WorstCase brute_force_worst_case(const Dataset& data, double eps, std::size_t grid_resolution,
                                        const AuxParams& aux, double p_hat,
                                        const ScoringModel& model) {
  if (data.dim != 1 || model.input_dim != 1) throw ConfigError("brute_force_worst_case needs d = 1");
  const std::size_t n = data.size();
  if (n == 0 || n > detail::kMaxBruteForcePoints)
    throw ConfigError("brute_force_worst_case supports 1 <= n <= 6");
  if (grid_resolution < 101) throw ConfigError("grid resolution must be >= 101");
  if (!(eps >= 0.0)) throw DomainError("eps must be >= 0");

  std::vector<detail::PointCandidates> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = data.row(i)[0];
    auto& pc = points[i];
    auto add = [&](double xp) {
      pc.position.push_back(xp);
      pc.cost.push_back((x - xp) * (x - xp));
      pc.value.push_back(g_loss(aux, p_hat, score(model, std::span<const double>(&xp, 1)),
                                data.labels[i]));
    };
    add(x);
    for (std::size_t k = 0; k < grid_resolution; ++k) add(double(k) / double(grid_resolution - 1));
  }

  const double budget = double(n) * eps * (1.0 + 1e-12);
  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < n; ++i) (i < n / 2 ? left : right).push_back(i);
  const auto lf = detail::frontier_for(points, left, budget);
  const auto rf = detail::frontier_for(points, right, budget);

  double best = -std::numeric_limits<double>::infinity();
  const detail::FrontierEntry* best_l = nullptr;
  const detail::FrontierEntry* best_r = nullptr;
  for (const auto& l : lf) {
    const double remaining = budget - l.cost;
    auto it = std::upper_bound(rf.begin(), rf.end(), remaining,
                               [](double c, const auto& e) { return c < e.cost; });
    if (it == rf.begin()) continue;
    --it;
    if (l.value + it->value > best) {
      best = l.value + it->value;
      best_l = &l;
      best_r = &*it;
    }
  }
  WorstCase out;
  out.sup_value = best / double(n);
  out.positions.resize(n);
  for (std::size_t i : left) out.positions[i] = points[i].position[best_l->choice[i]];
  for (std::size_t i : right) out.positions[i] = points[i].position[best_r->choice[i]];
  return out;
}

struct BarycenterAttack {
  double target = 0.0;
  double cost = 0.0;
  double bound = 0.0;
};

/// Moves both collapsed clusters to p*x+ + (1-p)*x-; cost equals p(1-p)(x+ - x-)^2.
inline BarycenterAttack barycenter_attack(double x_pos, double x_neg, std::size_t n_pos,
                                                std::size_t n_neg) {
  if (n_pos < 1 || n_neg < 1) throw ConfigError("barycenter attack needs both clusters non-empty");
  const double p = double(n_pos) / double(n_pos + n_neg);
  BarycenterAttack out;
  out.target = p * x_pos + (1.0 - p) * x_neg;
  out.cost = p * (x_pos - out.target) * (x_pos - out.target) +
             (1.0 - p) * (x_neg - out.target) * (x_neg - out.target);
  out.bound = p * (1.0 - p) * (x_pos - x_neg) * (x_pos - x_neg);
  return out;
}

struct MinimalZeroAucAttack {
  double cost = 0.0;
  double threshold = 0.0;
};

/// Cheapest Monge map (identity scorer, scalar features) after which every positive is
/// <= every negative, i.e. strict AUC = 0. Searches the separating threshold s over the
/// grid {k/(G-1)}: positives above s move to s, negatives below s move to s.
inline MinimalZeroAucAttack min_cost_strict_auc_zero(std::span<const double> pos,
                                                     std::span<const double> neg,
                                                     std::size_t grid_resolution) {
  if (pos.empty() || neg.empty()) throw DataError("need both classes");
  if (grid_resolution < 2) throw ConfigError("grid resolution must be >= 2");
  const double n = double(pos.size() + neg.size());
  MinimalZeroAucAttack best{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t k = 0; k < grid_resolution; ++k) {
    const double s = double(k) / double(grid_resolution - 1);
    double cost = 0.0;
    for (double x : pos)
      if (x > s) cost += (x - s) * (x - s);
    for (double x : neg)
      if (x < s) cost += (x - s) * (x - s);
    cost /= n;
    if (cost < best.cost) best = {cost, s};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Robust AUC estimate under a PGA attack calibrated to a transport budget.

struct AttackedScores {
  std::vector<double> pos;
  std::vector<double> neg;
};

namespace detail {

struct ClassAttack {
  std::vector<double> scores;
  double mean_cost = 0.0;
};

inline ClassAttack attack_rows(const ScoringModel& model, const Dataset& data,
                               std::span<const std::size_t> rows, const AuxParams& aux,
                               double p_hat, double lambda, const AttackConfig& cfg) {
  ClassAttack out;
  out.scores.reserve(rows.size());
  double cost = 0.0;
  for (std::size_t i : rows) {
    const auto res = phi(model, aux, p_hat, lambda, data.row(i), data.labels[i], cfg);
    out.scores.push_back(score(model, res.x_adv));
    cost += res.cost;
  }
  out.mean_cost = rows.empty() ? 0.0 : cost / double(rows.size());
  return out;
}

inline std::vector<double> nominal_scores(const ScoringModel& model, const Dataset& data,
                                          std::span<const std::size_t> rows) {
  std::vector<double> s;
  s.reserve(rows.size());
  for (std::size_t i : rows) s.push_back(score(model, data.row(i)));
  return s;
}

// Smallest lambda in [0, lambda_max] (to bisection precision) whose attack keeps the mean
// cost over `rows` within eps. Falls back to the unattacked scores when even lambda_max
// overspends.
inline std::vector<double> calibrated_attack(const ScoringModel& model, const Dataset& data,
                                             std::span<const std::size_t> rows,
                                             const AuxParams& aux, double p_hat, double eps,
                                             const AttackConfig& cfg, double lambda_max) {
  if (rows.empty()) return {};
  if (eps == 0.0) return nominal_scores(model, data, rows);
  auto at_zero = attack_rows(model, data, rows, aux, p_hat, 0.0, cfg);
  if (at_zero.mean_cost <= eps) return at_zero.scores;
  auto at_max = attack_rows(model, data, rows, aux, p_hat, lambda_max, cfg);
  if (at_max.mean_cost > eps) return nominal_scores(model, data, rows);
  double lo = 0.0, hi = lambda_max;
  ClassAttack feasible = std::move(at_max);
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto trial = attack_rows(model, data, rows, aux, p_hat, mid, cfg);
    if (trial.mean_cost <= eps) {
      hi = mid;
      feasible = std::move(trial);
    } else {
      lo = mid;
    }
  }
  return feasible.scores;
}

inline void class_rows(const Dataset& data, std::vector<std::size_t>& pos,
                       std::vector<std::size_t>& neg) {
  for (std::size_t i = 0; i < data.size(); ++i) (data.labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw DataError("robust AUC estimate needs both classes");
}

}  // namespace detail

/// Single budget: one multiplier calibrated so the mean cost over all examples is <= eps.
inline double estimate_drauc(const ScoringModel& model, const Dataset& data, double eps,
                             const AuxParams& aux, const AttackConfig& cfg,
                             double lambda_max = 1e3) {
  if (!(eps >= 0.0)) throw DomainError("eps must be >= 0");
  std::vector<std::size_t> pos, neg, all(data.size());
  detail::class_rows(data, pos, neg);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto scores =
      detail::calibrated_attack(model, data, all, aux, data.p_hat, eps, cfg, lambda_max);
  std::vector<double> sp, sn;
  for (std::size_t i = 0; i < all.size(); ++i) (data.labels[i] == 1 ? sp : sn).push_back(scores[i]);
  return auc_mann_whitney(sp, sn, TiePolicy::Half);
}

/// Per-class budgets: positives and negatives calibrated separately.
inline double estimate_drauc(const ScoringModel& model, const Dataset& data, double eps_pos,
                             double eps_neg, const AuxParams& aux, const AttackConfig& cfg,
                             double lambda_max = 1e3) {
  if (!(eps_pos >= 0.0) || !(eps_neg >= 0.0)) throw DomainError("radii must be >= 0");
  std::vector<std::size_t> pos, neg;
  detail::class_rows(data, pos, neg);
  const auto sp =
      detail::calibrated_attack(model, data, pos, aux, data.p_hat, eps_pos, cfg, lambda_max);
  const auto sn =
      detail::calibrated_attack(model, data, neg, aux, data.p_hat, eps_neg, cfg, lambda_max);
  return auc_mann_whitney(sp, sn, TiePolicy::Half);
}

}  // namespace drauc
