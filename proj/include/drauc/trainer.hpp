#pragma once
// Stochastic training loops for the robust AUC objectives:
//   df   - single Wasserstein budget, one multiplier lambda
//   da   - per-class budgets eps+/eps- with multipliers lambda+/lambda-
//   aucm - the plain minimax AUC surrogate without an inner attack
//
// Every iteration samples a batch, attacks it with K-step PGA under the
// current multipliers, then takes one projected step in alpha (ascent),
// lambda (descent) and w = (theta, a, b) (descent). All gradients are taken
// at the pre-update iterate.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "drauc/auc.hpp"
#include "drauc/data.hpp"
#include "drauc/error.hpp"
#include "drauc/model.hpp"
#include "drauc/robust.hpp"

namespace drauc {

enum class Variant { Df, Da, AucmBaseline };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Df:
      return "df";
    case Variant::Da:
      return "da";
    case Variant::AucmBaseline:
      return "aucm";
  }
  return "?";
}

inline Variant parse_variant(const std::string& text) {
  if (text == "df") return Variant::Df;
  if (text == "da") return Variant::Da;
  if (text == "aucm" || text == "aucm-baseline") return Variant::AucmBaseline;
  throw ConfigError("unknown variant '" + text + "' (expected df, da or aucm)");
}

struct TrainConfig {
  Variant variant = Variant::Df;
  std::size_t iterations = 1000;  // T
  std::size_t batch_size = 128;
  double eta_z = 15.0 / 255.0;
  double eta_lambda = 0.1;
  double eta_w = 0.1;
  double eta_alpha = 0.1;
  int steps_k = 10;
  double eps = 0.1;
  double k_split = 1.0;  // da only: eps+ = k * eps
  double lambda0 = 1.0;
  double lambda_max = 1e3;
  std::uint64_t seed = 0;
  bool step_decay = false;  // x0.1 on eta_w and eta_alpha at 50% and 75% of T
  int attack_restarts = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;

  void validate() const {
    if (iterations < 1) throw ConfigError("iterations T must be >= 1");
    if (batch_size < 2) throw ConfigError("batch size must be >= 2");
    if (!(eta_z >= 0.0)) throw ConfigError("eta_z must be >= 0");
    if (!(eta_lambda > 0.0) || !(eta_w > 0.0) || !(eta_alpha > 0.0))
      throw ConfigError("learning rates eta_lambda, eta_w, eta_alpha must be > 0");
    if (steps_k < 1) throw ConfigError("attack steps K must be >= 1");
    if (!(eps >= 0.0)) throw ConfigError("eps must be >= 0");
    if (!(lambda_max > 0.0)) throw ConfigError("lambda_max must be > 0");
    if (!(lambda0 >= 0.0 && lambda0 <= lambda_max))
      throw ConfigError("lambda0 must lie in [0, lambda_max]");
    if (attack_restarts < 0) throw ConfigError("attack restarts must be >= 0");
  }
};

struct IterationRecord {
  double objective = 0.0;
  double lambda_pos = 0.0;
  double lambda_neg = 0.0;
  double alpha = 0.0;
  double batch_auc = 0.0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct TrainState {
  ScoringModel model;
  AuxParams aux;
  DualState dual;
  std::size_t iteration = 0;
  std::vector<IterationRecord> history;

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

struct EpsilonSplit {
  double eps_pos = 0.0;
  double eps_neg = 0.0;
};

/// eps+ = k eps, eps- = (1 - k p) eps / (1 - p), so that p eps+ + (1-p) eps- = eps.
inline EpsilonSplit split_epsilon(double eps, double p_hat, double k) {
  if (!(eps >= 0.0)) throw ConfigError("eps must be >= 0");
  check_p_hat(p_hat);
  if (!(k >= 0.5 && k <= 1.5)) throw ConfigError("k must lie in [0.5, 1.5]");
  if (!(k * p_hat < 1.0)) throw ConfigError("k * p_hat must be < 1");
  return {k * eps, (1.0 - k * p_hat) * eps / (1.0 - p_hat)};
}

/// Uniform sample without replacement. If no positive was drawn, one uniformly chosen
/// slot is overwritten with a uniformly chosen positive.
inline std::vector<std::size_t> sample_batch(const Dataset& data, std::size_t batch_size,
                                             std::mt19937_64& rng) {
  const std::size_t n = data.size();
  if (batch_size > n) throw ConfigError("batch size exceeds dataset size");
  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < n; ++i)
    if (data.labels[i] == 1) positives.push_back(i);
  if (positives.empty()) throw DataError("dataset has no positive examples");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < batch_size; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  idx.resize(batch_size);
  const bool has_pos = std::any_of(idx.begin(), idx.end(),
                                   [&](std::size_t i) { return data.labels[i] == 1; });
  if (!has_pos) {
    std::uniform_int_distribution<std::size_t> slot(0, batch_size - 1);
    std::uniform_int_distribution<std::size_t> which(0, positives.size() - 1);
    const std::size_t s = slot(rng);
    idx[s] = positives[which(rng)];
  }
  return idx;
}

namespace detail {

// Per-class sums of everything an update needs, accumulated in batch order.
struct ClassSums {
  std::size_t count = 0;
  double phi = 0.0;
  double cost = 0.0;
  double dalpha = 0.0;
  double da = 0.0;
  double db = 0.0;
  std::vector<double> dtheta;

  explicit ClassSums(std::size_t n_params) : dtheta(n_params, 0.0) {}
  double mean(double sum) const { return sum / double(count); }
};

// p * mean_pos + (1 - p) * mean_neg; an absent class contributes nothing.
inline double stratified(const ClassSums& pos, const ClassSums& neg, double p, double pos_sum,
                         double neg_sum) {
  double out = 0.0;
  if (pos.count > 0) out += p * pos.mean(pos_sum);
  if (neg.count > 0) out += (1.0 - p) * neg.mean(neg_sum);
  return out;
}

inline TrainState run_training(const Dataset& data, const TrainConfig& cfg,
                               const ScoringModel& initial_model, Variant variant) {
  cfg.validate();
  validate_model(initial_model);
  if (initial_model.input_dim != data.dim) throw DimensionError("model and data dimensions differ");
  const std::size_t n_pos = data.count_positive();
  if (n_pos == 0 || n_pos == data.size()) throw DataError("training needs both classes");
  const double p = data.p_hat;

  TrainState st;
  st.model = initial_model;
  st.aux = AuxParams{0.0, 0.0, 0.0};
  st.dual.lambda_pos = st.dual.lambda_neg = cfg.lambda0;
  st.dual.lambda_max = cfg.lambda_max;
  switch (variant) {
    case Variant::Df:
      st.dual.eps_pos = st.dual.eps_neg = cfg.eps;
      break;
    case Variant::Da: {
      const auto split = split_epsilon(cfg.eps, p, cfg.k_split);
      st.dual.eps_pos = split.eps_pos;
      st.dual.eps_neg = split.eps_neg;
      break;
    }
    case Variant::AucmBaseline:
      st.dual.eps_pos = st.dual.eps_neg = 0.0;
      break;
  }
  st.history.reserve(cfg.iterations);

  std::mt19937_64 rng(cfg.seed);
  AttackConfig attack;
  attack.steps = cfg.steps_k;
  attack.step_size = cfg.eta_z;
  attack.restarts = cfg.attack_restarts;

  const std::size_t n_params = st.model.params.size();
  std::vector<double> grad_theta;
  std::vector<double> batch_pos_scores, batch_neg_scores;

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    double decay = 1.0;
    if (cfg.step_decay) {
      if (4 * t >= 3 * cfg.iterations)
        decay = 0.01;
      else if (2 * t >= cfg.iterations)
        decay = 0.1;
    }
    const double eta_w = cfg.eta_w * decay;
    const double eta_alpha = cfg.eta_alpha * decay;

    const auto batch = sample_batch(data, cfg.batch_size, rng);
    ClassSums pos(n_params), neg(n_params);
    batch_pos_scores.clear();
    batch_neg_scores.clear();

    for (std::size_t slot = 0; slot < batch.size(); ++slot) {
      const std::size_t i = batch[slot];
      const int y = data.labels[i];
      const auto x = data.row(i);
      std::vector<double> x_adv;
      double phi_value = 0.0;
      double cost = 0.0;
      if (variant == Variant::AucmBaseline) {
        x_adv.assign(x.begin(), x.end());
      } else {
        const double lambda = y == 1 ? st.dual.lambda_pos : st.dual.lambda_neg;
        if (cfg.attack_restarts > 0)
          attack.restart_seed = cfg.seed ^ (0x9E3779B97F4A7C15ull * (t * cfg.batch_size + slot + 1));
        auto res = phi(st.model, st.aux, p, lambda, x, y, attack);
        x_adv = std::move(res.x_adv);
        phi_value = res.value;
        cost = res.cost;
      }
      const double f = forward(st.model, x_adv, &grad_theta, nullptr);
      if (variant == Variant::AucmBaseline) phi_value = g_loss(st.aux, p, f, y);
      const GGrads gg = g_grads(st.aux, p, f, y);
      ClassSums& s = y == 1 ? pos : neg;
      ++s.count;
      s.phi += phi_value;
      s.cost += cost;
      s.dalpha += gg.dalpha;
      s.da += gg.da;
      s.db += gg.db;
      for (std::size_t k = 0; k < n_params; ++k) s.dtheta[k] += gg.df * grad_theta[k];
      (y == 1 ? batch_pos_scores : batch_neg_scores).push_back(f);
    }

    IterationRecord rec;
    rec.lambda_pos = st.dual.lambda_pos;
    rec.lambda_neg = st.dual.lambda_neg;
    rec.alpha = st.aux.alpha;
    rec.batch_auc = batch_neg_scores.empty()
                        ? 0.5
                        : auc_mann_whitney(batch_pos_scores, batch_neg_scores, TiePolicy::Half);
    double dual_term = 0.0;
    if (variant == Variant::Df)
      dual_term = st.dual.lambda_pos * st.dual.eps_pos;
    else if (variant == Variant::Da)
      dual_term = st.dual.lambda_pos * st.dual.eps_pos + st.dual.lambda_neg * st.dual.eps_neg;
    rec.objective = dual_term + stratified(pos, neg, p, pos.phi, neg.phi);
    st.history.push_back(rec);

    // alpha: projected ascent
    const double g_alpha = stratified(pos, neg, p, pos.dalpha, neg.dalpha);
    const double new_alpha = std::clamp(st.aux.alpha + eta_alpha * g_alpha, -1.0, 1.0);

    // lambda: projected descent on lambda*eps + E[phi_lambda]; d phi / d lambda = -c(z, z').
    if (variant == Variant::Df) {
      const double mean_cost = stratified(pos, neg, p, pos.cost, neg.cost);
      const double lambda = std::clamp(
          st.dual.lambda_pos - cfg.eta_lambda * (st.dual.eps_pos - mean_cost), 0.0, cfg.lambda_max);
      st.dual.lambda_pos = st.dual.lambda_neg = lambda;
    } else if (variant == Variant::Da) {
      if (pos.count > 0)
        st.dual.lambda_pos =
            std::clamp(st.dual.lambda_pos - cfg.eta_lambda * (st.dual.eps_pos - pos.mean(pos.cost)),
                       0.0, cfg.lambda_max);
      if (neg.count > 0)
        st.dual.lambda_neg =
            std::clamp(st.dual.lambda_neg - cfg.eta_lambda * (st.dual.eps_neg - neg.mean(neg.cost)),
                       0.0, cfg.lambda_max);
    }

    // w = (theta, a, b): projected descent; theta is unconstrained.
    for (std::size_t k = 0; k < n_params; ++k)
      st.model.params[k] -= eta_w * stratified(pos, neg, p, pos.dtheta[k], neg.dtheta[k]);
    st.aux.a = std::clamp(st.aux.a - eta_w * stratified(pos, neg, p, pos.da, neg.da), 0.0, 1.0);
    st.aux.b = std::clamp(st.aux.b - eta_w * stratified(pos, neg, p, pos.db, neg.db), 0.0, 1.0);
    st.aux.alpha = new_alpha;
    st.iteration = t + 1;
  }
  return st;
}

}  // namespace detail

inline TrainState train_df(const Dataset& data, const TrainConfig& cfg,
                           const ScoringModel& initial_model) {
  return detail::run_training(data, cfg, initial_model, Variant::Df);
}

inline TrainState train_da(const Dataset& data, const TrainConfig& cfg,
                           const ScoringModel& initial_model) {
  return detail::run_training(data, cfg, initial_model, Variant::Da);
}

/// The df loop with the inner attack removed (no perturbation, lambda frozen).
inline TrainState train_aucm_baseline(const Dataset& data, const TrainConfig& cfg,
                                      const ScoringModel& initial_model) {
  return detail::run_training(data, cfg, initial_model, Variant::AucmBaseline);
}

inline TrainState train(const Dataset& data, const TrainConfig& cfg,
                        const ScoringModel& initial_model) {
  return detail::run_training(data, cfg, initial_model, cfg.variant);
}

/// Training-set AUC (half ties) of a model.
inline double dataset_auc(const ScoringModel& model, const Dataset& data,
                          TiePolicy ties = TiePolicy::Half) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i)
    (data.labels[i] == 1 ? pos : neg).push_back(score(model, data.row(i)));
  return auc_mann_whitney(pos, neg, ties);
}

}  // namespace drauc
