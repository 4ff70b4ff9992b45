#pragma once
// Fast self-check over every module: small instances, seconds not minutes.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "drauc/auc.hpp"
#include "drauc/checkpoint.hpp"
#include "drauc/data.hpp"
#include "drauc/gradcheck.hpp"
#include "drauc/model.hpp"
#include "drauc/robust.hpp"
#include "drauc/trainer.hpp"

namespace drauc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Random labelled scores with both classes present.
inline void random_scores(std::mt19937_64& rng, std::size_t n, std::vector<double>& pos,
                          std::vector<double>& neg) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  pos.clear();
  neg.clear();
  pos.push_back(u(rng));
  neg.push_back(u(rng));
  for (std::size_t i = 2; i < n; ++i) (rng() % 2 ? pos : neg).push_back(u(rng));
}

inline CheckResult check_auc_counting() {
  std::mt19937_64 rng(1);
  std::vector<double> pos, neg;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    random_scores(rng, 2 + rng() % 30, pos, neg);
    for (double& v : pos) v = std::round(v * 10) / 10;  // force ties
    for (double& v : neg) v = std::round(v * 10) / 10;
    double wins = 0.0;
    for (double p : pos)
      for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
    wins /= double(pos.size() * neg.size());
    worst = std::max(worst, std::abs(wins - auc_mann_whitney(pos, neg, TiePolicy::Half)));
  }
  return {"auc: rank statistic equals pair count", worst <= 1e-12, "max diff " + fmt(worst)};
}

inline CheckResult check_saddle_identity() {
  std::mt19937_64 rng(2);
  std::vector<double> pos, neg;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    random_scores(rng, 2 + rng() % 19, pos, neg);
    std::vector<LabeledScore> all;
    for (double v : pos) all.push_back({v, 1});
    for (double v : neg) all.push_back({v, 0});
    const double p = double(pos.size()) / double(all.size());
    worst = std::max(worst, std::abs(saddle_value(all) -
                                     p * (1 - p) * (pairwise_sq_risk(pos, neg) - 1.0)));
  }
  return {"auc-core: saddle value identity", worst <= 1e-10, "max diff " + fmt(worst)};
}

// The empirical mean of g splits as A(a) + B(b) + C(alpha); a grid min-max is three 1-D scans.
inline CheckResult check_closed_form() {
  std::mt19937_64 rng(3);
  std::vector<double> pos, neg;
  double worst = 0.0;
  const std::size_t steps = 1000;
  for (int t = 0; t < 10; ++t) {
    random_scores(rng, 2 + rng() % 19, pos, neg);
    const double n = double(pos.size() + neg.size());
    const double p = double(pos.size()) / n;
    double min_a = 1e300, min_b = 1e300, max_c = -1e300;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double s = double(k) / double(steps);
      double sa = 0.0, sb = 0.0;
      for (double v : pos) sa += (1 - p) * (v - s) * (v - s);
      for (double v : neg) sb += p * (v - s) * (v - s);
      min_a = std::min(min_a, sa / n);
      min_b = std::min(min_b, sb / n);
    }
    for (std::size_t k = 0; k <= 2 * steps; ++k) {
      const double al = -1.0 + double(k) / double(steps);
      double sc = -p * (1 - p) * al * al * n;
      for (double v : pos) sc -= 2 * (1 + al) * (1 - p) * v;
      for (double v : neg) sc += 2 * (1 + al) * p * v;
      max_c = std::max(max_c, sc / n);
    }
    const auto aux = closed_form_aux(pos, neg);
    double closed = 0.0;
    for (double v : pos) closed += g_loss(aux, p, v, 1);
    for (double v : neg) closed += g_loss(aux, p, v, 0);
    closed /= n;
    worst = std::max(worst, closed - (min_a + min_b + max_c));
  }
  return {"auc-core: closed-form aux is the grid min-max", worst <= 1e-5,
          "grid beats closed form by " + fmt(std::max(worst, 0.0))};
}

inline CheckResult check_gradients() {
  double worst = 0.0;
  std::string which;
  bool ok = true;
  for (const auto& arch :
       {Architecture::linear_sigmoid(), Architecture::mlp(5), Architecture::identity_clamped()}) {
    const auto rep = grad_check(arch, 200, 1e-5, 1e-5, 4);
    ok = ok && rep.passed;
    if (rep.max_rel_error >= worst) {
      worst = rep.max_rel_error;
      which = rep.arch + " " + rep.worst;
    }
  }
  return {"model: analytic gradients match finite differences", ok,
          "max rel error " + fmt(worst) + " at " + which};
}

inline CheckResult check_phi() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool ok = true;
  for (int t = 0; t < 100 && ok; ++t) {
    const std::size_t d = 1 + rng() % 3;
    const auto m = init_model(Architecture::mlp(4), d, rng());
    std::vector<double> x(d);
    for (double& v : x) v = u(rng);
    const int y = int(rng() % 2);
    const AuxParams aux{u(rng), u(rng), 2 * u(rng) - 1};
    const double p = 0.05 + 0.9 * u(rng);
    const double lambda = 10 * u(rng);
    AttackConfig cfg;
    cfg.step_size = 0.2;
    const auto r = phi(m, aux, p, lambda, x, y, cfg);
    const auto cost = transport_cost(x, y, r.x_adv, y);
    ok = r.value >= g_loss(aux, p, score(m, x), y) && cost && std::abs(*cost - r.cost) <= 1e-12 &&
         std::all_of(r.x_adv.begin(), r.x_adv.end(), [](double v) { return v >= 0 && v <= 1; });
  }
  ok = ok && !transport_cost(std::vector<double>{0.1}, 1, std::vector<double>{0.1}, 0);
  return {"robust: attack dominates clean loss and stays in the box", ok, ""};
}

inline CheckResult check_weak_duality() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nrm(0.0, 2.0);
  std::vector<double> grid{0.0};
  for (int k = 0; k < 29; ++k) grid.push_back(1e-3 * std::pow(10.0, 6.0 * k / 28.0));
  bool weak = true;
  double gap = 0.0;
  for (int t = 0; t < 5; ++t) {
    const std::size_t n = 2 + rng() % 2;
    std::vector<double> xs(n);
    std::vector<int> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = u(rng);
      ys[i] = int(i % 2);
    }
    const auto ds = make_dataset(1, xs, ys);
    const ScoringModel m{Architecture::linear_sigmoid(), 1, {nrm(rng), nrm(rng)}};
    const AuxParams aux{u(rng), u(rng), 2 * u(rng) - 1};
    const double eps = 0.1 * u(rng);
    const auto bf = brute_force_worst_case(ds, eps, 1001, aux, ds.p_hat, m);
    const auto dc = dual_curve(m, aux, ds.p_hat, ds, eps, grid);
    for (const auto& pt : dc.curve) weak = weak && pt.value >= bf.sup_value - 1e-12;
    gap = std::max(gap, (dc.best_value - bf.sup_value) /
                            std::max(1e-2, 0.05 * std::abs(bf.sup_value)));
  }
  return {"robust: Lagrangian dual bounds the brute-force worst case", weak && gap <= 1.0,
          "worst gap / tolerance " + fmt(gap)};
}

inline CheckResult check_barycenter() {
  const auto r = barycenter_attack(0.99, 0.01, 1, 99);
  const auto search =
      min_cost_strict_auc_zero(std::vector<double>{0.99}, std::vector<double>(99, 0.01), 10001);
  const bool ok = std::abs(r.target - 0.0198) <= 1e-15 && std::abs(r.cost - 0.0095080) <= 1e-6 &&
                  std::abs(r.cost - r.bound) <= 1e-12 && search.cost >= r.bound - 1e-12 &&
                  search.cost <= r.bound + 2e-4;
  return {"robust: barycenter attack cost and minimality", ok,
          "cost " + fmt(r.cost) + ", grid search " + fmt(search.cost)};
}

inline CheckResult check_budget_split() {
  double worst = 0.0;
  for (double eps : {0.0, 0.01, 0.1, 0.5, 2.0})
    for (double p : {0.01, 0.1, 0.3, 0.5, 0.6})
      for (double k : {0.5, 0.8, 1.0, 1.2, 1.5}) {
        if (k * p >= 1.0) continue;
        const auto s = split_epsilon(eps, p, k);
        worst = std::max(worst, std::abs(p * s.eps_pos + (1 - p) * s.eps_neg - eps));
      }
  return {"trainer: per-class radii average to the total budget", worst <= 1e-15,
          "max diff " + fmt(worst)};
}

inline CheckResult check_ablation() {
  const auto ds = make_long_tailed(gen_synthetic(200, 2, 0.65, 0.35, 0.15, 7), 0.2, 7);
  const auto m = init_model(Architecture::mlp(4), 2, 7);
  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.batch_size = 32;
  cfg.eps = 0.0;
  cfg.eta_z = 0.0;
  cfg.seed = 7;
  const auto base = train_aucm_baseline(ds, cfg, m);
  const auto df = train_df(ds, cfg, m);
  const auto da = train_da(ds, cfg, m);
  const bool ok = df.history == base.history && da.history == base.history &&
                  df.model == base.model && da.model == base.model && df.aux == base.aux &&
                  da.aux == base.aux;
  return {"trainer: zero budget and zero attack step reduce to the baseline", ok, ""};
}

inline CheckResult check_training_domains() {
  const auto ds = make_long_tailed(gen_synthetic(200, 2, 0.65, 0.35, 0.15, 8), 0.1, 8);
  TrainConfig cfg;
  cfg.variant = Variant::Da;
  cfg.iterations = 40;
  cfg.batch_size = 16;
  cfg.eps = 0.3;
  cfg.eta_lambda = 5.0;
  cfg.lambda_max = 3.0;
  cfg.seed = 8;
  const auto st = train(ds, cfg, init_model(Architecture::mlp(4), 2, 8));
  bool ok = st.aux.a >= 0 && st.aux.a <= 1 && st.aux.b >= 0 && st.aux.b <= 1;
  for (const auto& h : st.history)
    ok = ok && h.alpha >= -1 && h.alpha <= 1 && h.lambda_pos >= 0 && h.lambda_pos <= 3.0 &&
         h.lambda_neg >= 0 && h.lambda_neg <= 3.0 && h.batch_auc >= 0 && h.batch_auc <= 1 &&
         std::isfinite(h.objective);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500 && ok; ++i) {
    const auto b = sample_batch(ds, 4, rng);
    ok = std::any_of(b.begin(), b.end(), [&](std::size_t k) { return ds.labels[k] == 1; });
  }
  return {"trainer: iterates stay in their domains, batches hold a positive", ok, ""};
}

inline CheckResult check_persistence() {
  const auto ds = make_long_tailed(gen_synthetic(200, 2, 0.65, 0.35, 0.15, 9), 0.2, 9);
  TrainConfig cfg;
  cfg.variant = Variant::Df;
  cfg.iterations = 20;
  cfg.batch_size = 16;
  cfg.eps = 0.05;
  cfg.seed = 9;
  const auto m = init_model(Architecture::mlp(3), 2, 9);
  const auto ck = make_checkpoint(train(ds, cfg, m), cfg, ds.scaler);
  const auto again = make_checkpoint(train(ds, cfg, m), cfg, ds.scaler);
  bool ok = ck == again && checkpoint_from_string(checkpoint_to_string(ck)) == ck;

  namespace fs = std::filesystem;
  const auto path =
      (fs::temp_directory_path() / ("drauc_verify_" + std::to_string(std::random_device{}()) + ".csv"))
          .string();
  try {
    save_csv(ds, path);
    ok = ok && load_csv(path).same_samples(ds);
  } catch (const std::exception&) {
    ok = false;
  }
  std::error_code ec;
  fs::remove(path, ec);
  return {"cli/data: identical runs, checkpoint and CSV round-trips are bitwise", ok, ""};
}

inline CheckResult check_robust_estimate() {
  const auto ds = gen_synthetic(120, 2, 0.65, 0.35, 0.15, 10);
  TrainConfig cfg;
  cfg.variant = Variant::AucmBaseline;
  cfg.iterations = 150;
  cfg.batch_size = 32;
  cfg.seed = 10;
  const auto st = train(ds, cfg, init_model(Architecture::mlp(4), 2, 10));
  AttackConfig attack;
  attack.step_size = 0.05;
  const double nominal = dataset_auc(st.model, ds);
  bool ok = estimate_drauc(st.model, ds, 0.0, st.aux, attack) == nominal;
  double prev = nominal;
  for (double eps : {0.05, 0.1, 0.2}) {
    const double e = estimate_drauc(st.model, ds, eps, st.aux, attack);
    ok = ok && e <= prev && e >= 0.0;
    prev = e;
  }
  return {"robust: estimate is nominal at zero budget and non-increasing", ok,
          "nominal " + fmt(nominal) + ", eps=0.2 " + fmt(prev)};
}

}  // namespace detail

/// Every check, in module order. Exceptions are reported as failures.
inline std::vector<CheckResult> run_verification() {
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks{
      {"auc counting", detail::check_auc_counting},
      {"saddle identity", detail::check_saddle_identity},
      {"closed form", detail::check_closed_form},
      {"gradients", detail::check_gradients},
      {"phi", detail::check_phi},
      {"weak duality", detail::check_weak_duality},
      {"barycenter", detail::check_barycenter},
      {"budget split", detail::check_budget_split},
      {"ablation", detail::check_ablation},
      {"training domains", detail::check_training_domains},
      {"persistence", detail::check_persistence},
      {"robust estimate", detail::check_robust_estimate},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : checks) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace drauc
