#pragma once
// Central finite-difference validation of the analytic gradients of
// g(a, b, alpha; f_theta(x), y) with respect to theta, a, b, alpha and x.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "drauc/auc.hpp"
#include "drauc/model.hpp"

namespace drauc {

struct GradCheckReport {
  std::string arch;
  std::size_t trials = 0;
  double max_rel_error = 0.0;
  std::string worst;  // which partial produced max_rel_error
  bool passed = false;
};

namespace detail {

// Independent extended-precision forward pass and surrogate for the numeric side.
// In double, central differences bottom out near eps_mach / h ~ 1e-11 absolute, which
// swamps the tiny partials of saturated tanh units.
using Wide = long double;

inline Wide wide_score(const ScoringModel& m, const std::vector<Wide>& theta,
                       const std::vector<Wide>& x) {
  const std::size_t d = m.input_dim;
  switch (m.arch.kind) {
    case ArchKind::LinearSigmoid: {
      Wide u = theta[d];
      for (std::size_t j = 0; j < d; ++j) u += theta[j] * x[j];
      return 1.0L / (1.0L + std::exp(-u));
    }
    case ArchKind::LinearIdentityClamped: {
      Wide u = theta[d];
      for (std::size_t j = 0; j < d; ++j) u += theta[j] * x[j];
      return std::clamp(u, 0.0L, 1.0L);
    }
    case ArchKind::Mlp1TanhSigmoid: {
      const std::size_t h = m.arch.hidden_width;
      Wide pre = theta[h * d + 2 * h];
      for (std::size_t k = 0; k < h; ++k) {
        Wide u = theta[h * d + k];
        for (std::size_t j = 0; j < d; ++j) u += theta[k * d + j] * x[j];
        pre += theta[h * d + h + k] * std::tanh(u);
      }
      return 1.0L / (1.0L + std::exp(-pre));
    }
  }
  return 0.0L;
}

inline Wide wide_g(Wide a, Wide b, Wide alpha, Wide p, Wide f, int y) {
  if (y == 1) return (1 - p) * (f - a) * (f - a) - 2 * (1 + alpha) * (1 - p) * f - p * (1 - p) * alpha * alpha;
  return p * (f - b) * (f - b) + 2 * (1 + alpha) * p * f - p * (1 - p) * alpha * alpha;
}

}  // namespace detail

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
inline double gradient_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

/// Random interior configurations: d in 1..4, theta ~ N(0,1), x, a, b in [0.05, 0.95],
/// alpha in [-0.9, 0.9], p_hat in [0.05, 0.95]. For the clamped arch, draws whose
/// pre-activation lies within 0.01 of a kink are redrawn.
inline GradCheckReport grad_check(const Architecture& arch, std::size_t trials, double h,
                                  double tol, std::uint64_t seed = 0) {
  GradCheckReport rep;
  rep.arch = to_string(arch);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto track = [&](double analytic, double numeric, const std::string& what) {
    const double e = gradient_rel_error(analytic, numeric);
    if (e > rep.max_rel_error || rep.worst.empty()) {
      rep.max_rel_error = e;
      rep.worst = what;
    }
  };

  while (rep.trials < trials) {
    const std::size_t d = 1 + rng() % 4;
    ScoringModel m = init_model(arch, d, rng());
    for (double& p : m.params) p = normal(rng) * (arch.kind == ArchKind::LinearIdentityClamped ? 0.3 : 1.0);
    std::vector<double> x(d);
    for (double& v : x) v = unit(rng);
    AuxParams aux{unit(rng), unit(rng), 0.9 * (2.0 * unit(rng) - 1.0)};
    const double p_hat = unit(rng);
    const int y = int(rng() % 2);
    if (arch.kind == ArchKind::LinearIdentityClamped) {
      double u = m.params[d];
      for (std::size_t j = 0; j < d; ++j) u += m.params[j] * x[j];
      if (u < 0.01 || u > 0.99) continue;
    }
    ++rep.trials;

    const std::vector<detail::Wide> theta0(m.params.begin(), m.params.end());
    const std::vector<detail::Wide> x0(x.begin(), x.end());
    const detail::Wide a0 = aux.a, b0 = aux.b, al0 = aux.alpha, p0 = p_hat, hh = h;
    auto loss = [&](const std::vector<detail::Wide>& th, const std::vector<detail::Wide>& xx,
                    detail::Wide a, detail::Wide b, detail::Wide al) {
      return detail::wide_g(a, b, al, p0, detail::wide_score(m, th, xx), y);
    };
    auto central = [&](auto&& at) { return double((at(hh) - at(-hh)) / (2 * hh)); };

    const double f = score(m, x);
    const GGrads gg = g_grads(aux, p_hat, f, y);
    const auto dtheta = score_grad_params(m, x);
    const auto dx = score_grad_input(m, x);

    for (std::size_t k = 0; k < m.params.size(); ++k) {
      track(gg.df * dtheta[k], central([&](detail::Wide s) {
              auto th = theta0;
              th[k] += s;
              return loss(th, x0, a0, b0, al0);
            }),
            "theta[" + std::to_string(k) + "]");
    }
    for (std::size_t j = 0; j < d; ++j) {
      track(gg.df * dx[j], central([&](detail::Wide s) {
              auto xx = x0;
              xx[j] += s;
              return loss(theta0, xx, a0, b0, al0);
            }),
            "x[" + std::to_string(j) + "]");
    }
    track(gg.da, central([&](detail::Wide s) { return loss(theta0, x0, a0 + s, b0, al0); }), "a");
    track(gg.db, central([&](detail::Wide s) { return loss(theta0, x0, a0, b0 + s, al0); }), "b");
    track(gg.dalpha, central([&](detail::Wide s) { return loss(theta0, x0, a0, b0, al0 + s); }),
          "alpha");
  }
  rep.passed = rep.max_rel_error <= tol;
  return rep;
}

}  // namespace drauc
