#pragma once
// Differentiable scoring functions f(x) -> [0,1] with analytic gradients
// with respect to both the parameters and the input.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "drauc/error.hpp"

namespace drauc {

enum class ArchKind { LinearSigmoid, Mlp1TanhSigmoid, LinearIdentityClamped };

struct Architecture {
  ArchKind kind = ArchKind::LinearSigmoid;
  std::size_t hidden_width = 0;  // only meaningful for Mlp1TanhSigmoid

  static Architecture linear_sigmoid() { return {ArchKind::LinearSigmoid, 0}; }
  static Architecture mlp(std::size_t width) { return {ArchKind::Mlp1TanhSigmoid, width}; }
  static Architecture identity_clamped() { return {ArchKind::LinearIdentityClamped, 0}; }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

inline std::string to_string(const Architecture& arch) {
  switch (arch.kind) {
    case ArchKind::LinearSigmoid:
      return "linear-sigmoid";
    case ArchKind::Mlp1TanhSigmoid:
      return "mlp1-tanh-sigmoid(" + std::to_string(arch.hidden_width) + ")";
    case ArchKind::LinearIdentityClamped:
      return "linear-identity-clamped";
  }
  return "?";
}

/// Parses "linear-sigmoid", "mlp1-tanh-sigmoid(W)" or "linear-identity-clamped".
inline Architecture parse_architecture(const std::string& text) {
  if (text == "linear-sigmoid") return Architecture::linear_sigmoid();
  if (text == "linear-identity-clamped") return Architecture::identity_clamped();
  const std::string prefix = "mlp1-tanh-sigmoid(";
  if (text.size() > prefix.size() + 1 && text.compare(0, prefix.size(), prefix) == 0 &&
      text.back() == ')') {
    const std::string digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(),
                                       [](char c) { return c >= '0' && c <= '9'; })) {
      const auto width = std::stoul(digits);
      if (width == 0) throw ConfigError("mlp hidden width must be >= 1");
      return Architecture::mlp(width);
    }
  }
  throw ConfigError("unknown architecture '" + text + "'");
}

inline std::size_t param_count(const Architecture& arch, std::size_t input_dim) {
  switch (arch.kind) {
    case ArchKind::LinearSigmoid:
    case ArchKind::LinearIdentityClamped:
      return input_dim + 1;
    case ArchKind::Mlp1TanhSigmoid:
      // W (h x d), c (h), v (h), b
      return input_dim * arch.hidden_width + 2 * arch.hidden_width + 1;
  }
  return 0;
}

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// A scorer with a flat parameter vector. Parameter layout:
///   linear archs: w[0..d), b
///   mlp:          W row-major (h x d), c[0..h), v[0..h), b
struct ScoringModel {
  Architecture arch;
  std::size_t input_dim = 0;
  std::vector<double> params;

  friend bool operator==(const ScoringModel&, const ScoringModel&) = default;
};

inline void validate_model(const ScoringModel& model) {
  if (model.input_dim == 0) throw ConfigError("input_dim must be >= 1");
  if (model.arch.kind == ArchKind::Mlp1TanhSigmoid && model.arch.hidden_width == 0)
    throw ConfigError("mlp hidden width must be >= 1");
  if (model.params.size() != param_count(model.arch, model.input_dim))
    throw DimensionError("params length " + std::to_string(model.params.size()) +
                         " does not match " + to_string(model.arch) + " with d=" +
                         std::to_string(model.input_dim));
}

/// Weights ~ U[-s, s] with s = 1/sqrt(fan_in), biases zero.
inline ScoringModel init_model(const Architecture& arch, std::size_t input_dim,
                               std::uint64_t seed) {
  ScoringModel model{arch, input_dim, std::vector<double>(param_count(arch, input_dim), 0.0)};
  validate_model(model);
  std::mt19937_64 rng(seed);
  const std::size_t d = input_dim;
  if (arch.kind != ArchKind::Mlp1TanhSigmoid) {
    std::uniform_real_distribution<double> u(-1.0 / std::sqrt(double(d)), 1.0 / std::sqrt(double(d)));
    for (std::size_t j = 0; j < d; ++j) model.params[j] = u(rng);
    return model;
  }
  const std::size_t h = arch.hidden_width;
  std::uniform_real_distribution<double> u_in(-1.0 / std::sqrt(double(d)), 1.0 / std::sqrt(double(d)));
  for (std::size_t k = 0; k < h * d; ++k) model.params[k] = u_in(rng);
  std::uniform_real_distribution<double> u_out(-1.0 / std::sqrt(double(h)), 1.0 / std::sqrt(double(h)));
  for (std::size_t k = 0; k < h; ++k) model.params[h * d + h + k] = u_out(rng);
  return model;
}

namespace detail {

inline void check_input(const ScoringModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim)
    throw DimensionError("input has length " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(model.input_dim));
  if (model.params.size() != param_count(model.arch, model.input_dim))
    throw DimensionError("params length does not match architecture");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Score plus optional gradients, sharing one forward pass.
inline double forward(const ScoringModel& model, std::span<const double> x,
                      std::vector<double>* grad_params, std::vector<double>* grad_input) {
  check_input(model, x);
  const std::size_t d = model.input_dim;
  const std::span<const double> p(model.params);
  if (grad_params) grad_params->assign(p.size(), 0.0);
  if (grad_input) grad_input->assign(d, 0.0);

  switch (model.arch.kind) {
    case ArchKind::LinearSigmoid: {
      const double s = sigmoid(dot(p.first(d), x) + p[d]);
      const double ds = s * (1.0 - s);
      if (grad_params) {
        for (std::size_t j = 0; j < d; ++j) (*grad_params)[j] = ds * x[j];
        (*grad_params)[d] = ds;
      }
      if (grad_input)
        for (std::size_t j = 0; j < d; ++j) (*grad_input)[j] = ds * p[j];
      return s;
    }
    case ArchKind::LinearIdentityClamped: {
      const double u = dot(p.first(d), x) + p[d];
      // Linear branch on the closed interval [0,1]; clamped (zero slope) strictly outside.
      const double slope = (u >= 0.0 && u <= 1.0) ? 1.0 : 0.0;
      if (grad_params) {
        for (std::size_t j = 0; j < d; ++j) (*grad_params)[j] = slope * x[j];
        (*grad_params)[d] = slope;
      }
      if (grad_input)
        for (std::size_t j = 0; j < d; ++j) (*grad_input)[j] = slope * p[j];
      return std::clamp(u, 0.0, 1.0);
    }
    case ArchKind::Mlp1TanhSigmoid: {
      const std::size_t h = model.arch.hidden_width;
      const auto W = p.subspan(0, h * d);
      const auto c = p.subspan(h * d, h);
      const auto v = p.subspan(h * d + h, h);
      const double b = p[h * d + 2 * h];
      std::vector<double> hidden(h);
      double pre = b;
      for (std::size_t k = 0; k < h; ++k) {
        hidden[k] = std::tanh(dot(W.subspan(k * d, d), x) + c[k]);
        pre += v[k] * hidden[k];
      }
      const double s = sigmoid(pre);
      const double ds = s * (1.0 - s);
      for (std::size_t k = 0; k < h; ++k) {
        const double dhidden = ds * v[k] * (1.0 - hidden[k] * hidden[k]);
        if (grad_params) {
          for (std::size_t j = 0; j < d; ++j) (*grad_params)[k * d + j] = dhidden * x[j];
          (*grad_params)[h * d + k] = dhidden;
          (*grad_params)[h * d + h + k] = ds * hidden[k];
        }
        if (grad_input)
          for (std::size_t j = 0; j < d; ++j) (*grad_input)[j] += dhidden * W[k * d + j];
      }
      if (grad_params) (*grad_params)[h * d + 2 * h] = ds;
      return s;
    }
  }
  return 0.0;
}

}  // namespace detail

inline double score(const ScoringModel& model, std::span<const double> x) {
  return detail::forward(model, x, nullptr, nullptr);
}

inline std::vector<double> score_grad_params(const ScoringModel& model, std::span<const double> x) {
  std::vector<double> g;
  detail::forward(model, x, &g, nullptr);
  return g;
}

/// For the clamped arch the slope is w on the closed region 0 <= w.x+b <= 1 and 0 outside.
inline std::vector<double> score_grad_input(const ScoringModel& model, std::span<const double> x) {
  std::vector<double> g;
  detail::forward(model, x, nullptr, &g);
  return g;
}

}  // namespace drauc
