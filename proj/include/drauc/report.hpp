#pragma once
// Line-oriented run report: metric=value, one per line.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "drauc/checkpoint.hpp"
#include "drauc/data.hpp"
#include "drauc/error.hpp"
#include "drauc/trainer.hpp"

namespace drauc {

struct RunReport {
  std::vector<std::pair<std::string, std::string>> config;  // resolved, in order
  std::vector<IterationRecord> history;
  double nominal_auc = 0.0;
  std::vector<std::pair<double, double>> corrupted_auc;  // (sigma, auc)
  std::vector<std::pair<double, double>> robust_auc;     // (eps, auc)
  double wall_clock_seconds = 0.0;
};

/// config.* entries for every field of the training configuration.
inline std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& cfg) {
  using detail::format_double;
  return {{"variant", to_string(cfg.variant)},
          {"iters_T", std::to_string(cfg.iterations)},
          {"batch", std::to_string(cfg.batch_size)},
          {"eta_z", format_double(cfg.eta_z)},
          {"eta_lambda", format_double(cfg.eta_lambda)},
          {"eta_w", format_double(cfg.eta_w)},
          {"eta_alpha", format_double(cfg.eta_alpha)},
          {"steps_K", std::to_string(cfg.steps_k)},
          {"eps", format_double(cfg.eps)},
          {"k", format_double(cfg.k_split)},
          {"lambda0", format_double(cfg.lambda0)},
          {"lambda_max", format_double(cfg.lambda_max)},
          {"step_decay", cfg.step_decay ? "1" : "0"},
          {"restarts", std::to_string(cfg.attack_restarts)},
          {"seed", std::to_string(cfg.seed)}};
}

namespace detail {

// Shortest decimal that reads back to the same double; used in metric keys.
inline std::string short_label(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string report_to_string(const RunReport& r) {
  using detail::format_double;
  std::ostringstream out;
  for (const auto& [k, v] : r.config) out << "config." << k << '=' << v << '\n';
  for (std::size_t t = 0; t < r.history.size(); ++t) {
    const auto& h = r.history[t];
    out << "history." << t << '=' << format_double(h.objective) << ','
        << format_double(h.lambda_pos) << ',' << format_double(h.lambda_neg) << ','
        << format_double(h.alpha) << ',' << format_double(h.batch_auc) << '\n';
  }
  out << "nominal_auc=" << format_double(r.nominal_auc) << '\n';
  for (const auto& [s, a] : r.corrupted_auc)
    out << "corrupted_auc[" << detail::short_label(s) << "]=" << format_double(a) << '\n';
  for (const auto& [e, a] : r.robust_auc)
    out << "robust_auc[" << detail::short_label(e) << "]=" << format_double(a) << '\n';
  out << "wall_clock_seconds=" << format_double(r.wall_clock_seconds) << '\n';
  return out.str();
}

/// Flat metric=value map; later duplicates are a ParseError.
inline std::map<std::string, std::string> parse_metrics(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(n, "expected metric=value");
    if (!out.emplace(line.substr(0, eq), line.substr(eq + 1)).second)
      throw ParseError(n, "duplicate key '" + line.substr(0, eq) + "'");
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace drauc
