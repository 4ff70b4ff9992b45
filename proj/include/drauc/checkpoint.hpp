#pragma once
// Text checkpoint: one "key=value" per line, floats as 17-significant-digit
// decimals, vectors comma-separated. load(save(x)) == x bitwise.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "drauc/data.hpp"
#include "drauc/error.hpp"
#include "drauc/model.hpp"
#include "drauc/robust.hpp"
#include "drauc/trainer.hpp"

namespace drauc {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  ScoringModel model;
  AuxParams aux;
  DualState dual;
  Scaler scaler;
  TrainConfig cfg;  // cfg.seed is the run seed
  std::size_t iteration = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline Checkpoint make_checkpoint(const TrainState& st, const TrainConfig& cfg, const Scaler& scaler) {
  return Checkpoint{kCheckpointFormatVersion, st.model, st.aux, st.dual, scaler, cfg, st.iteration};
}

namespace detail {

inline std::string join_doubles(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

class FieldReader {
 public:
  explicit FieldReader(std::map<std::string, std::string> fields) : fields_(std::move(fields)) {}

  const std::string& text(const std::string& key) {
    const auto it = fields_.find(key);
    if (it == fields_.end()) throw CheckpointError(key, "missing field");
    used_.push_back(key);
    return it->second;
  }

  double real(const std::string& key) {
    double v = 0.0;
    if (!parse_double(text(key), v)) throw CheckpointError(key, "not a finite number");
    return v;
  }

  std::uint64_t unsigned_int(const std::string& key) {
    const auto& t = text(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      throw CheckpointError(key, "not a non-negative integer");
    return v;
  }

  std::vector<double> reals(const std::string& key) {
    const auto& t = text(key);
    std::vector<double> out;
    if (t.empty()) return out;
    for (const auto& piece : split_fields(t)) {
      double v = 0.0;
      if (!parse_double(piece, v)) throw CheckpointError(key, "element '" + piece + "' is not a number");
      out.push_back(v);
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [k, _] : fields_)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        throw CheckpointError(k, "unknown field");
  }

 private:
  std::map<std::string, std::string> fields_;
  std::vector<std::string> used_;
};

}  // namespace detail

inline std::string checkpoint_to_string(const Checkpoint& ck) {
  using detail::format_double;
  std::ostringstream out;
  out << "format_version=" << ck.format_version << '\n'
      << "arch=" << to_string(ck.model.arch) << '\n'
      << "input_dim=" << ck.model.input_dim << '\n'
      << "theta_size=" << ck.model.params.size() << '\n'
      << "theta=" << detail::join_doubles(ck.model.params) << '\n'
      << "a=" << format_double(ck.aux.a) << '\n'
      << "b=" << format_double(ck.aux.b) << '\n'
      << "alpha=" << format_double(ck.aux.alpha) << '\n'
      << "lambda_pos=" << format_double(ck.dual.lambda_pos) << '\n'
      << "lambda_neg=" << format_double(ck.dual.lambda_neg) << '\n'
      << "eps_pos=" << format_double(ck.dual.eps_pos) << '\n'
      << "eps_neg=" << format_double(ck.dual.eps_neg) << '\n'
      << "lambda_max=" << format_double(ck.dual.lambda_max) << '\n'
      << "scaler_min=" << detail::join_doubles(ck.scaler.min) << '\n'
      << "scaler_max=" << detail::join_doubles(ck.scaler.max) << '\n'
      << "cfg.variant=" << to_string(ck.cfg.variant) << '\n'
      << "cfg.iters_T=" << ck.cfg.iterations << '\n'
      << "cfg.batch=" << ck.cfg.batch_size << '\n'
      << "cfg.eta_z=" << format_double(ck.cfg.eta_z) << '\n'
      << "cfg.eta_lambda=" << format_double(ck.cfg.eta_lambda) << '\n'
      << "cfg.eta_w=" << format_double(ck.cfg.eta_w) << '\n'
      << "cfg.eta_alpha=" << format_double(ck.cfg.eta_alpha) << '\n'
      << "cfg.steps_K=" << ck.cfg.steps_k << '\n'
      << "cfg.eps=" << format_double(ck.cfg.eps) << '\n'
      << "cfg.k=" << format_double(ck.cfg.k_split) << '\n'
      << "cfg.lambda0=" << format_double(ck.cfg.lambda0) << '\n'
      << "cfg.lambda_max=" << format_double(ck.cfg.lambda_max) << '\n'
      << "cfg.step_decay=" << (ck.cfg.step_decay ? 1 : 0) << '\n'
      << "cfg.restarts=" << ck.cfg.attack_restarts << '\n'
      << "seed=" << ck.cfg.seed << '\n'
      << "iteration=" << ck.iteration << '\n';
  return out.str();
}

inline Checkpoint checkpoint_from_string(const std::string& text) {
  std::map<std::string, std::string> fields;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const auto key = line.substr(0, eq);
    if (!fields.emplace(key, line.substr(eq + 1)).second)
      throw CheckpointError(key, "duplicate field");
  }
  detail::FieldReader r(std::move(fields));

  Checkpoint ck;
  const auto version = r.unsigned_int("format_version");
  if (version != std::uint64_t(kCheckpointFormatVersion))
    throw CheckpointError("format_version", "version mismatch: file has " + std::to_string(version) +
                                                ", reader expects " +
                                                std::to_string(kCheckpointFormatVersion));
  try {
    ck.model.arch = parse_architecture(r.text("arch"));
  } catch (const ConfigError& e) {
    throw CheckpointError("arch", e.what());
  }
  ck.model.input_dim = r.unsigned_int("input_dim");
  if (ck.model.input_dim == 0) throw CheckpointError("input_dim", "must be >= 1");
  const auto theta_size = r.unsigned_int("theta_size");
  ck.model.params = r.reals("theta");
  if (ck.model.params.size() != theta_size)
    throw CheckpointError("theta", "has " + std::to_string(ck.model.params.size()) +
                                       " values but theta_size is " + std::to_string(theta_size));
  if (theta_size != param_count(ck.model.arch, ck.model.input_dim))
    throw CheckpointError("theta", "length " + std::to_string(theta_size) + " does not match " +
                                       to_string(ck.model.arch) + " with input_dim " +
                                       std::to_string(ck.model.input_dim));
  ck.aux = {r.real("a"), r.real("b"), r.real("alpha")};
  ck.dual.lambda_pos = r.real("lambda_pos");
  ck.dual.lambda_neg = r.real("lambda_neg");
  ck.dual.eps_pos = r.real("eps_pos");
  ck.dual.eps_neg = r.real("eps_neg");
  ck.dual.lambda_max = r.real("lambda_max");
  ck.scaler.min = r.reals("scaler_min");
  ck.scaler.max = r.reals("scaler_max");
  if (ck.scaler.min.size() != ck.model.input_dim)
    throw CheckpointError("scaler_min", "length does not match input_dim");
  if (ck.scaler.max.size() != ck.model.input_dim)
    throw CheckpointError("scaler_max", "length does not match input_dim");
  try {
    ck.cfg.variant = parse_variant(r.text("cfg.variant"));
  } catch (const ConfigError& e) {
    throw CheckpointError("cfg.variant", e.what());
  }
  ck.cfg.iterations = r.unsigned_int("cfg.iters_T");
  ck.cfg.batch_size = r.unsigned_int("cfg.batch");
  ck.cfg.eta_z = r.real("cfg.eta_z");
  ck.cfg.eta_lambda = r.real("cfg.eta_lambda");
  ck.cfg.eta_w = r.real("cfg.eta_w");
  ck.cfg.eta_alpha = r.real("cfg.eta_alpha");
  ck.cfg.steps_k = int(r.unsigned_int("cfg.steps_K"));
  ck.cfg.eps = r.real("cfg.eps");
  ck.cfg.k_split = r.real("cfg.k");
  ck.cfg.lambda0 = r.real("cfg.lambda0");
  ck.cfg.lambda_max = r.real("cfg.lambda_max");
  const auto decay = r.unsigned_int("cfg.step_decay");
  if (decay > 1) throw CheckpointError("cfg.step_decay", "must be 0 or 1");
  ck.cfg.step_decay = decay == 1;
  ck.cfg.attack_restarts = int(r.unsigned_int("cfg.restarts"));
  ck.cfg.seed = r.unsigned_int("seed");
  ck.iteration = r.unsigned_int("iteration");
  r.reject_unknown();
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << checkpoint_to_string(ck);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace drauc
