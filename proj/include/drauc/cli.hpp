#pragma once
// drauc command line: gen-data, train, eval, attack-oracle, verify, grad-check.
// Exit codes: 0 ok, 1 validation failure (bad values, failed checks), 2 usage or IO error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "drauc/checkpoint.hpp"
#include "drauc/data.hpp"
#include "drauc/error.hpp"
#include "drauc/gradcheck.hpp"
#include "drauc/model.hpp"
#include "drauc/report.hpp"
#include "drauc/robust.hpp"
#include "drauc/trainer.hpp"
#include "drauc/verify.hpp"

namespace drauc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  if (!drauc::detail::parse_double(text, v)) throw ConfigError(key + ": '" + text + "' is not a number");
  return v;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(key + ": '" + text + "' is not a non-negative integer");
  return v;
}

// key=value lines, '#' comments. Keys are long flag names without the leading dashes.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  const auto text = read_text_file(path);
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(n, "config: expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// Training flags shared by `train`; values land in cfg once resolved.
struct TrainFlags {
  std::string variant = "df";
  double eps = 0.1, k = 1.0, eta_z = 15.0 / 255.0, eta_lambda = 0.1, eta_w = 0.1,
         eta_alpha = 0.1, lambda0 = 1.0, lambda_max = 1e3, ratio = 0.0;
  std::uint64_t steps_k = 10, iters_t = 1000, batch = 128, seed = 0, n = 2000, dim = 2,
                restarts = 0;
  std::string arch = "mlp1-tanh-sigmoid(8)";
  bool step_decay = false;
  std::string config, out = "drauc.ckpt", data;

  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::function<void(const std::string&)>> setters;

  template <class T>
  void add(CLI::App* app, const std::string& name, T& target, const std::string& help) {
    options[name] = app->add_option("--" + name, target, help)->capture_default_str();
    setters[name] = [this, name, &target](const std::string& text) {
      if constexpr (std::is_same_v<T, double>)
        target = to_double(name, text);
      else if constexpr (std::is_same_v<T, std::uint64_t>)
        target = to_uint(name, text);
      else
        target = text;
    };
  }

  void attach(CLI::App* app) {
    add(app, "variant", variant, "df, da or aucm");
    add(app, "eps", eps, "Wasserstein budget");
    add(app, "k", k, "da only: eps+ = k * eps");
    add(app, "eta-z", eta_z, "attack step size");
    add(app, "eta-lambda", eta_lambda, "multiplier step size");
    add(app, "eta-w", eta_w, "model and a, b step size");
    add(app, "eta-alpha", eta_alpha, "alpha step size");
    add(app, "steps-K", steps_k, "attack steps per iteration");
    add(app, "iters-T", iters_t, "training iterations");
    add(app, "batch", batch, "mini-batch size");
    add(app, "ratio", ratio, "long-tail positive ratio (0 keeps the data as is)");
    add(app, "seed", seed, "run seed (falls back to DRAUC_SEED)");
    add(app, "lambda0", lambda0, "initial multiplier");
    add(app, "lambda-max", lambda_max, "multiplier upper bound");
    add(app, "arch", arch, "linear-sigmoid, mlp1-tanh-sigmoid(W) or linear-identity-clamped");
    add(app, "n", n, "synthetic sample count when --data is absent");
    add(app, "dim", dim, "synthetic feature dimension when --data is absent");
    add(app, "restarts", restarts, "extra random attack starts");
    add(app, "data", data, "training CSV (synthetic data when absent)");
    add(app, "out", out, "checkpoint path; the report goes to PATH.report");
    options["step-decay"] = app->add_flag("--step-decay", step_decay, "x0.1 LR decay at 50% and 75% of T");
    setters["step-decay"] = [this](const std::string& text) {
      if (text == "1" || text == "true") step_decay = true;
      else if (text == "0" || text == "false") step_decay = false;
      else throw ConfigError("step-decay: expected 0/1/true/false");
    };
    app->add_option("--config", config, "key=value file; command-line flags take precedence");
  }

  // flags > config file > DRAUC_SEED (seed only) > defaults
  void resolve() {
    if (!config.empty()) {
      for (const auto& [key, value] : read_config_file(config)) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("config: unknown key '" + key + "'");
        if (options.at(key)->count() == 0) it->second(value);
      }
    }
    const bool seed_set = options.at("seed")->count() > 0 ||
                          (!config.empty() && read_config_file(config).count("seed"));
    if (!seed_set) {
      if (const char* env = std::getenv("DRAUC_SEED")) seed = to_uint("DRAUC_SEED", env);
    }
  }

  TrainConfig to_config() const {
    TrainConfig cfg;
    cfg.variant = parse_variant(variant);
    cfg.iterations = iters_t;
    cfg.batch_size = batch;
    cfg.eta_z = eta_z;
    cfg.eta_lambda = eta_lambda;
    cfg.eta_w = eta_w;
    cfg.eta_alpha = eta_alpha;
    cfg.steps_k = int(steps_k);
    cfg.eps = eps;
    cfg.k_split = k;
    cfg.lambda0 = lambda0;
    cfg.lambda_max = lambda_max;
    cfg.seed = seed;
    cfg.step_decay = step_decay;
    cfg.attack_restarts = int(restarts);
    cfg.validate();
    return cfg;
  }
};

inline std::vector<double> default_sigmas() { return {0.1, 0.2, 0.3}; }
inline std::vector<double> default_eps_levels() { return {0.0, 0.05, 0.1, 0.2}; }

inline void fill_metrics(RunReport& rep, const ScoringModel& model, const AuxParams& aux,
                         const Dataset& data, const std::vector<double>& sigmas,
                         const std::vector<double>& eps_levels, std::uint64_t seed,
                         const AttackConfig& attack) {
  rep.nominal_auc = dataset_auc(model, data);
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    rep.corrupted_auc.emplace_back(sigmas[i],
                                   dataset_auc(model, corrupt(data, sigmas[i], seed + 1000 + i)));
  for (double e : eps_levels) rep.robust_auc.emplace_back(e, estimate_drauc(model, data, e, aux, attack));
}

inline int cmd_gen_data(std::uint64_t n, std::uint64_t dim, double ratio, double sigma,
                        std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  auto ds = gen_synthetic(n, dim, 0.65, 0.35, sigma, seed);
  if (ratio > 0.0) ds = make_long_tailed(ds, ratio, seed + 1);
  save_csv(ds, out_path);
  out << "wrote " << out_path << " rows=" << ds.size() << " positives=" << ds.count_positive()
      << " p_hat=" << drauc::detail::format_double(ds.p_hat) << '\n';
  return kExitOk;
}

inline int cmd_train(const TrainFlags& f, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig cfg = f.to_config();
  Dataset data;
  Scaler scaler;
  if (!f.data.empty()) {
    data = load_csv(f.data);
    scaler = data.scaler;
  } else {
    data = gen_synthetic(f.n, f.dim, 0.65, 0.35, 0.15, f.seed);
    // In-memory data is already in model units, as gen-data would write it.
    scaler.min.assign(data.dim, 0.0);
    scaler.max.assign(data.dim, 1.0);
  }
  if (f.ratio > 0.0) data = make_long_tailed(data, f.ratio, f.seed + 1);
  const auto model = init_model(parse_architecture(f.arch), data.dim, f.seed + 2);
  const auto st = train(data, cfg, model);
  const auto ck = make_checkpoint(st, cfg, scaler);
  save_checkpoint(ck, f.out);

  RunReport rep;
  rep.config = config_entries(cfg);
  rep.config.insert(rep.config.begin(), {{"command", "train"},
                                         {"arch", f.arch},
                                         {"data", f.data.empty() ? "synthetic" : f.data},
                                         {"n", std::to_string(data.size())},
                                         {"dim", std::to_string(data.dim)},
                                         {"ratio", drauc::detail::format_double(f.ratio)},
                                         {"p_hat", drauc::detail::format_double(data.p_hat)}});
  rep.history = st.history;
  AttackConfig attack;
  attack.steps = cfg.steps_k;
  attack.step_size = cfg.eta_z;
  fill_metrics(rep, st.model, st.aux, data, default_sigmas(), default_eps_levels(), f.seed, attack);
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text_file(f.out + ".report", report_to_string(rep));
  out << "checkpoint=" << f.out << '\n'
      << "report=" << f.out << ".report\n"
      << "nominal_auc=" << drauc::detail::format_double(rep.nominal_auc) << '\n';
  return kExitOk;
}

inline int cmd_eval(const std::string& ck_path, const std::string& data_path,
                    const std::vector<double>& sigmas, const std::vector<double>& eps_levels,
                    std::uint64_t seed, const AttackConfig& attack, const std::string& out_path,
                    std::ostream& out) {
  attack.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto ck = load_checkpoint(ck_path);
  const auto data = load_csv(data_path, ck.scaler);
  if (data.dim != ck.model.input_dim)
    throw DimensionError("data has " + std::to_string(data.dim) + " features, model expects " +
                         std::to_string(ck.model.input_dim));
  RunReport rep;
  rep.config = config_entries(ck.cfg);
  rep.config.insert(rep.config.begin(), {{"command", "eval"},
                                         {"checkpoint", ck_path},
                                         {"data", data_path},
                                         {"arch", to_string(ck.model.arch)},
                                         {"eval_seed", std::to_string(seed)},
                                         {"eval_eta_z", drauc::detail::format_double(attack.step_size)},
                                         {"eval_steps_K", std::to_string(attack.steps)}});
  fill_metrics(rep, ck.model, ck.aux, data, sigmas, eps_levels, seed, attack);
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto text = report_to_string(rep);
  if (!out_path.empty()) write_text_file(out_path, text);
  out << text;
  return kExitOk;
}

inline int cmd_attack_oracle(const std::string& preset, std::ostream& out) {
  using drauc::detail::format_double;
  if (preset == "example1") {
    const auto r = barycenter_attack(0.99, 0.01, 1, 99);
    const std::vector<double> pos{0.99}, neg(99, 0.01);
    const double after = auc_mann_whitney(std::vector<double>{r.target},
                                          std::vector<double>(99, r.target), TiePolicy::Strict);
    const auto search = min_cost_strict_auc_zero(pos, neg, 10001);
    out << "preset=example1\n"
        << "target=" << format_double(r.target) << '\n'
        << "cost=" << format_double(r.cost) << '\n'
        << "bound=" << format_double(r.bound) << '\n'
        << "strict_auc_after=" << format_double(after) << '\n'
        << "min_search_cost=" << format_double(search.cost) << '\n'
        << "min_search_threshold=" << format_double(search.threshold) << '\n'
        << "note=0.009702 is p(1-p)|x+ - x-| (unsquared distance), not the squared-Euclidean "
           "transport cost of this attack, which is "
        << format_double(r.cost) << '\n';
    const bool ok = after == 0.0 && std::abs(r.cost - r.bound) <= 1e-12 &&
                    search.cost >= r.bound - 1e-12;
    return ok ? kExitOk : kExitValidation;
  }
  if (preset == "tiny") {
    // Four points, identity scorer, closed-form aux: brute force vs the Lagrangian dual.
    const auto ds = make_dataset(1, {0.8, 0.6, 0.3, 0.1}, {1, 1, 0, 0});
    const ScoringModel m{Architecture::identity_clamped(), 1, {1.0, 0.0}};
    const auto aux = closed_form_aux(std::vector<double>{0.8, 0.6}, std::vector<double>{0.3, 0.1});
    const double eps = 0.02;
    const auto bf = brute_force_worst_case(ds, eps, 1001, aux, ds.p_hat, m);
    std::vector<double> grid{0.0};
    for (int k = 0; k < 99; ++k) grid.push_back(1e-3 * std::pow(10.0, 6.0 * k / 98.0));
    const auto dc = dual_curve(m, aux, ds.p_hat, ds, eps, grid);
    bool weak = true;
    for (const auto& pt : dc.curve) weak = weak && pt.value >= bf.sup_value - 1e-12;
    out << "preset=tiny\n"
        << "eps=" << format_double(eps) << '\n'
        << "brute_force_sup=" << format_double(bf.sup_value) << '\n';
    for (std::size_t i = 0; i < bf.positions.size(); ++i)
      out << "worst_position[" << i << "]=" << format_double(bf.positions[i]) << '\n';
    out << "dual_min=" << format_double(dc.best_value) << '\n'
        << "dual_argmin_lambda=" << format_double(dc.best_lambda) << '\n'
        << "weak_duality=" << (weak ? "ok" : "violated") << '\n';
    return weak ? kExitOk : kExitValidation;
  }
  throw CLI::ValidationError("--preset", "expected example1 or tiny");
}

inline int cmd_verify(std::ostream& out) {
  int failed = 0;
  for (const auto& r : run_verification()) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) out << " (" << r.detail << ')';
    out << '\n';
    failed += r.passed ? 0 : 1;
  }
  out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  return failed == 0 ? kExitOk : kExitValidation;
}

inline int cmd_grad_check(const std::string& arch, std::uint64_t trials, double h, double tol,
                          std::uint64_t seed, std::ostream& out) {
  if (!(h > 0.0) || !(tol > 0.0)) throw ConfigError("grad-check needs h > 0 and tol > 0");
  const auto rep = grad_check(parse_architecture(arch), trials, h, tol, seed);
  out << "arch=" << rep.arch << '\n'
      << "trials=" << rep.trials << '\n'
      << "max_rel_error=" << drauc::detail::format_double(rep.max_rel_error) << '\n'
      << "worst=" << rep.worst << '\n'
      << "passed=" << (rep.passed ? 1 : 0) << '\n';
  return rep.passed ? kExitOk : kExitValidation;
}

}  // namespace detail

inline int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributionally robust AUC training and verification"};
  app.name("drauc");
  app.require_subcommand(1);

  std::uint64_t gd_n = 2000, gd_dim = 2, gd_seed = 0;
  double gd_ratio = 0.0, gd_sigma = 0.15;
  std::string gd_out;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic two-blob CSV");
  gen->add_option("--n", gd_n, "rows before long-tailing")->capture_default_str();
  gen->add_option("--dim", gd_dim, "feature dimension")->capture_default_str();
  gen->add_option("--ratio", gd_ratio, "long-tail positive ratio (0 keeps classes balanced)")
      ->capture_default_str();
  gen->add_option("--sigma", gd_sigma, "blob standard deviation")->capture_default_str();
  auto* gd_seed_opt = gen->add_option("--seed", gd_seed, "seed (falls back to DRAUC_SEED)");
  gen->add_option("--out", gd_out, "output CSV")->required();

  detail::TrainFlags tf;
  auto* tr = app.add_subcommand("train", "train a model and write checkpoint + report");
  tf.attach(tr);

  std::string ev_ck, ev_data, ev_out;
  std::vector<double> ev_sigmas = detail::default_sigmas(), ev_eps = detail::default_eps_levels();
  std::uint64_t ev_seed = 0;
  auto* ev = app.add_subcommand("eval", "score a CSV with a checkpoint");
  ev->add_option("--checkpoint", ev_ck, "checkpoint path")->required();
  ev->add_option("--data", ev_data, "CSV to score")->required();
  ev->add_option("--sigma", ev_sigmas, "corruption levels")->capture_default_str();
  ev->add_option("--eps", ev_eps, "robust estimate budgets")->capture_default_str();
  auto* ev_seed_opt = ev->add_option("--seed", ev_seed, "corruption seed (falls back to DRAUC_SEED)");
  ev->add_option("--out", ev_out, "also write the report here");
  AttackConfig ev_attack;
  ev->add_option("--eta-z", ev_attack.step_size, "attack step size for the robust estimate")
      ->capture_default_str();
  ev->add_option("--steps-K", ev_attack.steps, "attack steps for the robust estimate")
      ->capture_default_str();

  std::string preset = "example1";
  auto* ao = app.add_subcommand("attack-oracle", "exact worst-case attacks on tiny instances");
  ao->add_option("--preset", preset, "example1 or tiny")
      ->check(CLI::IsMember({"example1", "tiny"}))
      ->capture_default_str();

  auto* vf = app.add_subcommand("verify", "run the invariant suite");

  std::string gc_arch = "mlp1-tanh-sigmoid(8)";
  std::uint64_t gc_trials = 1000, gc_seed = 0;
  double gc_h = 1e-5, gc_tol = 1e-5;
  auto* gc = app.add_subcommand("grad-check", "finite-difference gradient validation");
  gc->add_option("--arch", gc_arch, "architecture")->capture_default_str();
  gc->add_option("--trials", gc_trials, "random configurations")->capture_default_str();
  gc->add_option("--step", gc_h, "central-difference step")->capture_default_str();
  gc->add_option("--tol", gc_tol, "max relative error")->capture_default_str();
  gc->add_option("--seed", gc_seed, "seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  auto env_seed = [](CLI::Option* opt, std::uint64_t& seed) {
    if (opt->count() == 0)
      if (const char* env = std::getenv("DRAUC_SEED")) seed = detail::to_uint("DRAUC_SEED", env);
  };

  try {
    if (*gen) {
      env_seed(gd_seed_opt, gd_seed);
      return detail::cmd_gen_data(gd_n, gd_dim, gd_ratio, gd_sigma, gd_seed, gd_out, out);
    }
    if (*tr) {
      tf.resolve();
      return detail::cmd_train(tf, out);
    }
    if (*ev) {
      env_seed(ev_seed_opt, ev_seed);
      return detail::cmd_eval(ev_ck, ev_data, ev_sigmas, ev_eps, ev_seed, ev_attack, ev_out, out);
    }
    if (*ao) return detail::cmd_attack_oracle(preset, out);
    if (*vf) return detail::cmd_verify(out);
    if (*gc) return detail::cmd_grad_check(gc_arch, gc_trials, gc_h, gc_tol, gc_seed, out);
  } catch (const CheckpointError& e) {
    err << "error: checkpoint field " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {  // file system and stream failures
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace drauc::cli
