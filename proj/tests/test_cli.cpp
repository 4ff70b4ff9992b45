#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drauc/checkpoint.hpp"
#include "drauc/cli.hpp"
#include "drauc/report.hpp"

using namespace drauc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "drauc_test_cli";
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "drauc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_command(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Checkpoint sample_checkpoint() {
  const auto ds = make_long_tailed(gen_synthetic(200, 2, 0.65, 0.35, 0.15, 3), 0.2, 3);
  TrainConfig cfg;
  cfg.variant = Variant::Da;
  cfg.iterations = 10;
  cfg.batch_size = 16;
  cfg.eps = 0.3;
  cfg.k_split = 0.8;
  cfg.seed = 3;
  const auto st = train(ds, cfg, init_model(Architecture::mlp(3), 2, 3));
  return make_checkpoint(st, cfg, ds.scaler);
}

std::string replace_line(const std::string& text, const std::string& key, const std::string& line) {
  std::istringstream in(text);
  std::string out, l;
  while (std::getline(in, l)) out += (l.rfind(key + "=", 0) == 0 ? line : l) + "\n";
  return out;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitwise) {
  const auto ck = sample_checkpoint();
  EXPECT_EQ(checkpoint_from_string(checkpoint_to_string(ck)), ck);
  const auto path = (temp_dir() / "rt.ckpt").string();
  save_checkpoint(ck, path);
  EXPECT_EQ(load_checkpoint(path), ck);
  EXPECT_EQ(checkpoint_to_string(load_checkpoint(path)), checkpoint_to_string(ck));
}

TEST(Checkpoint, VersionMismatch) {
  const auto text = replace_line(checkpoint_to_string(sample_checkpoint()), "format_version",
                                 "format_version=0");
  try {
    checkpoint_from_string(text);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.field(), "format_version");
  }
}

TEST(Checkpoint, TamperedThetaLengthNamesTheField) {
  const auto ck = sample_checkpoint();
  const auto text = checkpoint_to_string(ck);
  // Drop the last theta element.
  std::string theta = "theta=" + drauc::detail::join_doubles(
                                     std::span<const double>(ck.model.params).first(ck.model.params.size() - 1));
  try {
    checkpoint_from_string(replace_line(text, "theta", theta));
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.field(), "theta");
  }
  // Consistent theta_size but wrong for the architecture.
  auto t2 = replace_line(replace_line(text, "theta", theta), "theta_size",
                         "theta_size=" + std::to_string(ck.model.params.size() - 1));
  try {
    checkpoint_from_string(t2);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.field(), "theta");
  }
}

TEST(Checkpoint, StructuralErrors) {
  const auto text = checkpoint_to_string(sample_checkpoint());
  auto field_of = [](const std::string& t) {
    try {
      checkpoint_from_string(t);
    } catch (const CheckpointError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(text + "bogus=1\n"), "bogus");
  EXPECT_EQ(field_of(text + "a=0.5\n"), "a");                      // duplicate
  EXPECT_EQ(field_of(replace_line(text, "alpha", "")), "alpha");    // missing
  EXPECT_EQ(field_of(replace_line(text, "b", "b=zz")), "b");
  EXPECT_EQ(field_of(replace_line(text, "arch", "arch=resnet")), "arch");
  EXPECT_EQ(field_of(replace_line(text, "cfg.variant", "cfg.variant=x")), "cfg.variant");
  EXPECT_THROW(checkpoint_from_string("no equals sign\n"), ParseError);
}

TEST(Report, RoundTripsThroughMetricParser) {
  RunReport r;
  r.config = config_entries(TrainConfig{});
  r.history = {{0.5, 1.0, 1.0, 0.1, 0.75}};
  r.nominal_auc = 0.9;
  r.corrupted_auc = {{0.2, 0.8}};
  r.robust_auc = {{0.0, 0.9}, {0.1, 0.7}};
  r.wall_clock_seconds = 1.5;
  const auto m = parse_metrics(report_to_string(r));
  EXPECT_EQ(m.at("config.variant"), "df");
  EXPECT_EQ(m.at("history.0"), "0.5,1,1,0.10000000000000001,0.75");
  EXPECT_EQ(m.at("nominal_auc"), "0.90000000000000002");
  EXPECT_EQ(m.at("corrupted_auc[0.2]"), "0.80000000000000004");
  EXPECT_EQ(m.count("robust_auc[0]"), 1u);
  EXPECT_THROW(parse_metrics("a=1\na=2\n"), ParseError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"--bogus"}).code, 2);
  EXPECT_EQ(run({"train", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"eval", "--checkpoint", "/nonexistent/x", "--data", "/nonexistent/y"}).code, 2);
  EXPECT_EQ(run({"train", "--variant", "zz", "--iters-T", "2", "--out",
                 (temp_dir() / "bad.ckpt").string()})
                .code,
            1);
  EXPECT_EQ(run({"train", "--batch", "1", "--iters-T", "2", "--out",
                 (temp_dir() / "bad.ckpt").string()})
                .code,
            1);
  EXPECT_EQ(run({"attack-oracle", "--preset", "nope"}).code, 2);
  const auto r = run({"grad-check", "--step", "-1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, VersionMismatchIsUsageError) {
  const auto dir = temp_dir();
  const auto ck = (dir / "v0.ckpt").string();
  const auto csv = (dir / "v0.csv").string();
  std::ofstream(ck) << replace_line(checkpoint_to_string(sample_checkpoint()), "format_version",
                                    "format_version=0");
  ASSERT_EQ(run({"gen-data", "--n", "50", "--out", csv}).code, 0);
  const auto r = run({"eval", "--checkpoint", ck, "--data", csv});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("format_version"), std::string::npos);
}

TEST(Cli, TrainTwiceGivesIdenticalCheckpoints) {
  const auto dir = temp_dir();
  const auto a = (dir / "a.ckpt").string(), b = (dir / "b.ckpt").string();
  const std::vector<std::string> common{"train", "--variant", "da",     "--eps",     "0.5",
                                        "--k",   "1.0",       "--ratio", "0.1",      "--seed",
                                        "7",     "--iters-T", "60",      "--n",      "600"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out", a});
  args_b.insert(args_b.end(), {"--out", b});
  const auto ra = run(args_a);
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(run(args_b).code, 0);
  EXPECT_EQ(read_text_file(a), read_text_file(b));
  const auto ck = load_checkpoint(a);
  EXPECT_EQ(ck.cfg.variant, Variant::Da);
  EXPECT_EQ(ck.cfg.seed, 7u);
  EXPECT_EQ(ck.iteration, 60u);

  const auto rep = parse_metrics(read_text_file(a + ".report"));
  EXPECT_EQ(rep.at("config.variant"), "da");
  EXPECT_EQ(rep.at("config.eps"), "0.5");
  EXPECT_EQ(rep.count("history.59"), 1u);
  EXPECT_EQ(rep.count("history.60"), 0u);
  for (const auto& [k, v] : rep) {
    if (k.find("auc") == std::string::npos) continue;
    const double x = std::stod(v);
    EXPECT_GE(x, 0.0) << k;
    EXPECT_LE(x, 1.0) << k;
  }
}

TEST(Cli, ConfigFilePrecedence) {
  const auto dir = temp_dir();
  const auto cfg = (dir / "run.cfg").string();
  std::ofstream(cfg) << "# comment\nvariant = aucm\neps=0.25\niters-T=5\nseed=11\nbatch=32\n";
  const auto out = (dir / "cfg.ckpt").string();
  ASSERT_EQ(run({"train", "--config", cfg, "--eps", "0.3", "--n", "200", "--out", out}).code, 0);
  const auto ck = load_checkpoint(out);
  EXPECT_EQ(ck.cfg.variant, Variant::AucmBaseline);  // file
  EXPECT_EQ(ck.cfg.eps, 0.3);                         // flag beats file
  EXPECT_EQ(ck.cfg.iterations, 5u);
  EXPECT_EQ(ck.cfg.seed, 11u);
  EXPECT_EQ(ck.cfg.batch_size, 32u);
  EXPECT_EQ(ck.cfg.eta_w, 0.1);                       // default

  std::ofstream(cfg) << "nonsense=1\n";
  EXPECT_EQ(run({"train", "--config", cfg, "--out", out}).code, 1);
  EXPECT_EQ(run({"train", "--config", (dir / "missing.cfg").string(), "--out", out}).code, 2);
}

TEST(Cli, SeedFallsBackToEnvironment) {
  const auto out = (temp_dir() / "env.ckpt").string();
  setenv("DRAUC_SEED", "42", 1);
  ASSERT_EQ(run({"train", "--iters-T", "3", "--n", "100", "--batch", "32", "--out", out}).code, 0);
  EXPECT_EQ(load_checkpoint(out).cfg.seed, 42u);
  ASSERT_EQ(run({"train", "--iters-T", "3", "--n", "100", "--batch", "32", "--seed", "5", "--out", out}).code, 0);
  EXPECT_EQ(load_checkpoint(out).cfg.seed, 5u);
  unsetenv("DRAUC_SEED");
}

TEST(Cli, GenTrainEvalPipeline) {
  const auto dir = temp_dir();
  const auto csv = (dir / "pipe.csv").string(), ck = (dir / "pipe.ckpt").string();
  ASSERT_EQ(run({"gen-data", "--n", "400", "--ratio", "0.2", "--seed", "3", "--out", csv}).code, 0);
  ASSERT_EQ(run({"train", "--data", csv, "--iters-T", "1000", "--batch", "32", "--seed", "3", "--out",
                 ck})
                .code,
            0);
  const auto r = run({"eval", "--checkpoint", ck, "--data", csv, "--out", (dir / "eval.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = parse_metrics(r.out);
  const double nominal = std::stod(m.at("nominal_auc"));
  EXPECT_GT(nominal, 0.8);
  EXPECT_EQ(std::stod(m.at("robust_auc[0]")), nominal);
  EXPECT_LE(std::stod(m.at("robust_auc[0.2]")), nominal);
  // Evaluation of the training file must reproduce the training report's nominal AUC.
  EXPECT_EQ(parse_metrics(read_text_file(ck + ".report")).at("nominal_auc"), m.at("nominal_auc"));
}

TEST(Cli, AttackOracleExampleOne) {
  const auto r = run({"attack-oracle", "--preset", "example1"});
  ASSERT_EQ(r.code, 0);
  const auto m = parse_metrics(r.out);
  EXPECT_NEAR(std::stod(m.at("target")), 0.0198, 1e-15);
  EXPECT_NEAR(std::stod(m.at("cost")), 0.009508, 1e-6);
  EXPECT_EQ(std::stod(m.at("strict_auc_after")), 0.0);
  EXPECT_NE(m.at("note").find("0.009702"), std::string::npos);
  const auto tiny = run({"attack-oracle", "--preset", "tiny"});
  EXPECT_EQ(tiny.code, 0);
  EXPECT_NE(tiny.out.find("weak_duality=ok"), std::string::npos);
}

TEST(Cli, VerifyAndGradCheck) {
  const auto v = run({"verify"});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_EQ(v.out.find("FAIL"), std::string::npos) << v.out;
  const auto g = run({"grad-check", "--arch", "mlp1-tanh-sigmoid(8)", "--trials", "1000"});
  EXPECT_EQ(g.code, 0) << g.out;
  EXPECT_NE(g.out.find("passed=1"), std::string::npos);
}

TEST(Cli, BinaryRuns) {
  // The installed executable, not just the in-process entry point.
  EXPECT_EQ(std::system((std::string(DRAUC_CLI_PATH) + " attack-oracle > /dev/null").c_str()), 0);
  const int rc = std::system((std::string(DRAUC_CLI_PATH) + " --bogus > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(rc), 2);
}
