#include <gtest/gtest.h>

#include <random>

#include "drauc/trainer.hpp"

using namespace drauc;

namespace {

TrainConfig small_config(Variant v) {
  TrainConfig cfg;
  cfg.variant = v;
  cfg.iterations = 100;
  cfg.batch_size = 32;
  cfg.eps = 0.05;
  cfg.eta_z = 0.1;
  cfg.seed = 3;
  return cfg;
}

Dataset separable_1d() {
  std::vector<double> f;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    f.push_back(i < 20 ? 0.9 : 0.1);
    y.push_back(i < 20 ? 1 : 0);
  }
  return make_dataset(1, f, y);
}

void expect_domains(const TrainState& st) {
  EXPECT_GE(st.aux.a, 0.0);
  EXPECT_LE(st.aux.a, 1.0);
  EXPECT_GE(st.aux.b, 0.0);
  EXPECT_LE(st.aux.b, 1.0);
  for (const auto& r : st.history) {
    EXPECT_GE(r.alpha, -1.0);
    EXPECT_LE(r.alpha, 1.0);
    EXPECT_GE(r.lambda_pos, 0.0);
    EXPECT_LE(r.lambda_pos, st.dual.lambda_max);
    EXPECT_GE(r.lambda_neg, 0.0);
    EXPECT_LE(r.lambda_neg, st.dual.lambda_max);
    EXPECT_TRUE(std::isfinite(r.objective));
    EXPECT_GE(r.batch_auc, 0.0);
    EXPECT_LE(r.batch_auc, 1.0);
  }
}

}  // namespace

TEST(SplitEpsilon, Examples) {
  const auto a = split_epsilon(0.5, 0.2, 1.0);
  EXPECT_EQ(a.eps_pos, 0.5);
  EXPECT_DOUBLE_EQ(a.eps_neg, 0.5);
  const auto b = split_epsilon(0.5, 0.2, 0.5);
  EXPECT_EQ(b.eps_pos, 0.25);
  EXPECT_DOUBLE_EQ(b.eps_neg, 0.5625);
  EXPECT_DOUBLE_EQ(0.2 * b.eps_pos + 0.8 * b.eps_neg, 0.5);
  const auto c = split_epsilon(0.0, 0.3, 1.5);
  EXPECT_EQ(c.eps_pos, 0.0);
  EXPECT_EQ(c.eps_neg, 0.0);
  EXPECT_THROW(split_epsilon(0.1, 0.7, 1.5), ConfigError);  // k p >= 1
  EXPECT_THROW(split_epsilon(0.1, 0.2, 2.0), ConfigError);
  EXPECT_THROW(split_epsilon(-0.1, 0.2, 1.0), ConfigError);
}

TEST(SampleBatch, ForcedPositive) {
  std::vector<double> f(50, 0.5);
  std::vector<int> y(50, 0);
  y[17] = 1;
  const auto ds = make_dataset(1, f, y);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto b = sample_batch(ds, 5, rng);
    EXPECT_NE(std::find(b.begin(), b.end(), 17u), b.end());
    std::vector<std::size_t> sorted(b);
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  }
}

TEST(SampleBatch, FullBatchAndErrors) {
  const auto ds = gen_synthetic(20, 1, 0.65, 0.35, 0.15, 0);
  std::mt19937_64 rng(2);
  auto b = sample_batch(ds, 20, rng);
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(b[i], i);
  EXPECT_THROW(sample_batch(ds, 21, rng), ConfigError);
  const auto no_pos = make_dataset(1, {0.1, 0.2}, {0, 0});
  EXPECT_THROW(sample_batch(no_pos, 1, rng), DataError);
}

TEST(SampleBatch, AlwaysContainsPositive) {
  auto ds = make_long_tailed(gen_synthetic(1000, 2, 0.65, 0.35, 0.15, 4), 0.1, 4);
  ASSERT_NEAR(ds.p_hat, 0.1, 0.01);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const auto b = sample_batch(ds, 8, rng);
    ASSERT_TRUE(std::any_of(b.begin(), b.end(), [&](std::size_t k) { return ds.labels[k] == 1; }));
  }
  std::mt19937_64 r1(9), r2(9);
  EXPECT_EQ(sample_batch(ds, 16, r1), sample_batch(ds, 16, r2));
}

TEST(Trainer, ConfigValidation) {
  const auto ds = gen_synthetic(40, 2);
  const auto m = init_model(Architecture::linear_sigmoid(), 2, 0);
  auto cfg = small_config(Variant::Df);
  cfg.batch_size = 1;
  EXPECT_THROW(train(ds, cfg, m), ConfigError);
  cfg = small_config(Variant::Df);
  cfg.eta_w = 0.0;
  EXPECT_THROW(train(ds, cfg, m), ConfigError);
  cfg = small_config(Variant::Df);
  cfg.iterations = 0;
  EXPECT_THROW(train(ds, cfg, m), ConfigError);
  cfg = small_config(Variant::Df);
  EXPECT_THROW(train(ds, cfg, init_model(Architecture::linear_sigmoid(), 3, 0)), DimensionError);
  EXPECT_THROW(train(make_dataset(1, {0.1, 0.2, 0.3}, {1, 1, 1}), cfg,
                     init_model(Architecture::linear_sigmoid(), 1, 0)),
               DataError);
}

TEST(Trainer, DomainsPreservedAndDeterministic) {
  const auto ds = make_long_tailed(gen_synthetic(400, 2, 0.65, 0.35, 0.15, 8), 0.1, 8);
  const auto m = init_model(Architecture::mlp(6), 2, 8);
  for (Variant v : {Variant::Df, Variant::Da, Variant::AucmBaseline}) {
    auto cfg = small_config(v);
    cfg.eps = 0.3;
    cfg.eta_lambda = 5.0;  // drive lambda into both projection bounds
    cfg.lambda_max = 3.0;
    const auto st = train(ds, cfg, m);
    ASSERT_EQ(st.history.size(), cfg.iterations);
    EXPECT_EQ(st.iteration, cfg.iterations);
    expect_domains(st);
    EXPECT_EQ(st, train(ds, cfg, m)) << to_string(v);
  }
}

TEST(Trainer, DaRadiiSatisfyBudgetIdentity) {
  const auto ds = make_long_tailed(gen_synthetic(400, 2, 0.65, 0.35, 0.15, 8), 0.2, 8);
  auto cfg = small_config(Variant::Da);
  cfg.eps = 0.4;
  cfg.k_split = 0.8;
  cfg.iterations = 5;
  const auto st = train(ds, cfg, init_model(Architecture::linear_sigmoid(), 2, 0));
  EXPECT_NEAR(ds.p_hat * st.dual.eps_pos + (1 - ds.p_hat) * st.dual.eps_neg, 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(st.dual.eps_pos, 0.32);
}

TEST(Trainer, AblationEquivalence) {
  const auto ds = make_long_tailed(gen_synthetic(300, 2, 0.65, 0.35, 0.15, 1), 0.2, 1);
  const auto m = init_model(Architecture::mlp(4), 2, 1);
  auto cfg = small_config(Variant::AucmBaseline);
  cfg.eps = 0.0;
  cfg.eta_z = 0.0;
  const auto base = train_aucm_baseline(ds, cfg, m);
  const auto df = train_df(ds, cfg, m);
  const auto da = train_da(ds, cfg, m);
  EXPECT_EQ(df.history, base.history);
  EXPECT_EQ(da.history, base.history);
  EXPECT_EQ(df.model, base.model);
  EXPECT_EQ(da.model, base.model);
  EXPECT_EQ(df.aux, base.aux);
  EXPECT_EQ(da.aux, base.aux);
}

TEST(Trainer, LambdaMovesTowardBudget) {
  // Tiny budget: the attack overspends, so lambda must rise. Huge budget: lambda falls.
  const auto ds = gen_synthetic(200, 2, 0.65, 0.35, 0.15, 2);
  const auto m = init_model(Architecture::linear_sigmoid(), 2, 2);
  auto cfg = small_config(Variant::Df);
  cfg.iterations = 1;
  cfg.eta_z = 0.5;
  cfg.lambda0 = 0.0;
  cfg.eps = 1e-9;
  EXPECT_GT(train_df(ds, cfg, m).dual.lambda_pos, 0.0);
  cfg.lambda0 = 5.0;
  cfg.eps = 10.0;
  EXPECT_LT(train_df(ds, cfg, m).dual.lambda_pos, 5.0);
  cfg.variant = Variant::Da;
  cfg.lambda0 = 0.0;
  cfg.eps = 1e-9;
  const auto da = train_da(ds, cfg, m);
  EXPECT_GT(da.dual.lambda_pos, 0.0);
  EXPECT_GT(da.dual.lambda_neg, 0.0);
}

TEST(Trainer, AllVariantsRankSeparableDataPerfectly) {
  const auto ds = separable_1d();
  for (Variant v : {Variant::AucmBaseline, Variant::Df, Variant::Da}) {
    auto cfg = small_config(v);
    cfg.iterations = 200;
    cfg.batch_size = 8;
    cfg.eps = 0.01;
    cfg.eta_z = 0.05;
    const auto st = train(ds, cfg, init_model(Architecture::linear_sigmoid(), 1, 0));
    EXPECT_EQ(dataset_auc(st.model, ds), 1.0) << to_string(v);
  }
}

TEST(Trainer, StepDecayChangesLateUpdatesOnly) {
  const auto ds = gen_synthetic(200, 2, 0.65, 0.35, 0.15, 6);
  const auto m = init_model(Architecture::linear_sigmoid(), 2, 6);
  auto cfg = small_config(Variant::AucmBaseline);
  cfg.iterations = 40;
  const auto plain = train(ds, cfg, m);
  cfg.step_decay = true;
  const auto decayed = train(ds, cfg, m);
  for (std::size_t t = 0; t <= 20; ++t) EXPECT_EQ(plain.history[t], decayed.history[t]);
  EXPECT_NE(plain.model, decayed.model);
}
