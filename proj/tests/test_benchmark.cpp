#include <gtest/gtest.h>

#include <sstream>

#include "fpcpd/benchmark.hpp"
#include "fpcpd/report_json.hpp"
#include "fpcpd/shm/config.hpp"
#include "fpcpd/shm/events_io.hpp"
#include "test_util.hpp"

using namespace fpcpd;

TEST(Synthetic, SeededAndBitwiseReproducible) {
  SyntheticSpec spec{{6, 5, 4}, 2, 0.05, 9};
  const SyntheticTensor a = generate_synthetic(spec);
  const SyntheticTensor b = generate_synthetic(spec);
  EXPECT_EQ(a.tensor, b.tensor);
  spec.seed = 10;
  EXPECT_FALSE(generate_synthetic(spec).tensor == a.tensor);
}

TEST(Synthetic, TruthDiffersFromSolverInitWithSameSeed) {
  const SyntheticSpec spec{{6, 5, 4}, 2, 0.0, 3};
  const SyntheticTensor s = generate_synthetic(spec);
  const FactorModel init = random_factors(spec.dims, 2, 3);
  EXPECT_GT(rmse(s.tensor, init), 1e-3);
  EXPECT_GE(s.truth.A.minCoeff(), 0.0);
  EXPECT_LT(s.truth.A.maxCoeff(), 1.0);
}

TEST(Synthetic, NoiselessRecoveryAtTrueRank) {
  const SyntheticTensor s = generate_synthetic({{12, 11, 10}, 3, 0.0, 4});
  SolverConfig cfg;
  cfg.rank = 3;
  cfg.epochs = 50;
  cfg.init = InitMethod::Gevd;
  EXPECT_LT(rmse(s.tensor, als_fit(s.tensor, cfg).model), 1e-8);
}

TEST(Synthetic, FitReachesNoiseFloor) {
  const SyntheticTensor s = generate_synthetic({{20, 20, 20}, 3, 0.1, 5});
  SolverConfig cfg;
  cfg.rank = 3;
  cfg.epochs = 100;
  cfg.init = InitMethod::Gevd;
  EXPECT_NEAR(rmse(s.tensor, als_fit(s.tensor, cfg).model), 0.1, 0.02);
}

TEST(Benchmark, EpochsToTarget) {
  const Trace trace{{1, 0.1, 0.5, 0}, {2, 0.2, 0.2, 0}, {3, 0.3, 0.05, 0}};
  EXPECT_EQ(epochs_to_target(trace, 0.2), 2u);
  EXPECT_EQ(epochs_to_target(trace, 0.01), std::nullopt);
}

TEST(Benchmark, MedianCountsMissesAsInfinity) {
  std::vector<BenchmarkRun> runs(4);
  runs[0].epochs_to_target = 5;
  runs[1].epochs_to_target = 7;
  runs[2].epochs_to_target = std::nullopt;
  runs[3].error = "diverged";
  EXPECT_TRUE(std::isinf(median_epochs_to_target(runs, SolverKind::FpCpd)));
  runs.pop_back();
  EXPECT_EQ(median_epochs_to_target(runs, SolverKind::FpCpd), 7.0);
  EXPECT_TRUE(std::isnan(median_epochs_to_target(runs, SolverKind::Als)));
}

TEST(Benchmark, SingleEpochGivesOneRecord) {
  const DenseTensor3 t = generate_synthetic({{5, 5, 5}, 2, 0.0, 1}).tensor;
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.epochs = 1;
  const auto runs = run_benchmark(t, {SolverKind::FpCpd}, cfg, 0.01);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].trace.size(), 1u);
  EXPECT_TRUE(runs[0].ok());
}

TEST(Benchmark, SolversShareInitialFactors) {
  // PSGD without noise is plain SGD; identical traces show both started from the same factors.
  const DenseTensor3 t = generate_synthetic({{6, 6, 6}, 2, 0.01, 2}).tensor;
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.eta = 0.02;
  cfg.noise = 0.0;
  cfg.epochs = 5;
  cfg.tol = 0.0;
  const auto runs = run_benchmark(t, {SolverKind::Psgd, SolverKind::Sgd}, cfg, 0.01);
  ASSERT_EQ(runs[0].trace.size(), runs[1].trace.size());
  for (std::size_t n = 0; n < runs[0].trace.size(); ++n) EXPECT_EQ(runs[0].trace[n].loss, runs[1].trace[n].loss);
}

TEST(Benchmark, DivergenceIsRecordedNotThrown) {
  const DenseTensor3 t = generate_synthetic({{5, 5, 5}, 2, 0.0, 1}).tensor;
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.eta = 80.0;
  cfg.epochs = 30;
  const auto runs = run_benchmark(t, {SolverKind::FpCpd, SolverKind::Als}, cfg, 0.01);
  EXPECT_FALSE(runs[0].ok());
  EXPECT_NE(runs[0].error.find("diverged"), std::string::npos);
  EXPECT_TRUE(runs[1].ok());
}

TEST(Benchmark, ReadsPinnedConfig) {
  const BenchmarkSpec spec = load_benchmark_spec(FPCPD_SOURCE_DIR "/bench/standard_synthetic.cfg");
  EXPECT_EQ(spec.data.dims, (Dims{30, 30, 30}));
  EXPECT_EQ(spec.data.rank, 5u);
  EXPECT_EQ(spec.data.noise_std, 0.01);
  EXPECT_EQ(spec.seeds, 10u);
  EXPECT_EQ(spec.solvers.size(), 5u);
  EXPECT_EQ(spec.solver.rank, 5u);
  std::istringstream bad("dims = 3x3\n");
  EXPECT_THROW(read_benchmark_spec(bad), InvalidArgument);
  std::istringstream solvers("solvers = fpcpd,nope\n");
  EXPECT_THROW(read_benchmark_spec(solvers), InvalidArgument);
}

TEST(Json, SolverConfigRoundTrip) {
  SolverConfig c;
  c.rank = 3;
  c.eta = 0.0123;
  c.seed = 77;
  c.deterministic = false;
  c.init = InitMethod::Gevd;
  const json j = json::parse(to_json(c).dump());
  const SolverConfig back = solver_config_from_json(j);
  EXPECT_EQ(back.rank, 3u);
  EXPECT_EQ(back.eta, 0.0123);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_FALSE(back.deterministic);
  EXPECT_EQ(back.init, InitMethod::Gevd);
}

TEST(Json, BenchmarkSummarySchema) {
  const DenseTensor3 t = generate_synthetic({{5, 5, 5}, 2, 0.0, 1}).tensor;
  SolverConfig cfg;
  cfg.rank = 2;
  cfg.epochs = 3;
  const auto runs = run_benchmark(t, {SolverKind::FpCpd, SolverKind::Als}, cfg, 1e-9);
  const json j = json::parse(benchmark_summary_json(runs, 1e-9, {"a.csv", "b.csv"}).dump());
  EXPECT_EQ(j["schema"], "fpcpd.benchmark.v1");
  ASSERT_EQ(j["runs"].size(), 2u);
  EXPECT_EQ(j["runs"][0]["solver"], "fpcpd");
  EXPECT_EQ(j["runs"][1]["trace_csv"], "b.csv");
  EXPECT_EQ(j["runs"][0]["epochs"], 3u);
  EXPECT_TRUE(j["runs"][0]["error"].is_null());
  EXPECT_EQ(solver_config_from_json(j["runs"][0]["config"]).rank, 2u);
  EXPECT_TRUE(j["median_epochs_to_target"]["fpcpd"].is_null());
}

TEST(Json, PlanDump) {
  const BlockPlan plan = build_plan({3, 3, 3});
  const json j = json::parse(plan_json(plan).dump());
  EXPECT_EQ(j["parallelism"], 3u);
  EXPECT_EQ(j["block_count"], 9u);
  ASSERT_EQ(j["blocks"].size(), 9u);
  EXPECT_EQ(j["blocks"][0].size(), 3u);
  EXPECT_EQ(j["blocks"][0][0].size(), 3u);
  EXPECT_FALSE(plan_json(plan, false).contains("blocks"));
}

TEST(Json, PipelineReport) {
  shm::ShmSpec spec = shm::standard_shm_spec(3);
  const shm::EventSet set = shm::to_event_set(shm::generate_shm_events(spec));
  const shm::FeatureTensor ft = shm::extract_features(set.events, 128);
  shm::PipelineConfig cfg;
  cfg.kind = SolverKind::Als;
  cfg.trials = 2;
  cfg.solver.rank = 4;
  cfg.solver.epochs = 50;
  const shm::PipelineReport r = shm::evaluate_pipeline(ft.tensor, set.labels, cfg, set.damaged_sensor);
  const json j = json::parse(shm::report_json(r, cfg, ft.tensor.dims(), set.ids).dump());
  EXPECT_EQ(j["schema"], "fpcpd.pipeline.v1");
  EXPECT_EQ(j["trials"].size(), 2u);
  EXPECT_EQ(j["scored_rows"], r.decisions.size());
  EXPECT_DOUBLE_EQ(j["f_score"]["mean"].get<double>(), r.f_mean);
  EXPECT_TRUE(j["mean_decision"].contains("severe"));
  EXPECT_EQ(j["config"]["sigma"], "auto");
  EXPECT_EQ(j["tensor_dims"][0], 128u);
}
