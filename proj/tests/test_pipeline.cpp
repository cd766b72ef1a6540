#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpcpd/shm/config.hpp"
#include "fpcpd/shm/events_io.hpp"
#include "fpcpd/shm/features.hpp"
#include "fpcpd/shm/pipeline.hpp"
#include "fpcpd/synthetic.hpp"
#include "test_util.hpp"

using namespace fpcpd;
using namespace fpcpd::shm;
namespace fs = std::filesystem;

namespace {

PipelineConfig fast_config(std::size_t trials = 3) {
  PipelineConfig cfg;
  cfg.kind = SolverKind::Als;
  cfg.trials = trials;
  cfg.solver.rank = 4;
  cfg.solver.epochs = 100;
  cfg.solver.tol = 1e-7;
  return cfg;
}

struct Prepared {
  ShmEvents events;
  FeatureTensor features;
};

Prepared prepare(const ShmSpec& spec) {
  Prepared p{generate_shm_events(spec), {}};
  p.features = extract_features(p.events.events, 128);
  return p;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fpcpd_test_" + name + "_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Projection, RecoversTemporalRowsAndLocations) {
  std::mt19937_64 rng(1);
  const FactorModel truth = fpcpd::testing::random_model({10, 6, 5}, 3, rng);
  const DenseTensor3 t = reconstruct(truth);
  const Matrix C = project_events(t, truth.A, truth.B);
  EXPECT_LE((C - truth.C).cwiseAbs().maxCoeff(), 1e-10);
  for (std::size_t e = 0; e < 5; ++e) {
    const Matrix B = event_location(t, e, truth.A, truth.C.row(static_cast<Eigen::Index>(e)));
    EXPECT_LE((B - truth.B).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pipeline, DetectsLocalizesAndGradesSyntheticDamage) {
  const Prepared p = prepare(standard_shm_spec(1));
  const PipelineReport r = evaluate_pipeline(p.features.tensor, p.events.labels, fast_config(), p.events.damaged_sensor);
  EXPECT_GE(r.f_mean, 0.9);
  ASSERT_TRUE(r.localization_accuracy.has_value());
  EXPECT_GE(*r.localization_accuracy, 0.9);
  EXPECT_LT(r.mean_decision.at("severe"), r.mean_decision.at("mild"));
  EXPECT_LT(r.mean_decision.at("mild"), r.mean_decision.at("healthy"));
}

TEST(Pipeline, ScoresEveryTestEventOncePerTrial) {
  const Prepared p = prepare(standard_shm_spec(2));
  const PipelineReport r = evaluate_pipeline(p.features.tensor, p.events.labels, fast_config(2));
  // 60 healthy -> 48 train / 12 test, plus 40 damage events, per trial.
  ASSERT_EQ(r.decisions.size(), 2u * (12 + 40));
  for (const auto& tr : r.trials) {
    EXPECT_EQ(tr.train_events, 48u);
    EXPECT_EQ(tr.tp + tr.fn, 40u);
    EXPECT_EQ(tr.fp + tr.tn, 12u);
  }
  EXPECT_FALSE(r.localization_accuracy.has_value());
}

TEST(Pipeline, NullDamageIsNotDetected) {
  ShmSpec spec = standard_shm_spec(3);
  for (auto& a : spec.anomalies) a.magnitude = 0.0;
  const Prepared p = prepare(spec);
  const PipelineReport r = evaluate_pipeline(p.features.tensor, p.events.labels, fast_config());
  EXPECT_LT(r.f_mean, 0.5);
}

TEST(Pipeline, DeterministicUnderFixedSeeds) {
  const Prepared p = prepare(standard_shm_spec(4));
  PipelineConfig cfg = fast_config(2);
  cfg.kind = SolverKind::FpCpd;
  cfg.solver.eta = 0.1;
  cfg.solver.epochs = 20;
  const PipelineReport a = evaluate_pipeline(p.features.tensor, p.events.labels, cfg);
  const PipelineReport b = evaluate_pipeline(p.features.tensor, p.events.labels, cfg);
  ASSERT_EQ(a.decisions.size(), b.decisions.size());
  for (std::size_t n = 0; n < a.decisions.size(); ++n) {
    EXPECT_EQ(a.decisions[n].event, b.decisions[n].event);
    EXPECT_EQ(a.decisions[n].decision, b.decisions[n].decision);
    EXPECT_EQ(a.decisions[n].localization, b.decisions[n].localization);
  }
}

TEST(Pipeline, RejectsMissingClasses) {
  const Prepared p = prepare(standard_shm_spec(5));
  std::vector<std::string> healthy(p.events.labels.size(), "healthy");
  EXPECT_THROW(evaluate_pipeline(p.features.tensor, healthy, fast_config()), InvalidArgument);
  std::vector<std::string> short_labels(p.events.labels.begin(), p.events.labels.end() - 1);
  EXPECT_THROW(evaluate_pipeline(p.features.tensor, short_labels, fast_config()), InvalidArgument);
  std::vector<std::string> no_healthy(p.events.labels.size(), "damage");
  EXPECT_THROW(evaluate_pipeline(p.features.tensor, no_healthy, fast_config()), InvalidArgument);
}

TEST(ShmEvents, SeededAndLabelled) {
  const ShmSpec spec = standard_shm_spec(6);
  const ShmEvents a = generate_shm_events(spec);
  const ShmEvents b = generate_shm_events(spec);
  ASSERT_EQ(a.events.event_count(), 100u);
  for (std::size_t e = 0; e < 100; ++e) EXPECT_EQ(a.events.events[e], b.events.events[e]);
  EXPECT_EQ(a.labels[0], "healthy");
  EXPECT_EQ(a.labels[60], "mild");
  EXPECT_EQ(a.labels[99], "severe");
  EXPECT_EQ(a.damaged_sensor[70], 3u);
  EXPECT_EQ(a.damaged_sensor[90], 8u);
  EXPECT_FALSE(a.damaged_sensor[10].has_value());

  ShmSpec bad = spec;
  bad.anomalies.push_back({"late", 95, 10, 0, 1.0});
  EXPECT_THROW(generate_shm_events(bad), InvalidArgument);
  bad = spec;
  bad.anomalies[0].sensor = 12;
  EXPECT_THROW(generate_shm_events(bad), InvalidArgument);
}

TEST(Manifest, ParsesOptionalSensorColumn) {
  std::istringstream is("event_id,label,sample_rate,damaged_sensor\ne1,healthy,100,\ne2,mild,100,4\n\n");
  const auto rows = read_manifest(is);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].damaged_sensor.has_value());
  EXPECT_EQ(rows[1].damaged_sensor, 4u);
  std::istringstream three("event_id,label,sample_rate\na,healthy,50\n");
  EXPECT_EQ(read_manifest(three).front().sample_rate, 50.0);
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    std::istringstream is(text);
    try {
      read_manifest(is, "m.csv");
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("id,label,rate\n").find("m.csv line 1"), std::string::npos);
  EXPECT_NE(message("event_id,label,sample_rate\na,healthy,100\nb,healthy,fast\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("event_id,label,sample_rate\na,healthy,100\na,mild,100\n").find("duplicate"), std::string::npos);
  EXPECT_NE(message("event_id,label,sample_rate\na,,100\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("event_id,label,sample_rate\n").find("no events"), std::string::npos);
  EXPECT_NE(message("event_id,label,sample_rate\n../x,healthy,100\n").find("path"), std::string::npos);
}

TEST(EventFiles, RoundTripThroughDirectory) {
  ShmSpec spec = standard_shm_spec(7);
  spec.events = 12;
  spec.samples = 64;
  spec.anomalies = {{"mild", 8, 4, 2, 1.0}};
  const EventSet set = to_event_set(generate_shm_events(spec));
  const fs::path dir = scratch_dir("events");
  save_events(dir, set);
  const EventSet back = load_events(dir, dir / "manifest.csv");
  EXPECT_EQ(back.ids, set.ids);
  EXPECT_EQ(back.labels, set.labels);
  EXPECT_EQ(back.damaged_sensor, set.damaged_sensor);
  EXPECT_EQ(back.events.sample_rate, set.events.sample_rate);
  for (std::size_t e = 0; e < set.ids.size(); ++e) EXPECT_EQ(back.events.events[e], set.events.events[e]);
  fs::remove_all(dir);
}

TEST(EventFiles, RejectsInconsistentInput) {
  const fs::path dir = scratch_dir("bad_events");
  std::ofstream(dir / "a.csv") << "s0,s1\n1,2\n3,4\n";
  std::ofstream(dir / "b.csv") << "1,2\n3\n";
  std::ofstream(dir / "manifest.csv") << "event_id,label,sample_rate\na,healthy,10\nb,mild,10\n";
  EXPECT_THROW(load_events(dir, dir / "manifest.csv"), Error);
  std::ofstream(dir / "b.csv") << "1,2\n3,4\n";
  std::ofstream(dir / "manifest.csv") << "event_id,label,sample_rate\na,healthy,10\nb,mild,20\n";
  EXPECT_THROW(load_events(dir, dir / "manifest.csv"), Error);
  std::ofstream(dir / "manifest.csv") << "event_id,label,sample_rate\na,healthy,10\nc,mild,10\n";
  EXPECT_THROW(load_events(dir, dir / "manifest.csv"), Error);
  std::ofstream(dir / "manifest.csv") << "event_id,label,sample_rate,damaged_sensor\na,healthy,10\nb,mild,10,2\n";
  EXPECT_THROW(load_events(dir, dir / "manifest.csv"), Error);
  fs::remove_all(dir);
}

TEST(ReportTables, OneDecisionRowPerScoredEvent) {
  const Prepared p = prepare(standard_shm_spec(8));
  const EventSet set = to_event_set(p.events);
  const PipelineReport r = evaluate_pipeline(p.features.tensor, set.labels, fast_config(1));
  std::ostringstream dec, loc;
  write_decisions_csv(dec, r, set.ids, set.labels);
  write_localization_csv(loc, r, set.ids, set.labels);
  std::istringstream d(dec.str()), l(loc.str());
  std::string line;
  std::getline(d, line);
  EXPECT_EQ(line, kDecisionHeader);
  std::size_t rows = 0;
  while (std::getline(d, line)) ++rows;
  EXPECT_EQ(rows, r.decisions.size());
  std::getline(l, line);
  EXPECT_EQ(line, kLocalizationHeader);
  rows = 0;
  while (std::getline(l, line)) ++rows;
  EXPECT_EQ(rows, r.decisions.size() * 12);
}

TEST(ShmConfig, ReadsPinnedBenchmarkFile) {
  const ShmBenchmarkSpec spec = load_shm_benchmark_spec(FPCPD_SOURCE_DIR "/bench/shm_synthetic.cfg");
  EXPECT_EQ(spec.events.sensors, 12u);
  EXPECT_EQ(spec.events.events, 100u);
  ASSERT_EQ(spec.events.anomalies.size(), 2u);
  EXPECT_EQ(spec.keep_bins, 128u);
  EXPECT_EQ(spec.pipeline.kind, SolverKind::FpCpd);
  EXPECT_EQ(spec.pipeline.trials, 10u);
  EXPECT_FALSE(spec.pipeline.sigma.has_value());
  EXPECT_EQ(spec.pipeline.solver.rank, 4u);
}

TEST(ShmConfig, AnomalyLinesAndErrors) {
  std::istringstream is("anomaly.crack = 5 3 1 0.5\nsigma = 0.7\nsolver = als\nsignal_noise = 0.1\n");
  const ShmBenchmarkSpec spec = read_shm_benchmark_spec(is);
  ASSERT_EQ(spec.events.anomalies.size(), 1u);
  EXPECT_EQ(spec.events.anomalies[0].label, "crack");
  EXPECT_EQ(spec.events.anomalies[0].sensor, 1u);
  EXPECT_EQ(spec.pipeline.sigma, 0.7);
  EXPECT_EQ(spec.pipeline.kind, SolverKind::Als);
  EXPECT_EQ(spec.events.noise_std, 0.1);
  std::istringstream bad("anomaly.crack = 5 3\n");
  EXPECT_THROW(read_shm_benchmark_spec(bad), InvalidArgument);
  std::istringstream unknown("sensorz = 3\n");
  EXPECT_THROW(read_shm_benchmark_spec(unknown), InvalidArgument);
  std::istringstream solver("solver = magic\n");
  EXPECT_THROW(read_shm_benchmark_spec(solver), InvalidArgument);
}
