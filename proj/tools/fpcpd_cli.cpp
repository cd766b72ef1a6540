// fpcpd command-line tool: data generation, benchmarking, SHM pipeline,
// CORCONDIA and block-plan inspection.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpcpd/fpcpd.hpp"
#include "fpcpd/report_json.hpp"

namespace fs = std::filesystem;
using namespace fpcpd;

namespace {

const std::vector<std::string> kSolverKeys = {"rank",  "eta",     "eta_decay", "gamma",         "noise",
                                              "beta",  "epochs",  "tol",       "seed",          "threads",
                                              "deterministic", "nag_lookahead", "batch_fraction", "init"};

/// Flag values given on the command line, keyed by config key.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    options[key] = app->add_option(flag, values[key], help);
  }

  /// Applies the flags that were given, in key order.
  void apply(const std::function<void(const std::string&, const std::string&)>& set) const {
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) set(key, values.at(key));
  }
};

void add_solver_flags(CLI::App* app, FlagSet& flags) {
  for (const auto& k : kSolverKeys) flags.add(app, k, "solver config key '" + k + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("error writing " + path.string());
}

void emit_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-") std::cout << j.dump(2) << '\n';
  else write_text(out, j.dump(2) + "\n");
}

// ---- gen -----------------------------------------------------------------

struct GenArgs {
  FlagSet flags;
  std::string config, out;
};

void run_gen(GenArgs& a) {
  BenchmarkSpec spec;
  spec.data.seed = 1;
  if (!a.config.empty()) spec = load_benchmark_spec(a.config, spec);
  a.flags.apply([&](const std::string& k, const std::string& v) { set_benchmark_value(spec, k, v); });
  spec.data.validate();
  const SyntheticTensor s = generate_synthetic(spec.data);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  if (fs::path(a.out).extension() == ".csv") {
    std::ofstream os(a.out);
    if (!os) throw Error("cannot write " + a.out);
    write_tensor_csv(os, s.tensor);
  } else {
    save_tensor(a.out, s.tensor);
  }
  std::cout << json{{"tensor", a.out},
                    {"dims", dims_json(spec.data.dims)},
                    {"true_rank", spec.data.rank},
                    {"data_noise", spec.data.noise_std},
                    {"data_seed", spec.data.seed}}
                   .dump()
            << '\n';
}

// ---- gen-shm ---------------------------------------------------------------

struct GenShmArgs {
  FlagSet flags;
  std::string config, out;
};

void run_gen_shm(GenShmArgs& a) {
  shm::ShmBenchmarkSpec spec;
  if (!a.config.empty()) spec = shm::load_shm_benchmark_spec(a.config, spec);
  a.flags.apply([&](const std::string& k, const std::string& v) {
    if (!shm::set_shm_spec_value(spec.events, k, v)) throw Error("unexpected key " + k);
  });
  spec.events.validate();
  const shm::EventSet set = shm::to_event_set(shm::generate_shm_events(spec.events));
  shm::save_events(a.out, set);
  std::cout << json{{"events_dir", a.out},
                    {"manifest", (fs::path(a.out) / "manifest.csv").string()},
                    {"events", set.ids.size()},
                    {"sensors", set.events.sensors()},
                    {"samples", set.events.samples()},
                    {"sample_rate", set.events.sample_rate}}
                   .dump()
            << '\n';
}

// ---- bench -------------------------------------------------------------------

struct BenchArgs {
  FlagSet flags;
  std::string config, tensor, out;
};

void run_bench(BenchArgs& a) {
  BenchmarkSpec spec;
  if (!a.config.empty()) spec = load_benchmark_spec(a.config, spec);
  a.flags.apply([&](const std::string& k, const std::string& v) { set_benchmark_value(spec, k, v); });
  spec.validate();

  std::vector<BenchmarkRun> runs;
  json dataset;
  if (!a.tensor.empty()) {
    const DenseTensor3 t = load_tensor_any(a.tensor);
    runs = run_benchmark(t, spec.solvers, spec.solver, spec.target_rmse);
    dataset = {{"tensor", a.tensor}, {"dims", dims_json(t.dims())}};
  } else {
    runs = run_benchmark_suite(spec);
    dataset = dataset_json(spec);
  }

  fs::create_directories(a.out);
  std::vector<std::string> files;
  for (const auto& r : runs) {
    const std::string name = std::string("trace_") + to_string(r.solver) + "_seed" + std::to_string(r.data_seed) + ".csv";
    std::ostringstream os;
    write_trace_csv(os, r.trace);
    write_text(fs::path(a.out) / name, os.str());
    files.push_back(name);
  }
  const json summary = benchmark_summary_json(runs, spec.target_rmse, files, dataset);
  write_text(fs::path(a.out) / "summary.json", summary.dump(2) + "\n");

  std::cout << "solver  median_epochs_to_target(" << spec.target_rmse << ")  failures\n";
  for (const auto& [name, med] : summary["median_epochs_to_target"].items()) {
    std::size_t failed = 0;
    for (const auto& r : runs)
      if (name == to_string(r.solver) && !r.ok()) ++failed;
    std::cout << name << "  " << (med.is_null() ? std::string("not reached") : med.dump()) << "  " << failed << '\n';
  }
  std::cout << "wrote " << (fs::path(a.out) / "summary.json").string() << '\n';
}

// ---- pipeline ----------------------------------------------------------------

struct PipelineArgs {
  FlagSet flags;
  std::string config, events, manifest, out;
  bool synthetic = false;
};

void run_pipeline(PipelineArgs& a) {
  shm::ShmBenchmarkSpec spec;
  if (!a.config.empty()) spec = shm::load_shm_benchmark_spec(a.config, spec);
  a.flags.apply([&](const std::string& k, const std::string& v) {
    if (k == "keep_bins") spec.keep_bins = detail::parse_number<std::size_t>(k, v);
    else if (!shm::set_pipeline_value(spec.pipeline, k, v)) set_config_value(spec.pipeline.solver, k, v);
  });
  spec.validate();

  shm::EventSet set;
  if (a.synthetic) {
    set = shm::to_event_set(shm::generate_shm_events(spec.events));
  } else {
    if (a.events.empty()) throw Error("pipeline needs --events DIR or --synthetic");
    const fs::path manifest = a.manifest.empty() ? fs::path(a.events) / "manifest.csv" : fs::path(a.manifest);
    set = shm::load_events(a.events, manifest);
  }
  const shm::FeatureTensor ft = shm::extract_features(set.events, spec.keep_bins, spec.pipeline.solver.threads);
  const shm::PipelineReport report = shm::evaluate_pipeline(ft.tensor, set.labels, spec.pipeline, set.damaged_sensor);

  fs::create_directories(a.out);
  std::ostringstream dec, loc;
  shm::write_decisions_csv(dec, report, set.ids, set.labels);
  shm::write_localization_csv(loc, report, set.ids, set.labels);
  write_text(fs::path(a.out) / "decisions.csv", dec.str());
  write_text(fs::path(a.out) / "localization.csv", loc.str());
  json j = shm::report_json(report, spec.pipeline, ft.tensor.dims(), set.ids, ft.degenerate);
  j["keep_bins"] = spec.keep_bins;
  j["decisions_csv"] = "decisions.csv";
  j["localization_csv"] = "localization.csv";
  write_text(fs::path(a.out) / "report.json", j.dump(2) + "\n");

  std::cout << "F-score " << report.f_mean << " +- " << report.f_std << " over " << report.trials.size() << " trials\n";
  for (const auto& [label, v] : report.mean_decision) std::cout << "mean decision " << label << " " << v << '\n';
  if (report.localization_accuracy) std::cout << "localization accuracy " << *report.localization_accuracy << '\n';
  if (!ft.degenerate.empty()) std::cout << ft.degenerate.size() << " constant signals set to zero\n";
  std::cout << "wrote " << (fs::path(a.out) / "report.json").string() << '\n';
}

// ---- corcondia ---------------------------------------------------------------

struct CorcondiaArgs {
  FlagSet flags;
  std::string config, tensor, out, solver = "als";
  std::size_t max_rank = 5;
  double threshold = 80.0;
};

void run_corcondia(CorcondiaArgs& a) {
  SolverConfig cfg;
  if (!a.config.empty()) cfg = load_config(a.config, cfg);
  a.flags.apply([&](const std::string& k, const std::string& v) { set_config_value(cfg, k, v); });
  const SolverKind kind = parse_solver(a.solver);
  if (a.max_rank < 1) throw Error("--max-rank must be >= 1");
  const DenseTensor3 t = load_tensor_any(a.tensor);

  json results = json::array();
  std::size_t suggested = 0;
  for (std::size_t r = 1; r <= a.max_rank; ++r) {
    SolverConfig c = cfg;
    c.rank = r;
    const FitResult fitted = fit(kind, t, c);
    const CorcondiaResult cc = corcondia(t, fitted.model);
    results.push_back({{"rank", r}, {"value", cc.value}, {"damped", cc.damped}, {"rmse", rmse(t, fitted.model)}});
    if (cc.value >= a.threshold && suggested == r - 1) suggested = r;
  }
  emit_json({{"schema", "fpcpd.corcondia.v1"},
             {"tensor", a.tensor},
             {"dims", dims_json(t.dims())},
             {"solver", to_string(kind)},
             {"threshold", a.threshold},
             {"results", std::move(results)},
             {"suggested_rank", suggested == 0 ? json(nullptr) : json(suggested)}},
            a.out);
}

// ---- plan-dump ---------------------------------------------------------------

struct PlanArgs {
  std::string dims, tensor, out;
  bool summary = false;
};

void run_plan_dump(PlanArgs& a) {
  if (a.dims.empty() == a.tensor.empty()) throw Error("plan-dump needs exactly one of --dims or --tensor");
  const Dims d = a.dims.empty() ? load_tensor_any(a.tensor).dims() : parse_dims(a.dims);
  const BlockPlan plan = build_plan(d);
  verify_plan(plan, d);
  emit_json(plan_json(plan, !a.summary), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpcpd: block-parallel CP decomposition and vibration-based damage detection"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a synthetic low-rank tensor");
  g->add_option("--config", gen.config, "benchmark config file (dataset keys)");
  g->add_option("--out,-o", gen.out, "output tensor (.fpt3, or .csv)")->required();
  for (const char* k : {"dims", "true_rank", "data_noise", "data_seed"}) gen.flags.add(g, k, "dataset key");

  GenShmArgs gshm;
  auto* gs = app.add_subcommand("gen-shm", "generate synthetic vibration events with a manifest");
  gs->add_option("--config", gshm.config, "SHM config file");
  gs->add_option("--out,-o", gshm.out, "output directory")->required();
  for (const char* k : {"sensors", "samples", "sample_rate", "events", "signal_noise", "stiffness_loss",
                        "damage_frequency", "data_seed"})
    gshm.flags.add(gs, k, "generator key");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "benchmark solvers (trace CSVs + summary JSON)");
  b->add_option("--config", bench.config, "benchmark config file");
  b->add_option("--tensor", bench.tensor, "benchmark on this tensor instead of synthetic datasets");
  b->add_option("--out,-o", bench.out, "output directory")->required();
  for (const char* k : {"dims", "true_rank", "data_noise", "data_seed", "seeds", "solvers", "target_rmse"})
    bench.flags.add(b, k, "benchmark key");
  add_solver_flags(b, bench.flags);

  PipelineArgs pipe;
  auto* p = app.add_subcommand("pipeline", "damage detection and localization on vibration events");
  p->add_option("--config", pipe.config, "SHM config file");
  p->add_option("--events", pipe.events, "event directory");
  p->add_option("--manifest", pipe.manifest, "manifest CSV (default: <events>/manifest.csv)");
  p->add_flag("--synthetic", pipe.synthetic, "use generated events from the config instead of --events");
  p->add_option("--out,-o", pipe.out, "output directory")->required();
  for (const char* k : {"solver", "trials", "train_fraction", "nu", "sigma", "neighbors", "bootstrap_seed", "keep_bins"})
    pipe.flags.add(p, k, "pipeline key");
  add_solver_flags(p, pipe.flags);

  CorcondiaArgs cc;
  auto* c = app.add_subcommand("corcondia", "core consistency for ranks 1..max-rank");
  c->add_option("--config", cc.config, "solver config file");
  c->add_option("--tensor", cc.tensor, "input tensor")->required();
  c->add_option("--max-rank", cc.max_rank, "largest rank to try");
  c->add_option("--threshold", cc.threshold, "consistency needed for a rank to be accepted");
  c->add_option("--solver", cc.solver, "solver used for the fits");
  c->add_option("--out,-o", cc.out, "output JSON (default stdout)");
  add_solver_flags(c, cc.flags);

  PlanArgs plan;
  auto* pd = app.add_subcommand("plan-dump", "print the block plan as JSON");
  pd->add_option("--dims", plan.dims, "IxJxK");
  pd->add_option("--tensor", plan.tensor, "take dims from this tensor");
  pd->add_option("--out,-o", plan.out, "output JSON (default stdout)");
  pd->add_flag("--summary", plan.summary, "omit the block entries");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) run_gen(gen);
    else if (gs->parsed()) run_gen_shm(gshm);
    else if (b->parsed()) run_bench(bench);
    else if (p->parsed()) run_pipeline(pipe);
    else if (c->parsed()) run_corcondia(cc);
    else if (pd->parsed()) run_plan_dump(plan);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
