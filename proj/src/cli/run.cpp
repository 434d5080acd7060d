#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "adnet/cli/plan.hpp"
#include "adnet/error.hpp"
#include "adnet/metrics/pair.hpp"
#include "adnet/parallel.hpp"
#include "adnet/sim/simulate.hpp"

namespace adnet::cli {
namespace {

using io::Json;
namespace fs = std::filesystem;

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, std::string("plan key '") + key + "': " + e.what());
  }
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::ParseError, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(ErrorCode::UnknownKey, "unknown plan key '" + where + "." + key + "'");
  }
}

double horizon_of(const ExperimentPlan& plan, const ValidatedModel& model) {
  return plan.T > 0.0 ? plan.T : model.horizon;
}

std::vector<double> output_times(const ExperimentPlan& plan, double T) {
  return plan.times.empty() ? std::vector<double>{T} : plan.times;
}

unsigned threads_of(const ExperimentPlan& plan) {
  return plan.threads ? plan.threads : default_threads();
}

std::uint64_t replica_seed(const ExperimentPlan& plan, std::size_t n, std::size_t r) {
  return derive_seed(plan.seed, "replica", {n, r});
}

fs::path replica_dir(const fs::path& out, std::size_t n, std::size_t r) {
  return out / ("n" + std::to_string(n)) / ("r" + std::to_string(r));
}

void write_log(const ExperimentPlan& plan, const fs::path& dir, const EventLog& log) {
  if (plan.log_format == "csv") io::write_event_log_csv(dir / "events.csv", log);
  else if (plan.log_format == "binary") io::write_event_log_binary(dir / "events.bin", log);
}

SolveOptions solve_options(const ExperimentPlan& plan) {
  SolveOptions o;
  o.particles = plan.solver.particles;
  o.window = plan.solver.window;
  o.tol = plan.solver.tol;
  o.max_iters = plan.solver.max_iters;
  o.seed = derive_seed(plan.seed, "limit");
  o.picard.subsample = plan.solver.subsample;
  o.picard.threads = threads_of(plan);
  return o;
}

Json fixed_point_json(const FixedPointReport& r) {
  Json windows = Json::array();
  for (const WindowReport& w : r.windows)
    windows.push_back({{"end", w.end},
                       {"distances", w.distances},
                       {"ratios", w.ratios},
                       {"max_ratio", w.max_ratio},
                       {"converged", w.converged}});
  return {{"window", r.window},
          {"contraction_constant", r.contraction_constant},
          {"iterations", r.iterations},
          {"distances", r.distances},
          {"windows", windows},
          {"residual", r.residual},
          {"converged", r.converged}};
}

/// The law to decouple against: read from plan.law or solved (and saved).
MeasureSample obtain_law(const ValidatedModel& model, const ExperimentPlan& plan, double T,
                         const fs::path& out, Json& report) {
  if (!plan.law.empty()) {
    MeasureSample mu = io::read_measure_csv(plan.law);
    report["law"] = {{"source", plan.law}, {"sha256", io::sha256_file(plan.law)}};
    return mu;
  }
  SolveResult solved = solve_limit_law(model, T, solve_options(plan));
  io::write_measure_csv(out / "law.csv", solved.law);
  report["law"] = {{"source", "solved"}, {"fixed_point", fixed_point_json(solved.report)}};
  return std::move(solved.law);
}

void run_simulate(const ValidatedModel& model, const ExperimentPlan& plan, const fs::path& out,
                  Json& report) {
  const double T = horizon_of(plan, model);
  io::CsvWriter summary(out / "summary.csv", "adnet.simulate-summary.v1",
                        {"n", "replica", "node_events", "edge_events", "rejected"});
  for (std::size_t n : plan.n) {
    const auto positions = model.domain.default_positions(n);
    std::vector<SimStats> stats(plan.replicas);
    parallel_for(plan.replicas, threads_of(plan), [&](std::size_t r) {
      SimOptions o;
      o.include_self_edges = plan.include_self_edges;
      o.record_log = plan.log_format != "none";
      const SimResult run = simulate_network(model, n, positions, T, replica_seed(plan, n, r), o);
      const fs::path dir = replica_dir(out, n, r);
      write_log(plan, dir, run.log);
      io::write_paths_csv(dir / "node_paths.csv", run.node_paths, positions);
      stats[r] = run.stats;
    });
    for (std::size_t r = 0; r < plan.replicas; ++r)
      summary.row({std::to_string(n), std::to_string(r), std::to_string(stats[r].node_events),
                   std::to_string(stats[r].edge_events), std::to_string(stats[r].rejected_proposals)});
  }
  report["T"] = T;
}

void run_decoupled(const ValidatedModel& model, const ExperimentPlan& plan, const fs::path& out,
                   Json& report) {
  const double T = horizon_of(plan, model);
  const MeasureSample mu = obtain_law(model, plan, T, out, report);
  io::CsvWriter summary(out / "summary.csv", "adnet.decoupled-summary.v1",
                        {"n", "replica", "node_events", "edge_events", "rejected"});
  for (std::size_t n : plan.n) {
    const auto positions = model.domain.default_positions(n);
    std::vector<SimStats> stats(plan.replicas);
    parallel_for(plan.replicas, threads_of(plan), [&](std::size_t r) {
      DecoupledOptions o;
      o.sim.include_self_edges = plan.include_self_edges;
      o.sim.record_log = plan.log_format != "none";
      o.grid_points = plan.grid_points;
      o.subsample = plan.solver.subsample;
      o.record_fields = false;
      const DecoupledResult run =
          simulate_decoupled(model, n, positions, T, mu, replica_seed(plan, n, r), o);
      const fs::path dir = replica_dir(out, n, r);
      write_log(plan, dir, run.log);
      io::write_paths_csv(dir / "node_paths.csv", run.node_paths, positions);
      stats[r] = run.stats;
    });
    for (std::size_t r = 0; r < plan.replicas; ++r)
      summary.row({std::to_string(n), std::to_string(r), std::to_string(stats[r].node_events),
                   std::to_string(stats[r].edge_events), std::to_string(stats[r].rejected_proposals)});
  }
  report["T"] = T;
}

void run_coupled(const ValidatedModel& model, const ExperimentPlan& plan, const fs::path& out,
                 Json& report) {
  const double T = horizon_of(plan, model);
  const MeasureSample mu = obtain_law(model, plan, T, out, report);
  const double c_T = default_intensity_constant(model);
  io::CsvWriter summary(out / "summary.csv", "adnet.coupled-summary.v1",
                        {"n", "replica", "delta_T", "phi_T", "eta_T", "bound_holds"});
  bool all_hold = true;
  for (std::size_t n : plan.n) {
    const auto positions = model.domain.default_positions(n);
    struct Row {
      double delta, phi, eta;
      bool holds;
    };
    std::vector<Row> rows(plan.replicas);
    parallel_for(plan.replicas, threads_of(plan), [&](std::size_t r) {
      CoupledOptions o;
      o.sim.include_self_edges = plan.include_self_edges;
      o.sim.record_log = plan.log_format != "none";
      o.grid_points = plan.grid_points;
      o.subsample = plan.solver.subsample;
      const CoupledResult run =
          simulate_coupled(model, n, positions, T, mu, replica_seed(plan, n, r), o);
      const IntensityBoundReport bound = check_intensity_bound(run.series, c_T);
      const fs::path dir = replica_dir(out, n, r);
      write_log(plan, dir, run.log);
      io::write_series_csv(dir / "series.csv", run.series);
      io::write_intensity_csv(dir / "intensity.csv", bound);
      const auto& s = run.series;
      rows[r] = {s.delta.empty() ? 0.0 : s.delta.back(), s.phi.empty() ? 0.0 : s.phi.back(),
                 s.eta.empty() ? 0.0 : s.eta.back(), bound.holds};
    });
    for (std::size_t r = 0; r < plan.replicas; ++r) {
      all_hold = all_hold && rows[r].holds;
      summary.row({std::to_string(n), std::to_string(r), io::format_double(rows[r].delta),
                   io::format_double(rows[r].phi), io::format_double(rows[r].eta),
                   rows[r].holds ? "1" : "0"});
    }
  }
  report["T"] = T;
  report["c_T"] = c_T;
  report["bound_holds"] = all_hold;
}

void run_solve(const ValidatedModel& model, const ExperimentPlan& plan, const fs::path& out,
               Json& report) {
  const double T = horizon_of(plan, model);
  const SolveResult solved = solve_limit_law(model, T, solve_options(plan));
  io::write_measure_csv(out / "law.csv", solved.law);
  io::write_json(out / "fixed_point.json", fixed_point_json(solved.report));
  report["T"] = T;
  report["residual"] = solved.report.residual;
  report["iterations"] = solved.report.iterations;
}

void run_pde(const ValidatedModel& model, const ExperimentPlan& plan, const fs::path& out,
             Json& report) {
  const double T = horizon_of(plan, model);
  const auto times = output_times(plan, T);
  const PdeSolution sol = integrate_pde(model, T, plan.solver.dt, times, plan.solver.convention);
  io::write_pde_csv(out / "density.csv", out / "field.csv", sol);
  Json r = {{"T", T},
            {"dt", sol.dt},
            {"steps", sol.steps},
            {"mass_drift", sol.mass_drift},
            {"min_entry", sol.min_entry},
            {"convention", std::string(to_string(sol.convention))},
            {"quadrature_nodes", model.domain.size()}};
  if (plan.solver.richardson) {
    const RichardsonReport rr = richardson_order(model, T, plan.solver.dt, plan.solver.convention);
    r["richardson"] = {{"diff_coarse", rr.diff_coarse}, {"diff_fine", rr.diff_fine}, {"order", rr.order}};
  }
  io::write_json(out / "pde.json", r);
  report.update(r);
}

void run_sweep(const ValidatedModel& model, const ExperimentPlan& plan, const fs::path& out,
               Json& report) {
  const double T = horizon_of(plan, model);
  std::optional<MeasureSample> law;
  const bool autonomous = model.edge.mode == EdgeMode::Autonomous;
  const std::string metric = plan.metric == "auto" ? (autonomous ? "theorem2" : "wasserstein")
                                                   : plan.metric;
  if (metric == "wasserstein") law = obtain_law(model, plan, T, out, report);
  const auto rows = converge_sweep(model, plan, law ? &*law : nullptr);
  io::CsvWriter w(out / "sweep.csv", "adnet.sweep.v1",
                  {"metric", "n", "t", "value", "stderr", "replicas"});
  for (const SweepRow& r : rows)
    w.row({r.metric, std::to_string(r.n), io::format_double(r.t), io::format_double(r.mean),
           io::format_double(r.stderr_), std::to_string(r.replicas)});
  report["T"] = T;
  report["metric"] = metric;
  if (metric == "theorem2") report["test_functions"] = kTestFunctionVersion;
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Validate: return "validate";
    case Mode::Simulate: return "simulate";
    case Mode::Decoupled: return "decoupled";
    case Mode::Coupled: return "coupled";
    case Mode::SolveLimit: return "solve-limit";
    case Mode::Pde: return "pde";
    case Mode::Sweep: return "sweep";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::Validate, Mode::Simulate, Mode::Decoupled, Mode::Coupled, Mode::SolveLimit,
                 Mode::Pde, Mode::Sweep})
    if (to_string(m) == text) return m;
  if (text == "converge-sweep") return Mode::Sweep;
  fail(ErrorCode::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

ExperimentPlan plan_from_json(const Json& j) {
  check_keys(j, {"mode", "model", "n", "T", "replicas", "seed", "out", "threads", "solver", "times",
                 "grid_points", "law", "include_self_edges", "log_format", "metric"},
             "plan");
  ExperimentPlan p;
  if (j.contains("mode")) p.mode = parse_mode(get<std::string>(j, "mode"));
  if (j.contains("model")) p.model = get<std::string>(j, "model");
  if (j.contains("n")) {
    if (j.at("n").is_array()) p.n = get<std::vector<std::size_t>>(j, "n");
    else p.n = {get<std::size_t>(j, "n")};
  }
  if (j.contains("T")) p.T = get<double>(j, "T");
  if (j.contains("replicas")) p.replicas = get<std::size_t>(j, "replicas");
  if (j.contains("seed")) p.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("out")) p.out = get<std::string>(j, "out");
  if (j.contains("threads")) p.threads = get<unsigned>(j, "threads");
  if (j.contains("times")) p.times = get<std::vector<double>>(j, "times");
  if (j.contains("grid_points")) p.grid_points = get<std::size_t>(j, "grid_points");
  if (j.contains("law")) p.law = get<std::string>(j, "law");
  if (j.contains("include_self_edges")) p.include_self_edges = get<bool>(j, "include_self_edges");
  if (j.contains("log_format")) p.log_format = get<std::string>(j, "log_format");
  if (j.contains("metric")) p.metric = get<std::string>(j, "metric");
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    check_keys(s, {"M", "window", "tol", "max_iters", "dt", "subsample", "convention", "richardson"},
               "solver");
    if (s.contains("M")) p.solver.particles = get<std::size_t>(s, "M");
    if (s.contains("window")) p.solver.window = get<double>(s, "window");
    if (s.contains("tol")) p.solver.tol = get<double>(s, "tol");
    if (s.contains("max_iters")) p.solver.max_iters = get<std::size_t>(s, "max_iters");
    if (s.contains("dt")) p.solver.dt = get<double>(s, "dt");
    if (s.contains("subsample")) p.solver.subsample = get<std::size_t>(s, "subsample");
    if (s.contains("convention"))
      p.solver.convention = parse_field_convention(get<std::string>(s, "convention"));
    if (s.contains("richardson")) p.solver.richardson = get<bool>(s, "richardson");
  }
  return p;
}

Json plan_to_json(const ExperimentPlan& p) {
  return {{"mode", std::string(to_string(p.mode))},
          {"model", p.model},
          {"n", p.n},
          {"T", p.T},
          {"replicas", p.replicas},
          {"seed", p.seed},
          {"times", p.times},
          {"grid_points", p.grid_points},
          {"law", p.law},
          {"include_self_edges", p.include_self_edges},
          {"log_format", p.log_format},
          {"metric", p.metric},
          {"solver",
           {{"M", p.solver.particles},
            {"window", p.solver.window},
            {"tol", p.solver.tol},
            {"max_iters", p.solver.max_iters},
            {"dt", p.solver.dt},
            {"subsample", p.solver.subsample},
            {"convention", std::string(to_string(p.solver.convention))},
            {"richardson", p.solver.richardson}}}};
}

void check_plan(const ExperimentPlan& p) {
  if (p.model.empty()) fail(ErrorCode::InvalidArgument, "plan needs a model path");
  if (p.mode == Mode::Validate) return;
  if (p.T < 0.0) fail(ErrorCode::InvalidArgument, "T must be nonnegative");
  const bool uses_n = p.mode == Mode::Simulate || p.mode == Mode::Decoupled ||
                      p.mode == Mode::Coupled || p.mode == Mode::Sweep;
  if (uses_n) {
    if (p.n.empty()) fail(ErrorCode::InvalidArgument, "n list must be nonempty");
    if (std::any_of(p.n.begin(), p.n.end(), [](std::size_t n) { return n < 2; }))
      fail(ErrorCode::InvalidArgument, "every n must be at least 2");
    if (p.replicas == 0) fail(ErrorCode::InvalidArgument, "replicas must be positive");
  }
  if (p.log_format != "csv" && p.log_format != "binary" && p.log_format != "none")
    fail(ErrorCode::InvalidArgument, "log_format must be csv, binary or none");
  if (p.metric != "auto" && p.metric != "theorem2" && p.metric != "wasserstein")
    fail(ErrorCode::InvalidArgument, "metric must be auto, theorem2 or wasserstein");
  if (!(p.solver.tol > 0.0)) fail(ErrorCode::InvalidArgument, "solver tol must be positive");
  if (!(p.solver.dt > 0.0)) fail(ErrorCode::InvalidArgument, "solver dt must be positive");
  if (p.solver.particles == 0) fail(ErrorCode::InvalidArgument, "solver M must be positive");
  if (!std::is_sorted(p.times.begin(), p.times.end()))
    fail(ErrorCode::InvalidArgument, "times must be nondecreasing");
}

std::vector<SweepRow> converge_sweep(const ValidatedModel& model, const ExperimentPlan& plan,
                                     const MeasureSample* law) {
  const double T = horizon_of(plan, model);
  const auto times = output_times(plan, T);
  const bool autonomous = model.edge.mode == EdgeMode::Autonomous;
  const std::string metric = plan.metric == "auto" ? (autonomous ? "theorem2" : "wasserstein")
                                                   : plan.metric;
  std::vector<PairTable> nu;
  if (metric == "theorem2") {
    const PdeSolution sol = integrate_pde(model, T, plan.solver.dt, times, plan.solver.convention);
    for (const PdeFrame& f : sol.frames) nu.push_back(nu_from_density(f.density));
  } else if (law == nullptr) {
    fail(ErrorCode::EmptyMeasure, "wasserstein sweep needs a limit law");
  }
  const auto tests = test_functions(model.domain);
  std::vector<SweepRow> rows;
  for (std::size_t n : plan.n) {
    const auto positions = model.domain.default_positions(n);
    std::vector<std::vector<double>> values(plan.replicas, std::vector<double>(times.size()));
    parallel_for(plan.replicas, threads_of(plan), [&](std::size_t r) {
      SimOptions o;
      o.include_self_edges = plan.include_self_edges;
      o.record_log = false;
      if (metric == "theorem2") o.snapshot_times = times;
      const SimResult run = simulate_network(model, n, positions, T, replica_seed(plan, n, r), o);
      if (metric == "theorem2") {
        for (std::size_t i = 0; i < times.size(); ++i) {
          const Snapshot& s = run.snapshots.at(i);
          const PairTable emp = pair_empirical_measure(model.domain, model.G(), model.E(), s.sigma,
                                                       s.edges, positions, plan.include_self_edges);
          values[r][i] = theorem2_error(model.domain, emp, nu[i], tests);
        }
      } else {
        const MeasureSample emp = empirical_measure_from_sim(run.node_paths, positions);
        for (std::size_t i = 0; i < times.size(); ++i)
          values[r][i] = wasserstein(model.domain, emp, *law, times[i]);
      }
    });
    for (std::size_t i = 0; i < times.size(); ++i) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t r = 0; r < plan.replicas; ++r) mean += values[r][i];
      mean /= static_cast<double>(plan.replicas);
      for (std::size_t r = 0; r < plan.replicas; ++r) sq += (values[r][i] - mean) * (values[r][i] - mean);
      const double se = plan.replicas > 1
                            ? std::sqrt(sq / static_cast<double>(plan.replicas - 1) /
                                        static_cast<double>(plan.replicas))
                            : 0.0;
      rows.push_back({metric, n, times[i], mean, se, plan.replicas});
    }
  }
  return rows;
}

RunResult run(const ExperimentPlan& plan) {
  check_plan(plan);
  RunResult result;
  Json& report = result.report;
  report["mode"] = std::string(to_string(plan.mode));
  if (plan.mode == Mode::Validate) {
    const ValidationReport v = validate_model(load_model_document(plan.model));
    Json violations = Json::array();
    for (const Violation& x : v.violations)
      violations.push_back({{"code", std::string(to_string(x.code))},
                            {"location", x.location},
                            {"message", x.message}});
    report["ok"] = v.ok();
    report["violations"] = violations;
    return result;
  }
  const ValidatedModel model = load_model(plan.model);
  const fs::path out = plan.out;
  fs::create_directories(out);
  switch (plan.mode) {
    case Mode::Simulate: run_simulate(model, plan, out, report); break;
    case Mode::Decoupled: run_decoupled(model, plan, out, report); break;
    case Mode::Coupled: run_coupled(model, plan, out, report); break;
    case Mode::SolveLimit: run_solve(model, plan, out, report); break;
    case Mode::Pde: run_pde(model, plan, out, report); break;
    case Mode::Sweep: run_sweep(model, plan, out, report); break;
    case Mode::Validate: break;
  }
  io::write_json(out / "report.json", report);
  Json plan_json = plan_to_json(plan);
  plan_json["model_sha256"] = io::sha256_file(plan.model);
  result.manifest = io::write_manifest(out, plan_json);
  return result;
}

}  // namespace adnet::cli
