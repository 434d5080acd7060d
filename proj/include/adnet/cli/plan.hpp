#pragma once

// Experiment plans and the pipeline driver behind the adnet tool.

#include <cstdint>
#include <string>
#include <vector>

#include "adnet/io/io.hpp"
#include "adnet/limit/limit.hpp"
#include "adnet/pde/pde.hpp"

namespace adnet::cli {

enum class Mode { Validate, Simulate, Decoupled, Coupled, SolveLimit, Pde, Sweep };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

struct SolverKnobs {
  std::size_t particles = 1024;
  double window = 0.0;  // 0: automatic
  double tol = 0.02;
  std::size_t max_iters = 30;
  double dt = 0.01;
  std::size_t subsample = 0;
  FieldConvention convention = FieldConvention::IntegrateSecond;
  bool richardson = false;
};

struct ExperimentPlan {
  Mode mode = Mode::Simulate;
  std::string model;
  std::vector<std::size_t> n{100};
  double T = 0.0;  // 0: model horizon
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned threads = 0;  // 0: default_threads()
  SolverKnobs solver;
  std::vector<double> times;  // snapshot / output times; empty: {T}
  std::size_t grid_points = 256;
  std::string law;  // measure CSV for decoupled/coupled/sweep; empty: solve
  bool include_self_edges = false;
  std::string log_format = "csv";  // csv | binary | none
  std::string metric = "auto";     // auto | theorem2 | wasserstein
};

/// Reads a plan object; unknown keys throw UnknownKey, bad values ParseError.
ExperimentPlan plan_from_json(const io::Json& json);
io::Json plan_to_json(const ExperimentPlan& plan);

/// Checks mode-specific knobs. Throws InvalidArgument.
void check_plan(const ExperimentPlan& plan);

struct SweepRow {
  std::string metric;
  std::size_t n = 0;
  double t = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t replicas = 0;
};

/// Convergence sweep: for every n and output time, the mean over replicas of
/// theorem2_error against the pair-density limit (autonomous models) or of
/// d_W(empirical law, law) (law required).
std::vector<SweepRow> converge_sweep(const ValidatedModel& model, const ExperimentPlan& plan,
                                     const MeasureSample* law);

struct RunResult {
  io::Json manifest;
  io::Json report;
};

/// Executes the plan, writes its artifacts below plan.out and finishes with
/// manifest.json. Throws adnet::Error.
RunResult run(const ExperimentPlan& plan);

}  // namespace adnet::cli
