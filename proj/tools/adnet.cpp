// Experiment driver: one subcommand per pipeline mode.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "adnet/cli/plan.hpp"
#include "adnet/error.hpp"

namespace {

using adnet::cli::ExperimentPlan;
using adnet::cli::Mode;

int report_error(const std::string& code, const std::string& message) {
  const adnet::io::Json err = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  return 2;
}

struct Flags {
  std::string model, plan, out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--model", f.model, "model file (.toml subset or .json)");
  sub->add_option("--plan", f.plan, "experiment plan JSON");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--threads", f.threads, "worker threads");
}

int execute(Mode mode, const Flags& f, const CLI::App* sub) {
  ExperimentPlan plan;
  if (!f.plan.empty()) plan = adnet::cli::plan_from_json(adnet::io::read_json(f.plan));
  plan.mode = mode;
  if (const char* env = std::getenv("ADNET_OUT"); env != nullptr && *env != '\0') plan.out = env;
  if (sub->count("--model")) plan.model = f.model;
  if (sub->count("--seed")) plan.seed = f.seed;
  if (sub->count("--out")) plan.out = f.out;
  if (sub->count("--threads")) plan.threads = f.threads;

  const adnet::cli::RunResult result = adnet::cli::run(plan);
  if (mode == Mode::Validate) {
    const auto& r = result.report;
    if (r.at("ok").get<bool>()) {
      std::cout << "OK " << plan.model << '\n';
      return 0;
    }
    for (const auto& v : r.at("violations"))
      std::cout << v.at("code").get<std::string>() << " at " << v.at("location").get<std::string>()
                << ": " << v.at("message").get<std::string>() << '\n';
    const auto& first = r.at("violations").at(0);
    return report_error(first.at("code").get<std::string>(), first.at("message").get<std::string>());
  }
  std::cout << result.report.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-network simulator, limit solvers and diagnostics"};
  app.require_subcommand(1);
  const std::pair<Mode, const char*> modes[] = {
      {Mode::Validate, "check a model file"},
      {Mode::Simulate, "simulate the interacting network"},
      {Mode::Decoupled, "simulate the decoupled network against a limit law"},
      {Mode::Coupled, "run interacting and decoupled systems coupled"},
      {Mode::SolveLimit, "solve the limit law by windowed Picard iteration"},
      {Mode::Pde, "integrate the autonomous pair-density system"},
      {Mode::Sweep, "convergence sweep over network sizes"}};
  Flags flags;
  std::vector<std::pair<Mode, CLI::App*>> subs;
  for (const auto& [mode, help] : modes) {
    CLI::App* sub = app.add_subcommand(std::string(adnet::cli::to_string(mode)), help);
    add_flags(sub, flags);
    subs.emplace_back(mode, sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("ParseError", e.what());
  }
  try {
    for (const auto& [mode, sub] : subs)
      if (sub->parsed()) return execute(mode, flags, sub);
  } catch (const adnet::Error& e) {
    return report_error(std::string(adnet::to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return report_error("IoError", e.what());
  }
  return 0;
}
