// Command-line front end: train, rollout, eval and the counterexample demos.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hocbf/barrier.hpp"
#include "hocbf/checkpoint.hpp"
#include "hocbf/experiments.hpp"
#include "hocbf/scenario_io.hpp"

namespace {

using namespace hocbf;

std::vector<EstimatorModel> maybe_load(const ScenarioConfig& sc, const std::string& path) {
  if (path.empty()) return {};
  return load_checkpoint(path, sc);
}

int cmd_train(const std::string& cfg, const std::string& out) {
  const ScenarioConfig sc = load_scenario(cfg);
  const TrainingResult res = run_train(sc, out, [&](std::size_t traj, std::size_t n) {
    std::cerr << "trajectory " << traj << '/' << sc.train.trajectories << "  transitions " << n << '\n';
  });
  std::cout << "wrote " << out << " (" << res.models.size() << " models, " << res.transitions
            << " transitions, " << res.infeasible_steps << " infeasible steps)\n";
  if (!res.loss.empty()) std::cout << "final batch loss " << res.loss.back() << '\n';
  return 0;
}

int cmd_rollout(const std::string& cfg, const std::string& model, const std::vector<double>& init,
                const std::string& out) {
  const ScenarioConfig sc = load_scenario(cfg);
  const auto models = maybe_load(sc, model);
  const RobotState s0{init[0], init[1], init[2]};
  const TrajectoryLog log = run_rollout(sc, models, s0, out);
  std::cout << "reason " << to_string(log.reason) << "  steps " << log.size() - 1 << "  min h "
            << log.min_h() << "  infeasible " << log.infeasible_steps() << '\n';
  return 0;
}

int cmd_eval(const std::string& cfg, const std::string& model, std::optional<std::size_t> n,
             std::optional<std::uint64_t> seed, const std::string& out, unsigned workers) {
  const ScenarioConfig sc = load_scenario(cfg);
  const auto models = maybe_load(sc, model);
  const RunReport rep = run_eval(sc, models, n.value_or(sc.eval.samples), seed.value_or(sc.eval.seed), workers);
  write_report_table(std::cout, rep);
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open '" + out + "' for writing");
    write_report_kv(os, rep);
  }
  return 0;
}

int cmd_demo() {
  const double dt = 1e-4;
  std::cout << "non-Lipschitz alpha(z) = z^(1/3), h(x) = s*x^(3/2), x' = -1\n";
  std::cout << std::setw(8) << "x0" << std::setw(16) << "t(h<=0)" << std::setw(22) << "Lipschitz min h (10x)"
            << '\n';
  for (double x0 : {0.25, 1.0, 4.0}) {
    const double t = demo_nonlipschitz_alpha(x0, dt);
    const double m = demo_lipschitz_alpha(x0, dt, 10.0 * x0);
    std::cout << std::setw(8) << x0 << std::setw(16) << t << std::setw(22) << m << '\n';
  }
  std::cout << "empty interior: h = -x^2, x' = c\n";
  for (double c : {0.5, 1.0, 2.0})
    std::cout << "  c = " << c << "  h(dt) = " << demo_empty_interior(c, 0.1) << " after dt = 0.1\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-relative-degree CBF safety filters with learned residuals"};
  app.require_subcommand(1);

  std::string cfg, out, model;
  std::vector<double> init;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;

  auto* train = app.add_subcommand("train", "learn the residual estimators for a scenario");
  train->add_option("cfg", cfg, "scenario file")->required()->check(CLI::ExistingFile);
  train->add_option("-o,--out", out, "checkpoint path")->required();

  auto* roll = app.add_subcommand("rollout", "one closed-loop rollout of the true plant to CSV");
  roll->add_option("cfg", cfg, "scenario file")->required()->check(CLI::ExistingFile);
  roll->add_option("--model", model, "checkpoint (omit for the nominal filter)")->check(CLI::ExistingFile);
  roll->add_option("--init", init, "initial state x,y,theta")->required()->delimiter(',')->expected(3);
  roll->add_option("-o,--out", out, "CSV path")->required();

  auto* eval = app.add_subcommand("eval", "safe-rate evaluation over seeded starts");
  eval->add_option("cfg", cfg, "scenario file")->required()->check(CLI::ExistingFile);
  eval->add_option("--model", model, "checkpoint (omit for the nominal filter)")->check(CLI::ExistingFile);
  eval->add_option("-n", n, "number of rollouts (default from scenario)")->check(CLI::PositiveNumber);
  eval->add_option("--seed", seed, "sampling seed (default from scenario)");
  eval->add_option("-o,--out", out, "key=value report path");
  eval->add_option("-j,--jobs", workers, "worker threads (0 = hardware)");

  auto* demo = app.add_subcommand("demo", "built-in demonstrations");
  std::string which;
  demo->add_option("name", which, "demo name")->required()->check(CLI::IsMember({"counterexamples"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(cfg, out);
    if (*roll) return cmd_rollout(cfg, model, init, out);
    if (*eval) return cmd_eval(cfg, model, n, seed, out, workers);
    if (*demo) return cmd_demo();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
