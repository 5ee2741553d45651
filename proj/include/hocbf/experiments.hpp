#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hocbf/checkpoint.hpp"
#include "hocbf/closed_loop.hpp"
#include "hocbf/learner.hpp"
#include "hocbf/scenario.hpp"

namespace hocbf {

struct RolloutSummary {
  RobotState initial;
  StopReason reason = StopReason::none;
  double min_h = 0.0;
  std::size_t steps = 0;
  std::size_t infeasible_steps = 0;
  bool goal_reached = false;
  bool admissible_start = false;  // every b_j(x0) > 0

  [[nodiscard]] bool safe() const { return min_h > 0.0; }
};

struct RunReport {
  std::string scenario;
  std::string filter;  // "nominal" or "learned"
  std::uint64_t seed = 0;
  std::vector<RolloutSummary> rollouts;

  [[nodiscard]] std::size_t safe_count() const {
    return static_cast<std::size_t>(
        std::count_if(rollouts.begin(), rollouts.end(), [](const auto& r) { return r.safe(); }));
  }
  [[nodiscard]] std::size_t goal_count() const {
    return static_cast<std::size_t>(
        std::count_if(rollouts.begin(), rollouts.end(), [](const auto& r) { return r.goal_reached; }));
  }
  [[nodiscard]] double safe_rate() const {
    return rollouts.empty() ? 0.0 : static_cast<double>(safe_count()) / static_cast<double>(rollouts.size());
  }
  [[nodiscard]] double goal_rate() const {
    return rollouts.empty() ? 0.0 : static_cast<double>(goal_count()) / static_cast<double>(rollouts.size());
  }
};

inline RolloutSummary summarize(const RobotState& initial, const TrajectoryLog& log, bool admissible) {
  RolloutSummary s;
  s.initial = initial;
  s.reason = log.reason;
  s.min_h = log.min_h();
  s.steps = log.size() - 1;
  s.infeasible_steps = log.infeasible_steps();
  s.goal_reached = log.reason == StopReason::goal;
  s.admissible_start = admissible;
  return s;
}

/// Draws `n` evaluation starts from the scenario's evaluation region.
inline std::vector<RobotState> evaluation_starts(const ScenarioConfig& sc, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RobotState> starts;
  starts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) starts.push_back(sample_state(sc.eval.region, rng));
  return starts;
}

/// Rolls out the true plant from `n_samples` seeded starts, in parallel, and
/// aggregates safety and goal statistics. An empty `models` span selects the
/// nominal-model filter.
inline RunReport run_eval(const ScenarioConfig& sc, std::span<const EstimatorModel> models,
                          std::size_t n_samples, std::uint64_t seed, unsigned workers = 0) {
  if (n_samples == 0) throw std::invalid_argument("run_eval: n_samples must be positive");
  const auto starts = evaluation_starts(sc, n_samples, seed);
  RunReport rep;
  rep.scenario = sc.name;
  rep.filter = models.empty() ? "nominal" : "learned";
  rep.seed = seed;
  rep.rollouts.resize(n_samples);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_samples));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n_samples; i = next++) {
      const TrajectoryLog log = rollout(sc, models, starts[i]);
      rep.rollouts[i] = summarize(starts[i], log, chain_admissible(sc, starts[i]));
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return rep;
}

inline void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log) {
  const std::size_t m = log.samples.empty() ? 0 : log.samples.front().h.size();
  os << "t,x,y,theta,omega";
  for (std::size_t i = 0; i < m; ++i) os << ",h_" << i;
  os << ",slack,reason\n";
  os << std::setprecision(10);
  for (std::size_t k = 0; k < log.samples.size(); ++k) {
    const auto& s = log.samples[k];
    os << s.t << ',' << s.state.x << ',' << s.state.y << ',' << s.state.theta << ',' << s.omega;
    for (double h : s.h) os << ',' << h;
    os << ',' << s.slack << ',';
    if (k + 1 == log.samples.size()) os << to_string(log.reason);
    os << '\n';
  }
}

/// Human-readable summary table.
inline void write_report_table(std::ostream& os, const RunReport& rep) {
  os << "scenario: " << rep.scenario << "   filter: " << rep.filter << "   seed: " << rep.seed << '\n';
  os << std::left << std::setw(5) << "#" << std::setw(28) << "initial (x, y, theta)" << std::setw(11)
     << "reason" << std::setw(14) << "min h" << std::setw(8) << "steps" << "infeasible\n";
  os << std::fixed;
  for (std::size_t i = 0; i < rep.rollouts.size(); ++i) {
    const auto& r = rep.rollouts[i];
    std::ostringstream init;
    init << std::fixed << std::setprecision(3) << '(' << r.initial.x << ", " << r.initial.y << ", "
         << r.initial.theta << ')';
    os << std::setw(5) << i << std::setw(28) << init.str() << std::setw(11) << to_string(r.reason)
       << std::setw(14) << std::setprecision(6) << r.min_h << std::setw(8) << r.steps << r.infeasible_steps
       << '\n';
  }
  os << std::defaultfloat << std::right;
  os << "samples: " << rep.rollouts.size() << "   unsafe: " << rep.rollouts.size() - rep.safe_count()
     << "   safe rate: " << 100.0 * rep.safe_rate() << "%   goal rate: " << 100.0 * rep.goal_rate() << "%\n";
}

/// Machine-readable key=value report.
inline void write_report_kv(std::ostream& os, const RunReport& rep) {
  os << std::setprecision(10);
  os << "scenario=" << rep.scenario << '\n';
  os << "filter=" << rep.filter << '\n';
  os << "seed=" << rep.seed << '\n';
  os << "samples=" << rep.rollouts.size() << '\n';
  os << "safe=" << rep.safe_count() << '\n';
  os << "unsafe=" << rep.rollouts.size() - rep.safe_count() << '\n';
  os << "goal=" << rep.goal_count() << '\n';
  os << "safe_rate=" << rep.safe_rate() << '\n';
  os << "goal_rate=" << rep.goal_rate() << '\n';
  for (std::size_t i = 0; i < rep.rollouts.size(); ++i) {
    const auto& r = rep.rollouts[i];
    os << "rollout." << i << "=x0:" << r.initial.x << ",y0:" << r.initial.y << ",theta0:" << r.initial.theta
       << ",reason:" << to_string(r.reason) << ",min_h:" << r.min_h << ",steps:" << r.steps
       << ",infeasible:" << r.infeasible_steps << '\n';
  }
}

/// Trains the scenario's estimators and writes the checkpoint to `out_path`
/// and the per-update training loss to `<out_path>.loss.csv`.
inline TrainingResult run_train(const ScenarioConfig& sc, const std::string& out_path,
                                const TrainingProgress& progress = {}) {
  TrainingResult res = learn_cbf(sc, progress);
  save_checkpoint(out_path, res.models, sc.train.seed);
  const std::string loss_path = out_path + ".loss.csv";
  std::ofstream os(loss_path);
  if (!os) throw std::runtime_error("cannot open '" + loss_path + "' for writing");
  os << "update,loss\n" << std::setprecision(10);
  for (std::size_t i = 0; i < res.loss.size(); ++i) os << i << ',' << res.loss[i] << '\n';
  return res;
}

inline TrajectoryLog run_rollout(const ScenarioConfig& sc, std::span<const EstimatorModel> models,
                                 const RobotState& initial, const std::string& out_path) {
  if (!sc.workspace.contains(initial.x, initial.y))
    throw std::invalid_argument("run_rollout: initial state outside the workspace");
  const TrajectoryLog log = rollout(sc, models, initial);
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  write_trajectory_csv(os, log);
  return log;
}

}  // namespace hocbf
