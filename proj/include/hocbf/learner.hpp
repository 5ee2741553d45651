#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "hocbf/adam.hpp"
#include "hocbf/closed_loop.hpp"
#include "hocbf/estimator.hpp"
#include "hocbf/replay_buffer.hpp"
#include "hocbf/scenario.hpp"

namespace hocbf {

struct TrainingResult {
  std::vector<EstimatorModel> models;  // one per barrier
  std::vector<double> loss;            // mean batch loss over barriers, per update
  std::size_t transitions = 0;
  std::size_t infeasible_steps = 0;
};

/// Fresh (zero-output) estimators for every barrier of a scenario.
inline std::vector<EstimatorModel> initial_models(const ScenarioConfig& sc) {
  std::vector<EstimatorModel> models;
  for (std::size_t i = 0; i < sc.barriers.size(); ++i)
    models.push_back(make_estimator(sc.barriers[i], sc.nominal, sc.train.hidden, sc.train.seed + i));
  return models;
}

struct TrainingStart {
  RobotState state;
  double t = 0.0;
};

/// Initial point for a training rollout: uniform over the training region
/// (and over [0, start_time_max] for the clock), rejecting points that are
/// already unsafe or inside the goal.
template <typename Rng>
TrainingStart sample_training_start(const ScenarioConfig& sc, Rng& rng) {
  std::uniform_real_distribution<double> clock(0.0, sc.train.start_time_max);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const RobotState s = sample_state(sc.train.region, rng);
    const double t0 = sc.train.start_time_max > 0.0 ? clock(rng) : 0.0;
    if (sc.goal.contains(s)) continue;
    bool safe = true;
    for (double h : barrier_values(sc, t0, s)) safe = safe && h > 0.0;
    if (safe) return {s, t0};
  }
  throw ValidationError("train.region contains no safe start outside the goal");
}

/// Builds labelled transitions from one rollout as it unfolds. Feed it the
/// state, time, control and barrier values of every step; each completed
/// window yields one sample per barrier.
class TransitionLabeler {
 public:
  TransitionLabeler(std::size_t barriers, double dt, std::size_t window, LabelControl mode)
      : barriers_(barriers), dt_(dt), half_(window / 2), mode_(mode) {}

  /// Records step k. Returns the samples (one vector per barrier) that became
  /// available; empty until enough history exists.
  std::vector<TransitionSample> push(const RobotState& s, double t, double u,
                                     const std::vector<double>& h) {
    states_.push_back(s);
    times_.push_back(t);
    controls_.push_back(u);
    hs_.push_back(h);
    const std::size_t n = hs_.size();
    std::vector<TransitionSample> out;
    // Raw label at index j needs h_{j+1}; smoothed label at j needs raw labels
    // up to j + half.
    if (n < 3 + 2 * half_) return out;
    const std::size_t j = n - 2 - half_;
    out.reserve(barriers_);
    for (std::size_t b = 0; b < barriers_; ++b) {
      double acc = 0.0;
      for (std::size_t k = j - half_; k <= j + half_; ++k)
        acc += label_hddot(hs_[k - 1][b], hs_[k][b], hs_[k + 1][b], dt_);
      TransitionSample smp;
      smp.x = states_[j];
      smp.t = times_[j];
      smp.u = mode_ == LabelControl::center ? controls_[j] : 0.5 * (controls_[j - 1] + controls_[j]);
      smp.label = acc / static_cast<double>(2 * half_ + 1);
      out.push_back(smp);
    }
    return out;
  }

 private:
  std::size_t barriers_;
  double dt_;
  std::size_t half_;
  LabelControl mode_;
  std::vector<RobotState> states_;
  std::vector<double> times_;
  std::vector<double> controls_;
  std::vector<std::vector<double>> hs_;
};

using TrainingProgress = std::function<void(std::size_t trajectory, std::size_t transitions)>;

/// Online residual learning. For each of `trajectories` sampled starts, rolls
/// the true plant forward for up to `steps` steps under the filter built from
/// the current estimators, stores every labelled transition in a per-barrier
/// replay buffer, and takes one Adam step per barrier on a uniformly sampled
/// batch `updates_per_step` times after every plant step. A rollout ends early on reaching the goal or
/// leaving the workspace; collisions do not end it.
inline TrainingResult learn_cbf(const ScenarioConfig& sc, const TrainingProgress& progress = {}) {
  const TrainConfig& cfg = sc.train;
  TrainingResult res;
  res.models = initial_models(sc);
  const std::size_t nb = sc.barriers.size();

  std::vector<ReplayBuffer<TransitionSample>> buffers(nb, ReplayBuffer<TransitionSample>(cfg.buffer));
  std::vector<AdamState> adam;
  for (const auto& m : res.models) adam.emplace_back(m.net.params());
  const AdamConfig adam_cfg{cfg.learning_rate};

  std::mt19937_64 start_rng(cfg.seed);
  std::mt19937_64 batch_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 noise_rng(cfg.seed ^ 0xc2b2ae3d27d4eb4fULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<TransitionSample> batch;
  batch.reserve(cfg.batch);

  for (std::size_t traj = 0; traj < cfg.trajectories; ++traj) {
    const TrainingStart start = sample_training_start(sc, start_rng);
    RobotState s = start.state;
    TransitionLabeler labeler(nb, sc.dt, cfg.label_window, cfg.label_control);
    const SafetyFilterPolicy policy(sc, res.models);
    for (std::size_t j = 0; j < cfg.steps; ++j) {
      const double t = start.t + static_cast<double>(j) * sc.dt;
      if (sc.goal.contains(s) || !sc.workspace.contains(s.x, s.y)) break;
      const double perturbation = cfg.exploration_std > 0.0 ? cfg.exploration_std * noise(noise_rng) : 0.0;
      const ControlDecision c = policy.decide(t, s, perturbation);
      if (!c.feasible) ++res.infeasible_steps;
      const auto ready = labeler.push(s, t, c.omega, barrier_values(sc, t, s));
      s = step(s, c.omega, sc.truth, sc.dt);
      for (std::size_t b = 0; b < ready.size(); ++b) buffers[b].push(ready[b]);
      if (!ready.empty()) ++res.transitions;
      if (buffers[0].empty()) continue;

      for (std::size_t u = 0; u < cfg.updates_per_step; ++u) {
        double loss = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
          batch.clear();
          for (std::size_t i : buffers[b].sample_indices(cfg.batch, batch_rng)) batch.push_back(buffers[b][i]);
          LossAndGradient lg = loss_and_gradient(res.models[b], batch);
          adam_step(res.models[b].net.params(), lg.gradient, adam[b], adam_cfg);
          loss += lg.loss;
        }
        res.loss.push_back(loss / static_cast<double>(nb));
      }
    }
    if (progress) progress(traj + 1, res.transitions);
  }
  return res;
}

/// Labelled transitions gathered under the same protocol as training (start
/// sampling, exploration noise, filter with `models`) but from an independent
/// seed and without learning. Returns one sample set per barrier.
inline std::vector<std::vector<TransitionSample>> collect_transitions(const ScenarioConfig& sc,
                                                                      std::span<const EstimatorModel> models,
                                                                      std::size_t trajectories,
                                                                      std::uint64_t seed) {
  const TrainConfig& cfg = sc.train;
  const std::size_t nb = sc.barriers.size();
  std::vector<std::vector<TransitionSample>> out(nb);
  std::mt19937_64 start_rng(seed);
  std::mt19937_64 noise_rng(seed ^ 0xc2b2ae3d27d4eb4fULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  const SafetyFilterPolicy policy(sc, models);
  for (std::size_t traj = 0; traj < trajectories; ++traj) {
    const TrainingStart start = sample_training_start(sc, start_rng);
    RobotState s = start.state;
    TransitionLabeler labeler(nb, sc.dt, cfg.label_window, cfg.label_control);
    for (std::size_t j = 0; j < cfg.steps; ++j) {
      const double t = start.t + static_cast<double>(j) * sc.dt;
      if (sc.goal.contains(s) || !sc.workspace.contains(s.x, s.y)) break;
      const double perturbation = cfg.exploration_std > 0.0 ? cfg.exploration_std * noise(noise_rng) : 0.0;
      const ControlDecision c = policy.decide(t, s, perturbation);
      const auto ready = labeler.push(s, t, c.omega, barrier_values(sc, t, s));
      s = step(s, c.omega, sc.truth, sc.dt);
      for (std::size_t b = 0; b < ready.size(); ++b) out[b].push_back(ready[b]);
    }
  }
  return out;
}

}  // namespace hocbf
