#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hocbf/barrier.hpp"
#include "hocbf/dynamics.hpp"
#include "hocbf/errors.hpp"
#include "hocbf/nominal_control.hpp"
#include "hocbf/safety_filter.hpp"

namespace hocbf {

/// Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
struct Region {
  double xmin = -3.0;
  double xmax = 3.0;
  double ymin = -3.0;
  double ymax = 3.0;

  [[nodiscard]] bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
  [[nodiscard]] bool contains(const Region& o) const {
    return o.xmin >= xmin && o.xmax <= xmax && o.ymin >= ymin && o.ymax <= ymax;
  }
  void validate(const std::string& what) const {
    if (!(xmin < xmax) || !(ymin < ymax)) throw ValidationError(what + ": empty region");
  }
};

/// Which control attributes a central-difference label. `center` uses the
/// control applied from the middle sample; `window_mean` averages the two
/// controls held over the window, which is what the second difference of a
/// zero-order-hold trajectory actually measures.
enum class LabelControl { center, window_mean };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch = 64;
  std::size_t buffer = 10000;
  std::size_t trajectories = 40;
  std::size_t steps = 400;
  std::uint64_t seed = 7;
  std::size_t label_window = 1;  // odd; 1 = raw second differences
  LabelControl label_control = LabelControl::center;
  std::size_t updates_per_step = 1;
  double exploration_std = 0.0;  // rad/s, Gaussian noise on the nominal control
  double start_time_max = 0.0;   // s, initial clock drawn from [0, start_time_max]
  std::vector<int> hidden{200, 200};
  Region region;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("train.learning_rate must be positive");
    if (batch == 0 || buffer == 0) throw ValidationError("train.batch and train.buffer must be positive");
    if (batch > buffer) throw ValidationError("train.batch must not exceed train.buffer");
    if (steps < 2) throw ValidationError("train.steps must be at least 2");
    if (label_window == 0 || label_window % 2 == 0)
      throw ValidationError("train.label_window must be odd");
    if (updates_per_step == 0) throw ValidationError("train.updates_per_step must be positive");
    if (!(start_time_max >= 0.0)) throw ValidationError("train.start_time_max must be nonnegative");
    if (!(exploration_std >= 0.0)) throw ValidationError("train.exploration_std must be nonnegative");
    if (hidden.empty()) throw ValidationError("train.hidden needs at least one layer");
    for (int h : hidden)
      if (h <= 0) throw ValidationError("train.hidden widths must be positive");
    region.validate("train.region");
  }
};

struct EvalConfig {
  Region region{-2.5, -1.5, -2.5, -1.5};
  std::size_t samples = 50;
  std::uint64_t seed = 1;
};

enum class FilterKind { ecbf, hocbf };

struct FilterSpec {
  FilterKind kind = FilterKind::ecbf;
  EcbfGain gain{{1.0, 6.0}};
  HocbfChain chain;
  std::optional<ControlBox> box;
};

struct ScenarioConfig {
  std::string name;
  Region workspace;
  std::vector<BarrierSpec> barriers;
  GoalSpec goal;
  GoToGoalGains controller;
  SystemParams nominal;
  SystemParams truth;
  FilterSpec filter;
  double dt = 0.1;
  std::size_t max_steps = 2000;
  TrainConfig train;
  EvalConfig eval;

  void validate() const {
    workspace.validate("workspace");
    if (barriers.empty()) throw ValidationError("scenario needs at least one obstacle");
    for (const auto& b : barriers) b.validate();
    goal.validate();
    if (!(controller.k_theta > 0.0)) throw ValidationError("controller.k_theta must be positive");
    if (!(controller.omega_max > 0.0)) throw ValidationError("controller.omega_max must be positive");
    nominal.validate("nominal");
    truth.validate("true");
    if (filter.kind == FilterKind::ecbf) {
      if (filter.gain.order() != 2) throw ValidationError("filter.gain must have two entries");
      filter.gain.validate();
    } else {
      filter.chain.validate();
      if (filter.chain.order() != 2) throw ValidationError("filter chain must have order 2");
    }
    if (filter.box && !(filter.box->lo < filter.box->hi))
      throw ValidationError("filter.omega_box must satisfy lo < hi");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    if (max_steps == 0) throw ValidationError("max_steps must be positive");
    train.validate();
    eval.region.validate("eval.region");
    if (!workspace.contains(eval.region))
      throw ValidationError("eval.region must lie inside the workspace");
    if (!workspace.contains(train.region))
      throw ValidationError("train.region must lie inside the workspace");
    if (eval.samples == 0) throw ValidationError("eval.samples must be positive");
  }
};

}  // namespace hocbf
