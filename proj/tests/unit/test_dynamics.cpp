#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hocbf/dynamics.hpp"

using namespace hocbf;

namespace {

// Exact flow of the unicycle for constant omega (circular arc).
RobotState arc(const RobotState& s, double omega, const SystemParams& p, double t) {
  const double v = p.speed();
  const double k = p.turn_gain() * omega;
  if (k == 0.0) return {s.x + v * t * std::cos(s.theta), s.y + v * t * std::sin(s.theta), s.theta};
  const double th = s.theta + k * t;
  return {s.x + v / k * (std::sin(th) - std::sin(s.theta)), s.y - v / k * (std::cos(th) - std::cos(s.theta)),
          th};
}

double dist(const RobotState& a, const RobotState& b) {
  return std::hypot(a.x - b.x, a.y - b.y, wrap_angle(a.theta - b.theta));
}

}  // namespace

TEST(Drift, ReferenceValues) {
  const SystemParams p{0.1, 0.1, 1.0};
  const auto f0 = drift({0, 0, 0}, p);
  EXPECT_DOUBLE_EQ(f0[0], 0.1);
  EXPECT_DOUBLE_EQ(f0[1], 0.0);
  EXPECT_DOUBLE_EQ(f0[2], 0.0);
  const auto f1 = drift({0, 0, std::numbers::pi / 2}, p);
  EXPECT_NEAR(f1[0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(f1[1], 0.1);
  const auto f2 = drift({2, 0, 0}, SystemParams{0.07, 0.1, 1.0});
  EXPECT_DOUBLE_EQ(f2[0], 0.07);
}

TEST(ControlDirection, ReferenceValues) {
  EXPECT_DOUBLE_EQ(control_direction({0.1, 0.1, 1.0})[2], 1.0);
  EXPECT_NEAR(control_direction({0.1, 0.13, 1.0})[2], 0.76923, 1e-5);
  EXPECT_NEAR(control_direction({0.07, 0.1, 1.0})[2], 0.7, 1e-15);
  EXPECT_EQ(control_direction({0.1, 0.1, 1.0})[0], 0.0);
}

TEST(SystemParams, Validation) {
  EXPECT_THROW((SystemParams{0.1, 0.0, 1.0}.validate()), ValidationError);
  EXPECT_THROW((SystemParams{-0.1, 0.1, 1.0}.validate()), ValidationError);
  EXPECT_THROW((SystemParams{0.1, 0.1, 0.0}.validate()), ValidationError);
  EXPECT_NO_THROW((SystemParams{0.1, 0.1, -1.0}.validate()));
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-7.0), -7.0 + 2 * std::numbers::pi, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    const double w = wrap_angle(a(rng));
    EXPECT_GT(w, -std::numbers::pi);
    EXPECT_LE(w, std::numbers::pi);
  }
}

TEST(VectorField, ControlAffineDecompositionIsExact) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int i = 0; i < 200; ++i) {
    const RobotState s{d(rng), d(rng), d(rng)};
    const SystemParams p{0.05 + std::abs(d(rng)) / 10, 0.05 + std::abs(d(rng)) / 10, d(rng)};
    const double w = d(rng);
    const auto f = vector_field(s, w, p);
    const StateDerivative g = drift(s, p) + control_direction(p) * w;
    EXPECT_EQ(f, g);
  }
}

TEST(Step, StraightLine) {
  const SystemParams p{0.1, 0.1, 1.0};
  const RobotState n = step({0, 0, 0}, 0.0, p, 1.0);
  EXPECT_NEAR(n.x, 0.1, 1e-14);
  EXPECT_NEAR(n.y, 0.0, 1e-14);
  EXPECT_EQ(n.theta, 0.0);
}

TEST(Step, ZeroOmegaPreservesThetaExactly) {
  const SystemParams p{0.1, 0.1, 1.0};
  const RobotState s{0.3, -1.2, 2.1};
  RobotState n = s;
  for (int k = 0; k < 100; ++k) n = step(n, 0.0, p, 0.1);
  EXPECT_EQ(n.theta, s.theta);
  // Distance travelled per step is r u dt.
  const RobotState m = step(s, 0.0, p, 0.1);
  EXPECT_NEAR(std::hypot(m.x - s.x, m.y - s.y), 0.01, 1e-15);
}

TEST(Step, RewrapsTheta) {
  const SystemParams p{0.1, 0.1, 1.0};
  const RobotState n = step({0, 0, 3.1}, 10.0, p, 0.1);
  EXPECT_LE(n.theta, std::numbers::pi);
  EXPECT_GT(n.theta, -std::numbers::pi);
}

TEST(Step, MatchesArcFlow) {
  const SystemParams p{0.1, 0.1, 0.7};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int i = 0; i < 100; ++i) {
    const RobotState s{d(rng), d(rng), d(rng)};
    const double w = 2 * d(rng);
    // RK4 local error is bounded by the fifth Taylor term, v k^4 dt^5 / 120.
    const double k = p.turn_gain() * w;
    EXPECT_LT(dist(step(s, w, p, 0.1), arc(s, w, p, 0.1)), p.speed() * std::pow(k, 4) * 1e-5 / 120 + 1e-15);
  }
}

TEST(Step, FourthOrderConvergence) {
  const SystemParams p{0.1, 0.1, 1.0};
  const RobotState s{0.5, -0.5, 0.3};
  const double w = 3.0;
  const double T = 2.0;
  auto integrate = [&](double dt) {
    RobotState x = s;
    const int n = static_cast<int>(std::lround(T / dt));
    for (int k = 0; k < n; ++k) x = step(x, w, p, dt);
    return x;
  };
  const RobotState ref = arc(s, w, p, T);
  const double e1 = dist(integrate(0.2), ref);
  const double e2 = dist(integrate(0.1), ref);
  // Halving dt should shrink the error by about 2^4.
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Step, Deterministic) {
  const SystemParams p{0.1, 0.13, 1.0};
  const RobotState s{0.1, 0.2, 0.3};
  const RobotState a = step(s, 1.7, p, 0.1);
  const RobotState b = step(s, 1.7, p, 0.1);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.theta, b.theta);
}

TEST(Simulate, StopsImmediatelyInsideGoal) {
  const auto stop = [](double, const RobotState& s, const std::vector<double>&) {
    return std::abs(s.x) < 0.5 && std::abs(s.y) < 0.5 ? StopReason::goal : StopReason::none;
  };
  const auto log = simulate({0, 0, 0}, [](double, const RobotState&) { return ControlDecision{}; },
                            SystemParams{}, 0.1, 100, stop);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log.reason, StopReason::goal);
  EXPECT_EQ(log.samples[0].omega, 0.0);
}

TEST(Simulate, StraightLineExitsWorkspace) {
  const auto stop = [](double, const RobotState& s, const std::vector<double>&) {
    return std::abs(s.x) > 3 || std::abs(s.y) > 3 ? StopReason::exit : StopReason::none;
  };
  const auto log = simulate({-2.5, -2.5, 0}, [](double, const RobotState&) { return ControlDecision{}; },
                            SystemParams{}, 0.1, 10000, stop);
  EXPECT_EQ(log.reason, StopReason::exit);
  // 5.5 m at 0.1 m/s.
  EXPECT_NEAR(log.samples.back().t, 55.1, 0.2);
  for (std::size_t k = 1; k < log.size(); ++k)
    EXPECT_NEAR(log.samples[k].t - log.samples[k - 1].t, 0.1, 1e-12);
}

TEST(Simulate, MaxStepsBoundsTheLog) {
  const auto log = simulate({0, 0, 0}, [](double, const RobotState&) { return ControlDecision{1.0}; },
                            SystemParams{}, 0.1, 7, {});
  EXPECT_EQ(log.size(), 8u);
  EXPECT_EQ(log.reason, StopReason::max_steps);
}

TEST(Simulate, RecordsProbeAndMinH) {
  const auto probe = [](double t, const RobotState&) { return std::vector<double>{1.0 - t, 2.0}; };
  const auto log = simulate({0, 0, 0}, [](double, const RobotState&) { return ControlDecision{}; },
                            SystemParams{}, 0.1, 5, {}, probe);
  EXPECT_NEAR(log.min_h(), 0.5, 1e-12);
  EXPECT_EQ(log.samples[2].h.size(), 2u);
}
