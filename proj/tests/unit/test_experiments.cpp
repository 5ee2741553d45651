#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hocbf/experiments.hpp"
#include "hocbf/scenario_io.hpp"

using namespace hocbf;

namespace {
ScenarioConfig exp1() { return load_scenario(HOCBF_SCENARIO_DIR "/experiment1_u.cfg"); }
}

TEST(RunEval, ReproducibleAndIndependentOfWorkerCount) {
  const ScenarioConfig sc = exp1();
  const RunReport a = run_eval(sc, {}, 6, 3, 1);
  const RunReport b = run_eval(sc, {}, 6, 3, 3);
  ASSERT_EQ(a.rollouts.size(), 6u);
  EXPECT_EQ(a.filter, "nominal");
  std::ostringstream ka, kb;
  write_report_kv(ka, a);
  write_report_kv(kb, b);
  EXPECT_EQ(ka.str(), kb.str());
  EXPECT_NE(ka.str().find("samples=6\n"), std::string::npos);
  EXPECT_NE(ka.str().find("safe_rate="), std::string::npos);
  EXPECT_THROW(run_eval(sc, {}, 0, 3), std::invalid_argument);
}

TEST(RunEval, StartsComeFromTheEvaluationRegion) {
  const ScenarioConfig sc = exp1();
  for (const auto& s : evaluation_starts(sc, 100, 5)) {
    EXPECT_GE(s.x, sc.eval.region.xmin);
    EXPECT_LE(s.x, sc.eval.region.xmax);
    EXPECT_GE(s.y, sc.eval.region.ymin);
    EXPECT_LE(s.y, sc.eval.region.ymax);
  }
}

TEST(Rollout, FarStartIsSafeAndCsvEndsAtGoal) {
  const ScenarioConfig sc = exp1();
  ScenarioConfig small = sc;
  small.train.trajectories = 2;
  small.train.steps = 60;
  small.train.hidden = {8, 8};
  const TrainingResult trained = learn_cbf(small);
  const TrajectoryLog log = rollout(small, trained.models, {2.5, -2.5, 1.5707963267948966});
  EXPECT_EQ(log.reason, StopReason::goal);
  EXPECT_GT(log.min_h(), 0.0);

  std::ostringstream csv;
  write_trajectory_csv(csv, log);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x,y,theta,omega,h_0,slack,reason");
  const auto last = text.substr(text.rfind('\n', text.size() - 2) + 1);
  EXPECT_EQ(last.substr(last.rfind(',') + 1), "goal\n");
}

TEST(Report, TableSummarizesRates) {
  const RunReport rep = run_eval(exp1(), {}, 3, 1, 1);
  std::ostringstream os;
  write_report_table(os, rep);
  EXPECT_NE(os.str().find("safe rate:"), std::string::npos);
  EXPECT_NE(os.str().find("filter: nominal"), std::string::npos);
}
