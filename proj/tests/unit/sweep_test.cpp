// Copyright 2026 The AMTRL Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "amtrl/sweep.hpp"

namespace amtrl {
namespace {

Json small_config() {
  return Json::parse(R"({
    "instance": {"kind": "almost_sparse", "d": 15, "k": 3, "T": 6, "sigma_z": 0.2, "seed": 3},
    "strategies": ["L1", "passive"],
    "budgets": [300, 600],
    "N_floor": 10,
    "seeds": 3,
    "params": {"n_target": 100}
  })");
}

// Drops the trailing wall_ms column.
std::string strip_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

TEST(Sweep, CountsRowsAndSummaries) {
  const SweepOutput out = run_sweep(sweep_config_from_json(small_config()));
  EXPECT_EQ(out.rows.size(), 12u);
  EXPECT_EQ(out.summary.size(), 4u);
  EXPECT_EQ(out.slopes.size(), 2u);
  for (const auto& s : out.summary) {
    EXPECT_EQ(s.runs, 3);
    EXPECT_EQ(s.ok_runs, 3);
    EXPECT_LE(s.q1_ER, s.median_ER);
    EXPECT_LE(s.median_ER, s.q3_ER);
  }
  const std::string csv = runs_csv(out);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kRunsHeader);
}

TEST(Sweep, DeterministicModuloTiming) {
  const SweepConfig cfg = sweep_config_from_json(small_config());
  const std::string a = strip_timing(runs_csv(run_sweep(cfg)));
  const std::string b = strip_timing(runs_csv(run_sweep(cfg)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(summary_csv(run_sweep(cfg)), summary_csv(run_sweep(cfg)));
}

TEST(Sweep, RejectsBadGrids) {
  Json j = small_config();
  j["budgets"] = {600, 300};
  EXPECT_THROW(sweep_config_from_json(j), std::invalid_argument);
  j = small_config();
  j["strategies"] = {"L7"};
  EXPECT_THROW(sweep_config_from_json(j), std::invalid_argument);
  j = small_config();
  j["seeds"] = 0;
  EXPECT_THROW(sweep_config_from_json(j), std::invalid_argument);
  j = small_config();
  j["budgets"] = "many";
  EXPECT_THROW(sweep_config_from_json(j), FormatError);
}

TEST(Sweep, InfeasibleRowsAreRecorded) {
  Json j = small_config();
  j["budgets"] = {30, 300};
  j["strategies"] = {"L1"};
  j["seeds"] = 1;
  const SweepOutput out = run_sweep(sweep_config_from_json(j));
  ASSERT_EQ(out.rows.size(), 2u);
  EXPECT_EQ(out.rows[0].status, "infeasible");
  EXPECT_EQ(out.rows[1].status, "ok");
}

TEST(Sweep, WritesOutputFiles) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "amtrl_unit_sweep";
  fs::remove_all(dir);
  Json j = small_config();
  j["write_run_json"] = true;
  const SweepConfig cfg = sweep_config_from_json(j);
  write_sweep(run_sweep(cfg), cfg, dir);
  for (const char* f : {"runs.csv", "summary.csv", "slopes.csv", "plot_L1.dat", "plot_passive.dat"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_TRUE(fs::exists(dir / "runs" / "L1_300_1000.json"));
  fs::remove_all(dir);
}

TEST(Strategy, KnownStrategiesRun) {
  InstanceSpec spec;
  spec.kind = InstanceKind::almost_sparse;
  spec.d = 12;
  spec.k = 2;
  spec.T = 5;
  const GroundTruth gt = make_instance(spec);
  RunParams p;
  p.k = 2;
  p.N_tot = 500;
  p.N_floor = 10;
  p.n_target = 50;
  for (const auto& s : known_strategies()) {
    const RunResult r = run_strategy(s, gt, p);
    EXPECT_EQ(r.strategy, s);
    EXPECT_TRUE(std::isfinite(r.excess_risk)) << s;
  }
  EXPECT_THROW(run_strategy("bogus", gt, p), std::invalid_argument);
}

TEST(Params, ReadFromJson) {
  const RunParams p = run_params_from_json(
      Json::parse(R"({"k": 4, "N_tot": 900, "lambda": 0.5, "nu_average": 3, "fit_tol": 1e-6,
                    "fit_weighting": "pooled"})"));
  EXPECT_EQ(p.k, 4);
  EXPECT_EQ(p.N_tot, 900);
  EXPECT_EQ(p.lambda_policy, LambdaPolicy::explicit_value);
  EXPECT_EQ(p.lambda, 0.5);
  EXPECT_EQ(p.nu_average, 3);
  EXPECT_EQ(p.fit.tol, 1e-6);
  EXPECT_EQ(p.fit.weighting, TaskWeighting::pooled);
  EXPECT_THROW(run_params_from_json(Json::parse(R"({"fit_weighting": "equal"})")), FormatError);
}

}  // namespace
}  // namespace amtrl
