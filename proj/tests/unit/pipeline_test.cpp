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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "amtrl/instance.hpp"
#include "amtrl/pipeline.hpp"
#include "amtrl/relevance.hpp"
#include "amtrl/stats.hpp"

namespace amtrl {
namespace {

RunParams params_for(const GroundTruth& gt, std::int64_t N_tot, std::int64_t floor,
                     std::uint64_t seed) {
  RunParams p;
  p.k = gt.k;
  p.N_tot = N_tot;
  p.N_floor = floor;
  p.seed = seed;
  p.n_target = 200;
  return p;
}

// Instance whose target head equals the head of source task 1.
GroundTruth one_sparse_instance(std::uint64_t seed) {
  GroundTruth gt = make_random_instance(15, 2, 6, 0.1, 1.0, seed);
  gt.w_target_star = gt.W_star.col(0);
  Vector nu = Vector::Zero(6);
  nu(0) = 1.0;
  gt.meta.reference_nu = nu;
  return gt;
}

TEST(Oracle, CountsSourceSamplesOnly) {
  GroundTruthOracle oracle(make_random_instance(8, 2, 3, 0.1, 1.0, 1), 5);
  oracle.sample(1, 10, 0);
  oracle.sample(3, 7, 1);
  oracle.sample(4, 100, 0);
  EXPECT_EQ(oracle.source_samples_drawn(), 17);
  EXPECT_EQ(oracle.T(), 3);
  EXPECT_EQ(oracle.d(), 8);
  ASSERT_NE(oracle.truth(), nullptr);
}

TEST(L1Amtrl, NoiselessRecovery) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.0, 1.0, 3);
  GroundTruthOracle oracle(gt, 7);
  const RunResult r = run_l1_amtrl(oracle, params_for(gt, 2000, 100, 1));
  EXPECT_LE(r.excess_risk, 1e-10);
  EXPECT_EQ(r.status, "ok");
  EXPECT_EQ(r.stages.size(), 2u);
  EXPECT_EQ(r.stages.back().allocation.total(), 2000);
  EXPECT_EQ(r.total_samples, 2000);
  EXPECT_EQ(oracle.source_samples_drawn(), 2000);
}

TEST(L1Amtrl, ConcentratesOnTheRelevantTask) {
  const GroundTruth gt = one_sparse_instance(12);
  GroundTruthOracle oracle(gt, 3);
  const std::int64_t N = 3000, floor = 50;
  const RunResult r = run_l1_amtrl(oracle, params_for(gt, N, floor, 2));
  const Allocation& a = r.stages.back().allocation;
  EXPECT_GE(a.n[0], N - (gt.T - 1) * floor - 1);
  for (int t = 1; t < gt.T; ++t) EXPECT_GE(a.n[static_cast<size_t>(t)], floor);
  EXPECT_EQ(a.total(), N);
}

TEST(L1Amtrl, DeterministicForFixedSeed) {
  const GroundTruth gt = make_random_instance(12, 3, 6, 0.3, 1.0, 4);
  GroundTruthOracle o1(gt, 9), o2(gt, 9);
  const RunResult a = run_l1_amtrl(o1, params_for(gt, 1500, 40, 5));
  const RunResult b = run_l1_amtrl(o2, params_for(gt, 1500, 40, 5));
  EXPECT_EQ(a.nu, b.nu);
  EXPECT_EQ(a.excess_risk, b.excess_risk);
  EXPECT_EQ(a.stages.back().allocation.n, b.stages.back().allocation.n);
  EXPECT_EQ(a.subspace_distance, b.subspace_distance);
}

TEST(L1Amtrl, InfeasibleBudget) {
  const GroundTruth gt = make_random_instance(12, 3, 6, 0.3, 1.0, 4);
  GroundTruthOracle oracle(gt, 9);
  EXPECT_THROW(run_l1_amtrl(oracle, params_for(gt, 100, 20, 5)), InfeasibleError);
  RunParams p = params_for(gt, 1000, 0, 5);
  EXPECT_THROW(run_l1_amtrl(oracle, p), std::invalid_argument);
}

TEST(L1Amtrl, SnapshotAveragingAndTheoryRule) {
  const GroundTruth gt = make_random_instance(12, 3, 6, 0.3, 1.0, 4);
  GroundTruthOracle oracle(gt, 9);
  RunParams p = params_for(gt, 2000, 40, 5);
  p.nu_average = 3;
  p.lambda_policy = LambdaPolicy::theory_rule;
  const RunResult r = run_l1_amtrl(oracle, p);
  EXPECT_EQ(r.status, "ok");
  EXPECT_TRUE(std::isfinite(r.excess_risk));
  EXPECT_EQ(r.nu.size(), gt.T);
}

TEST(L2Amtrl, NoiselessRecovery) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.0, 1.0, 3);
  GroundTruthOracle oracle(gt, 7);
  EXPECT_LE(run_l2_amtrl(oracle, params_for(gt, 2000, 100, 1)).excess_risk, 1e-10);
}

TEST(L2Amtrl, AlignedInstanceSpreadsEvenly) {
  const GroundTruth gt = make_aligned_worstcase_instance(20, 3, 8, 1.0, 5, 0.05);
  RunParams p = params_for(gt, 8000, 100, 3);
  p.nu_ref = min_l2_solution(gt.W_star, gt.w_target_star).nu;
  p.q = 2.0;
  GroundTruthOracle oracle(gt, 1);
  const RunResult r = run_known_nu(oracle, p);
  for (auto n : r.stages.back().allocation.n) EXPECT_EQ(n, 1000);
}

TEST(Passive, ExactlyUniformWhenDivisible) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.1, 1.0, 3);
  GroundTruthOracle oracle(gt, 7);
  const RunResult r = run_passive(oracle, params_for(gt, 1000, 0, 1));
  EXPECT_EQ(r.stages.back().allocation.n, std::vector<std::int64_t>(5, 200));
}

TEST(Passive, RemainderRounding) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.1, 1.0, 3);
  GroundTruthOracle oracle(gt, 7);
  const RunResult r = run_passive(oracle, params_for(gt, 1003, 0, 1));
  const std::vector<std::int64_t> expected = {201, 201, 201, 200, 200};
  EXPECT_EQ(r.stages.back().allocation.n, expected);
  EXPECT_EQ(r.total_samples, 1003);
}

TEST(KnownNu, FloorFreeObjectiveEquality) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.1, 1.0, 3);
  RunParams p = params_for(gt, 1000, 0, 1);
  const Vector nu = *gt.meta.reference_nu;
  p.nu_ref = nu;
  GroundTruthOracle oracle(gt, 7);
  const RunResult r = run_known_nu(oracle, p);
  const double expected = nu.lpNorm<1>() * nu.lpNorm<1>() / 1000.0;
  EXPECT_NEAR(nu_tilde_objective(nu, r.stages.back().allocation.continuous), expected,
              1e-12 * expected);
}

TEST(KnownNu, SquareSystemStrategiesAgree) {
  const GroundTruth gt = make_random_instance(10, 3, 3, 0.1, 1.0, 3);
  const Vector nu = gt.W_star.lu().solve(gt.w_target_star);
  RunParams p = params_for(gt, 900, 10, 1);
  p.nu_ref = nu;
  GroundTruthOracle o1(gt, 7), o2(gt, 7);
  const Allocation a1 = run_known_nu(o1, p).stages.back().allocation;
  p.nu_ref = min_l2_solution(gt.W_star, gt.w_target_star).nu;
  const Allocation a2 = run_known_nu(o2, p).stages.back().allocation;
  for (size_t t = 0; t < 3; ++t) EXPECT_LE(std::abs(a1.n[t] - a2.n[t]), 1);
}

TEST(KnownNu, RequiresReference) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.1, 1.0, 3);
  GroundTruthOracle oracle(gt, 7);
  EXPECT_THROW(run_known_nu(oracle, params_for(gt, 1000, 0, 1)), std::invalid_argument);
}

TEST(Multistage, SingleStageIsPassiveWithFloor) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.1, 1.0, 3);
  RunParams p = params_for(gt, 0, 20, 1);
  p.stages = 1;
  p.beta_1 = 500;
  GroundTruthOracle oracle(gt, 7);
  const RunResult r = run_multistage(oracle, p);
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_EQ(r.stages[0].allocation.n, std::vector<std::int64_t>(5, 100));
}

TEST(Multistage, SampleAccounting) {
  const GroundTruth gt = make_random_instance(12, 3, 8, 0.2, 1.0, 6);
  RunParams p = params_for(gt, 0, 10, 2);
  p.stages = 4;
  p.growth = 2.0;
  p.beta_1 = 400;
  GroundTruthOracle oracle(gt, 8);
  const RunResult r = run_multistage(oracle, p);
  ASSERT_EQ(r.stages.size(), 4u);
  const double bound = 400.0 * (1 + 2 + 4 + 8) + static_cast<double>(p.N_floor * gt.T) * 4;
  EXPECT_LE(static_cast<double>(r.total_samples), bound);
  EXPECT_EQ(r.total_samples, oracle.source_samples_drawn());
  for (size_t s = 1; s < r.stages.size(); ++s)
    for (size_t t = 0; t < 8; ++t)
      EXPECT_GE(r.stages[s].allocation.n[t], r.stages[s - 1].allocation.n[t]);
  EXPECT_EQ(r.nu_history.size(), 4u);
}

TEST(Multistage, RelevanceEstimateStabilizes) {
  std::vector<double> first, last;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GroundTruth gt = make_random_instance(15, 3, 8, 0.3, 1.0, 40 + seed);
    const Vector nu1 = l1_oracle_lp(gt.W_star, gt.w_target_star).nu;
    RunParams p = params_for(gt, 0, 10, seed);
    p.stages = 4;
    p.beta_1 = 300;
    GroundTruthOracle oracle(gt, seed);
    const RunResult r = run_multistage(oracle, p);
    // Heads are only defined up to the sign and basis of B_hat; compare in
    // magnitude, which the allocation depends on.
    first.push_back((r.nu_history.front().cwiseAbs() - nu1.cwiseAbs()).lpNorm<1>());
    last.push_back((r.nu_history.back().cwiseAbs() - nu1.cwiseAbs()).lpNorm<1>());
  }
  EXPECT_LT(median(last), median(first));
}

TEST(SelectLambda, Policies) {
  const GroundTruth gt = make_random_instance(10, 2, 5, 0.1, 1.0, 3);
  RunParams p = params_for(gt, 1000, 10, 1);
  EXPECT_EQ(select_lambda(p, gt.W_star, gt.w_target_star), kLazyLambda);
  p.lambda_policy = LambdaPolicy::explicit_value;
  p.lambda = 0.25;
  EXPECT_EQ(select_lambda(p, gt.W_star, gt.w_target_star), 0.25);
  p.lambda_policy = LambdaPolicy::theory_rule;
  EXPECT_GT(select_lambda(p, gt.W_star, gt.w_target_star), 0.0);
  EXPECT_EQ(lambda_policy_from_string("theory_rule"), LambdaPolicy::theory_rule);
  EXPECT_THROW(lambda_policy_from_string("bogus"), std::invalid_argument);
}

TEST(Consistency, DoublingSamplesReducesMedianRisk) {
  const GroundTruth gt = make_random_instance(15, 3, 10, 0.5, 1.0, 21);
  std::vector<double> small, large;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunParams p = params_for(gt, 1000, 0, seed);
    p.nu_ref = *gt.meta.reference_nu;
    p.n_target = 2000;
    GroundTruthOracle o1(gt, seed), o2(gt, seed);
    small.push_back(run_known_nu(o1, p).excess_risk);
    p.N_tot = 2000;
    large.push_back(run_known_nu(o2, p).excess_risk);
  }
  EXPECT_LT(median(large), median(small));
}

}  // namespace
}  // namespace amtrl
