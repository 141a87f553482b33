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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "amtrl/allocation.hpp"
#include "amtrl/instance.hpp"
#include "amtrl/relevance.hpp"
#include "amtrl/rng.hpp"
#include "oracles/oracles.hpp"

namespace amtrl {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<std::int64_t> ints(std::initializer_list<std::int64_t> v) { return {v}; }

Vector random_nu(int T, std::uint64_t seed) {
  Stream rng(seed);
  Vector nu(T);
  for (int t = 0; t < T; ++t) nu(t) = rng.normal();
  return nu;
}

TEST(FixedNu, OneHot) {
  Vector nu = Vector::Zero(5);
  nu(0) = 1.0;
  const Allocation a = allocate_fixed_nu(nu, 100, 0);
  EXPECT_EQ(a.n, ints({100, 0, 0, 0, 0}));
  EXPECT_EQ(a.total(), 100);
}

TEST(FixedNu, Symmetric) {
  EXPECT_EQ(allocate_fixed_nu(Vector::Ones(4), 100, 0).n, ints({25, 25, 25, 25}));
}

TEST(FixedNu, BindingFloors) {
  const Vector nu = vec({10.0, 1.0, 1.0});
  const Allocation a = allocate_fixed_nu(nu, 120, 20);
  EXPECT_NEAR(a.continuous(0), 80.0, 1e-12);
  EXPECT_NEAR(a.continuous(1), 20.0, 1e-12);
  EXPECT_EQ(a.n, ints({80, 20, 20}));
  const Vector ref = oracle::projected_gradient_allocation(nu, 120.0, 20.0);
  const double f_ref = oracle::nu_tilde(nu, ref);
  EXPECT_LE(nu_tilde_objective(nu, a.continuous), f_ref * (1.0 + 1e-9));
}

TEST(FixedNu, AgreesWithBisectionAndProjectedGradient) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const int T = 2 + static_cast<int>(s % 19);
    const Vector nu = random_nu(T, 10 + s);
    const std::int64_t floor = 1 + static_cast<std::int64_t>(s % 7);
    const std::int64_t total = floor * T + 50 + 13 * static_cast<std::int64_t>(s);
    const Allocation a = allocate_fixed_nu(nu, total, floor);
    const double f = nu_tilde_objective(nu, a.continuous);
    const Vector bis = oracle::bisection_allocation(nu, static_cast<double>(total),
                                                    static_cast<double>(floor));
    EXPECT_LE((a.continuous - bis).cwiseAbs().maxCoeff(), 1e-6 * static_cast<double>(total));
    const Vector pg = oracle::projected_gradient_allocation(nu, static_cast<double>(total),
                                                            static_cast<double>(floor));
    EXPECT_LE(f, oracle::nu_tilde(nu, pg) * (1.0 + 1e-9)) << "seed " << s;
    EXPECT_NEAR(a.continuous.sum(), static_cast<double>(total), 1e-9 * static_cast<double>(total));
    EXPECT_EQ(a.total(), total);
    for (auto v : a.n) EXPECT_GE(v, floor);
  }
}

TEST(FixedNu, BeatsRandomIntegerAllocations) {
  std::mt19937_64 gen(5);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int T = 3 + static_cast<int>(s);
    const Vector nu = random_nu(T, 40 + s);
    const std::int64_t floor = 2, total = 300;
    const double f = nu_tilde_objective(nu, allocate_fixed_nu(nu, total, floor));
    for (int r = 0; r < 200; ++r) {
      std::vector<std::int64_t> n(static_cast<size_t>(T), floor);
      std::uniform_int_distribution<int> pick(0, T - 1);
      for (std::int64_t u = 0; u < total - floor * T; ++u) ++n[static_cast<size_t>(pick(gen))];
      EXPECT_LE(f, nu_tilde_objective(nu, n) * (1.0 + 1e-12));
    }
  }
}

TEST(FixedNu, FloorFreeEquality) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Vector nu = random_nu(8, 90 + s);
    const std::int64_t total = 1000;
    const Allocation a = allocate_fixed_nu(nu, total, 0);
    const double expected = nu.lpNorm<1>() * nu.lpNorm<1>() / static_cast<double>(total);
    EXPECT_NEAR(nu_tilde_objective(nu, a.continuous), expected, 1e-12 * expected);
  }
}

TEST(FixedNu, InvariantToScalingAndSign) {
  const Vector nu = random_nu(7, 3);
  const Allocation a = allocate_fixed_nu(nu, 500, 10);
  EXPECT_EQ(allocate_fixed_nu(-4.0 * nu, 500, 10).n, a.n);
}

TEST(FixedNu, PermutationEquivariant) {
  const Vector nu = vec({0.3, -2.0, 0.9, 0.05, 1.1});
  const Allocation a = allocate_fixed_nu(nu, 400, 5);
  const std::vector<int> perm = {4, 2, 0, 3, 1};
  Vector p(5);
  for (int i = 0; i < 5; ++i) p(i) = nu(perm[static_cast<size_t>(i)]);
  const Allocation b = allocate_fixed_nu(p, 400, 5);
  for (int i = 0; i < 5; ++i)
    EXPECT_NEAR(b.continuous(i), a.continuous(perm[static_cast<size_t>(i)]), 1e-9);
}

TEST(FixedNu, MonotoneInRelevance) {
  const Vector nu = vec({0.5, 1.0, 2.0, 4.0});
  const Allocation a = allocate_fixed_nu(nu, 1000, 10);
  for (int t = 1; t < 4; ++t) EXPECT_GE(a.continuous(t), a.continuous(t - 1));
}

TEST(FixedNu, ZeroVectorFallsBackToUniform) {
  const Allocation a = allocate_fixed_nu(Vector::Zero(4), 10, 1);
  EXPECT_EQ(a.n, ints({3, 3, 2, 2}));
  EXPECT_FALSE(a.warnings.empty());
}

TEST(FixedNu, AllFloorsBinding) {
  const Allocation a = allocate_fixed_nu(vec({5.0, 0.1, 0.0}), 30, 10);
  EXPECT_EQ(a.n, ints({10, 10, 10}));
}

TEST(FixedNu, InfeasibleBudget) {
  EXPECT_THROW(allocate_fixed_nu(Vector::Ones(3), 20, 10), InfeasibleError);
}

TEST(LpNq, SquaredProportions) {
  EXPECT_EQ(lpnq_allocation(vec({3.0, 4.0}), 2.0, 100, 0).n, ints({36, 64}));
}

TEST(LpNq, QOneIsFixedNu) {
  const Vector nu = random_nu(9, 17);
  EXPECT_EQ(lpnq_allocation(nu, 1.0, 777, 12).n, allocate_fixed_nu(nu, 777, 12).n);
}

TEST(LpNq, SquaredWithFloorsMatchesOracle) {
  const Vector nu = random_nu(10, 21);
  const Vector sq = nu.array().square();
  const Allocation a = lpnq_allocation(nu, 2.0, 2000, 30);
  const Vector bis = oracle::bisection_allocation(sq, 2000.0, 30.0);
  EXPECT_LE((a.continuous - bis).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Uniform, RemainderToLowIndices) {
  EXPECT_EQ(uniform_allocation(4, 100).n, ints({25, 25, 25, 25}));
  EXPECT_EQ(uniform_allocation(3, 10).n, ints({4, 3, 3}));
}

TEST(WaterFill, SolvesTheLevelEquation) {
  const Vector w = vec({3.0, 0.0, 1.0, 0.5});
  const WaterFill wf = water_fill(w, 100.0, 5.0);
  for (int t = 0; t < 4; ++t) EXPECT_NEAR(wf.n(t), std::max(wf.c_prime * w(t), 5.0), 1e-12);
  EXPECT_NEAR(wf.n.sum(), 100.0, 1e-12);
}

TEST(Rounding, LargestRemainder) {
  EXPECT_EQ(round_largest_remainder(vec({1.5, 1.5, 2.0}), 5), ints({2, 1, 2}));
  EXPECT_EQ(round_largest_remainder(vec({0.2, 0.7, 2.1}), 3), ints({0, 1, 2}));
  const std::vector<std::int64_t> r = round_largest_remainder(vec({3.3, 3.3, 3.4}), 10);
  EXPECT_EQ(std::accumulate(r.begin(), r.end(), std::int64_t{0}), 10);
}

TEST(NuTilde, Examples) {
  EXPECT_NEAR(nu_tilde_objective(vec({1.0, 1.0}), ints({50, 50})), 0.04, 1e-15);
  EXPECT_NEAR(nu_tilde_objective(vec({1.0, 0.0}), ints({50, 0})), 0.02, 1e-15);
  EXPECT_THROW(nu_tilde_objective(vec({1.0, 1.0}), ints({50, 0})), std::domain_error);
}

TEST(NuTilde, ProportionalIsMinimal) {
  const Vector nu = random_nu(6, 71);
  const double best = nu.lpNorm<1>() * nu.lpNorm<1>() / 600.0;
  std::mt19937_64 gen(1);
  for (int r = 0; r < 1000; ++r) {
    std::vector<std::int64_t> n(6, 1);
    std::uniform_int_distribution<int> pick(0, 5);
    for (int u = 0; u < 594; ++u) ++n[static_cast<size_t>(pick(gen))];
    EXPECT_GE(nu_tilde_objective(nu, n), best * (1.0 - 1e-12));
  }
}

TEST(Bilevel, SquareSystemIsUnique) {
  Stream rng(4);
  Matrix W(3, 3);
  for (Index i = 0; i < 9; ++i) W.data()[i] = rng.normal();
  const Vector w = vec({1.0, -0.5, 2.0});
  const BilevelResult r = bilevel_oracle(W, w, 1000, 1);
  EXPECT_LE((r.nu - W.lu().solve(w)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Bilevel, FullyConstrainedIsUniform) {
  Stream rng(5);
  Matrix W(2, 5);
  for (Index i = 0; i < W.size(); ++i) W.data()[i] = rng.normal();
  const BilevelResult r = bilevel_oracle(W, vec({1.0, 1.0}), 50, 10);
  EXPECT_EQ(r.allocation.n, std::vector<std::int64_t>(5, 10));
}

TEST(Bilevel, FloorFreeMatchesMinimumL1) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Stream rng(600 + s);
    Matrix W(3, 8);
    for (Index i = 0; i < W.size(); ++i) W.data()[i] = rng.normal();
    Vector w(3);
    for (Index i = 0; i < 3; ++i) w(i) = rng.normal();
    const BilevelResult r = bilevel_oracle(W, w, 1000000, 0);
    const Vector nu1 = l1_oracle_lp(W, w).nu;
    EXPECT_LE((r.nu.cwiseAbs() - nu1.cwiseAbs()).lpNorm<1>(), 1e-4);
    const double l1_obj = nu1.lpNorm<1>() * nu1.lpNorm<1>() / 1e6;
    EXPECT_NEAR(r.objective, l1_obj, 1e-6 * l1_obj);
  }
}

TEST(Cost, SaltusExamples) {
  const CostFunction f = CostFunction::saltus(10.0, 1.0, 5);
  EXPECT_EQ(f(5), 0.0);
  EXPECT_EQ(f(0), 0.0);
  EXPECT_EQ(f(8), 13.0);
}

TEST(Cost, LinearTotal) {
  const std::vector<CostFunction> fns(3, CostFunction::linear(2.5));
  Allocation a = uniform_allocation(3, 90);
  EXPECT_DOUBLE_EQ(eval_total_cost(a, fns), 2.5 * 90.0);
  const Allocation p1 = floor_allocation(3, 10);
  const Allocation inc = increments_over(a, p1);
  EXPECT_EQ(inc.n, ints({20, 20, 20}));
  EXPECT_DOUBLE_EQ(eval_cost(inc, p1, fns), 2.5 * 90.0);
}

TEST(Cost, PiecewiseConcave) {
  CostFunction f;
  f.kind = CostKind::piecewise_concave;
  f.C_fix = 5.0;
  f.C_var = 2.0;
  f.N_free = 3;
  f.breakpoints = {10.0};
  f.slopes = {0.5};
  f.validate();
  EXPECT_EQ(f(3), 0.0);
  EXPECT_DOUBLE_EQ(f(8), 5.0 + 2.0 * 5.0);
  EXPECT_DOUBLE_EQ(f(23), 5.0 + 2.0 * 10.0 + 0.5 * 10.0);
}

TEST(Cost, ValidationRejectsIncreasingSlopes) {
  CostFunction f;
  f.kind = CostKind::piecewise_concave;
  f.C_var = 1.0;
  f.breakpoints = {10.0};
  f.slopes = {2.0};
  EXPECT_THROW(f.validate(), std::invalid_argument);
}

TEST(CostAware, OneSparsePaysOneFixedCharge) {
  Vector nu = Vector::Zero(6);
  nu(2) = 1.3;
  const std::vector<CostFunction> fns(6, CostFunction::saltus(100.0, 1.0, 20));
  const Allocation a = cost_aware_allocate(nu, 1000, 20, fns);
  int paying = 0;
  for (auto v : a.n) paying += v > 20 ? 1 : 0;
  EXPECT_EQ(paying, 1);
  EXPECT_EQ(a.n[2], 1000 - 5 * 20);
}

TEST(CostAware, SparseRelevanceIsCheaperThanUniform) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const GroundTruth gt = make_random_instance(20, 3, 15, 0.0, 0.5, 900 + s);
    const Vector nu1 = l1_oracle_lp(gt.W_star, gt.w_target_star).nu;
    const std::vector<CostFunction> fns(15, CostFunction::saltus(100.0, 1.0, 20));
    const Allocation a = cost_aware_allocate(nu1, 1500, 20, fns);
    int paying = 0;
    for (auto v : a.n) paying += v > 20 ? 1 : 0;
    EXPECT_LE(paying, 3);
    EXPECT_LE(eval_total_cost(a, fns), eval_total_cost(uniform_allocation(15, 1500), fns));
  }
}

TEST(CostAware, LinearCostsReduceToFixedNu) {
  const Vector nu = vec({0.0, 2.0, 0.0, -1.0, 0.5});
  const std::vector<CostFunction> fns(5, CostFunction::linear(1.0));
  EXPECT_EQ(cost_aware_allocate(nu, 500, 10, fns).n, allocate_fixed_nu(nu, 500, 10).n);
}

TEST(CostAware, SupportEnumerationFindsCheapest) {
  const GroundTruth gt = make_random_instance(12, 2, 6, 0.0, 0.5, 31);
  const std::vector<CostFunction> fns(6, CostFunction::saltus(100.0, 1.0, 10));
  const Vector nu1 = l1_oracle_lp(gt.W_star, gt.w_target_star).nu;
  const double cap = 2.0 * nu_tilde_objective(nu1, allocate_fixed_nu(nu1, 1000, 10));
  const auto res = cost_support_enumeration(gt.W_star, gt.w_target_star, 1000, 10, fns, cap, 2);
  ASSERT_TRUE(res.has_value());
  EXPECT_LE(res->objective, cap);
  EXPECT_LE(res->support.size(), 2u);
  EXPECT_LE((gt.W_star * res->nu - gt.w_target_star).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(res->cost, eval_total_cost(cost_aware_allocate(nu1, 1000, 10, fns), fns) + 1e-9);
  EXPECT_FALSE(cost_support_enumeration(gt.W_star, gt.w_target_star, 1000, 10, fns, 0.0, 2));
}

}  // namespace
}  // namespace amtrl
