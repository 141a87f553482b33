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

#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amtrl/allocation.hpp"
#include "amtrl/instance.hpp"
#include "amtrl/relevance.hpp"
#include "amtrl/trainer.hpp"

namespace amtrl {

/// Source of fresh i.i.d. task samples.
class TaskOracle {
 public:
  virtual ~TaskOracle() = default;

  /// n samples of task `task_index` (1..T sources, T+1 target). The same
  /// (task, n, draw) always returns the same data; distinct draws are
  /// independent.
  virtual TaskDataset sample(int task_index, Index n, std::uint64_t draw) = 0;

  virtual int d() const = 0;
  virtual int T() const = 0;

  /// Ground truth for evaluation; nullptr when unavailable.
  virtual const GroundTruth* truth() const { return nullptr; }

  /// Source samples handed out so far (target draws excluded).
  std::int64_t source_samples_drawn() const { return source_drawn_.load(); }

 protected:
  void count(int task_index, Index n) {
    if (task_index <= T()) source_drawn_ += n;
  }

 private:
  std::atomic<std::int64_t> source_drawn_{0};
};

class GroundTruthOracle : public TaskOracle {
 public:
  GroundTruthOracle(GroundTruth gt, std::uint64_t seed);

  TaskDataset sample(int task_index, Index n, std::uint64_t draw) override;
  int d() const override { return gt_.d; }
  int T() const override { return gt_.T; }
  const GroundTruth* truth() const override { return &gt_; }

 private:
  GroundTruth gt_;
  std::uint64_t seed_;
};

enum class LambdaPolicy { lazy, theory_rule, explicit_value };

std::string to_string(LambdaPolicy p);
LambdaPolicy lambda_policy_from_string(const std::string& s);

struct RunParams {
  int k = 1;
  std::int64_t N_floor = 100;
  /// Total source budget of the final allocation, phase-1 samples included.
  std::int64_t N_tot = 0;
  std::int64_t n_target = 500;
  LambdaPolicy lambda_policy = LambdaPolicy::lazy;
  double lambda = kLazyLambda;
  /// Number of trailing fit iterates whose Lasso solutions are averaged.
  int nu_average = 1;
  /// Phase-2 refits start from the phase-1 representation.
  bool warm_start = true;
  std::uint64_t seed = 0;
  FitOptions fit;
  LassoOptions lasso;

  // Multi-stage schedule.
  int stages = 4;
  double growth = 2.0;
  double beta_1 = 0.0;

  // Known-relevance runs.
  double q = 1.0;
  std::optional<Vector> nu_ref;
};

struct StageSummary {
  /// Cumulative per-task sample counts after the stage.
  Allocation allocation;
  double train_loss = 0.0;
  double subspace_distance = 0.0;
  double excess_risk = 0.0;
  int fit_iterations = 0;
};

struct RunResult {
  std::string strategy;
  std::uint64_t seed = 0;
  std::int64_t N_tot = 0;
  std::int64_t N_floor = 0;
  std::vector<StageSummary> stages;
  /// Relevance estimates in the order they were produced.
  std::vector<Vector> nu_history;
  /// The vector the final allocation was derived from.
  Vector nu;
  double nu_l1 = 0.0;
  int support = 0;
  double excess_risk = 0.0;
  double subspace_distance = 0.0;
  /// Distinct source samples used; data reused across stages counts once.
  std::int64_t total_samples = 0;
  std::int64_t target_samples = 0;
  double wall_ms = 0.0;
  std::string status = "ok";
};

/// Two phases: floors everywhere, Lasso relevance, then the remaining budget
/// split by allocate_fixed_nu and a refit on all data.
RunResult run_l1_amtrl(TaskOracle& oracle, const RunParams& params);

/// As run_l1_amtrl with the minimum-L2 relevance vector and q = 2.
RunResult run_l2_amtrl(TaskOracle& oracle, const RunParams& params);

/// N_tot / T samples per task.
RunResult run_passive(TaskOracle& oracle, const RunParams& params);

/// One allocation from params.nu_ref with exponent params.q.
RunResult run_known_nu(TaskOracle& oracle, const RunParams& params);

/// Stage i sets per-task totals max{floor(beta_i |nu(t)| / |nu|_1), N_floor},
/// starting from nu = all-ones, and tops every task up to its total before
/// refitting and re-estimating nu. beta_{i+1} = growth * beta_i.
RunResult run_multistage(TaskOracle& oracle, const RunParams& params);

/// Lasso regularization selected by the policy for an estimated (W, w).
double select_lambda(const RunParams& params, const Matrix& W_hat, const Vector& w_hat);

}  // namespace amtrl
