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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amtrl/instance.hpp"
#include "amtrl/types.hpp"

namespace amtrl {

/// How the source objective weighs tasks.
///  per_task: (1/T) sum_t (1/n_t) |Y_t - X_t B w_t|^2, every task counts
///            equally whatever its sample size.
///  pooled:   (1/N) sum_t |Y_t - X_t B w_t|^2, every sample counts equally.
/// With per_task weights a task holding only floor samples pulls on B as
/// hard as one holding most of the budget, so concentrating samples on a few
/// relevant tasks buys much less than the relevance-weighted risk bound
/// suggests. Pooled weights are the form that bound is derived for.
enum class TaskWeighting { per_task, pooled };

std::string to_string(TaskWeighting w);
TaskWeighting task_weighting_from_string(const std::string& s);

struct FitOptions {
  TaskWeighting weighting = TaskWeighting::per_task;
  /// Stop when (loss[i-1] - loss[i]) <= tol * loss[i-1].
  double tol = 1e-10;
  int max_iters = 500;
  /// Number of trailing (B, W) iterates kept in FittedModel::snapshots.
  int snapshot_count = 1;
  /// Initial representation; spectral initialization when empty.
  std::optional<Matrix> warm_start_B;
  /// Ridge used by the per-task estimates of the spectral initialization.
  double init_ridge = 1e-8;
  /// Seed of the random orthonormal fallback initialization.
  std::uint64_t seed = 0;
  /// Largest d*k solved through the dense normal equations; conjugate
  /// gradient steps take over above it.
  Index direct_solve_limit = 20000;
};

struct ModelSnapshot {
  Matrix B;
  Matrix W;
};

struct FittedModel {
  Matrix B_hat;                       // d x k, orthonormal columns
  Matrix W_hat;                       // k x T
  std::optional<Vector> w_target_hat; // k, set by the caller after a target fit
  std::vector<double> train_loss_history;
  int iterations = 0;
  bool converged = false;
  std::string init_method;
  std::vector<ModelSnapshot> snapshots;  // oldest first

  double final_loss() const {
    return train_loss_history.empty() ? 0.0 : train_loss_history.back();
  }
};

/// Source objective under the given task weighting, with datasets
/// grouped by task index 1..T. W holds w_t in column t-1.
double source_objective(std::span<const TaskDataset> datasets, const Matrix& B, const Matrix& W,
                        TaskWeighting weighting = TaskWeighting::per_task);

/// Alternating least squares on the source objective. Datasets sharing a
/// task index are pooled; task indices must cover 1..T with n_t >= 1.
FittedModel fit_source(std::span<const TaskDataset> datasets, int k,
                       const FitOptions& options = {});

/// Minimum-norm least-squares head on the design X B_hat.
Vector fit_target_head(const Matrix& B_hat, const TaskDataset& target);
Vector fit_target_head(const FittedModel& model, const TaskDataset& target);

/// (B_hat w_hat - B* w*)^T Sigma (B_hat w_hat - B* w*) for the target task.
double excess_risk(const Matrix& B_hat, const Vector& w_hat, const GroundTruth& gt);
double excess_risk(const FittedModel& model, const GroundTruth& gt);

/// sqrt(1 - sigma_k(B_hat^T B_star)^2) for orthonormal d x k inputs.
double subspace_distance(const Matrix& B_hat, const Matrix& B_star);

}  // namespace amtrl
