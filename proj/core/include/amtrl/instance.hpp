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
#include <string>
#include <vector>

#include "amtrl/types.hpp"

namespace amtrl {

enum class CovarianceKind { identity, diagonal_bounded };

enum class InstanceKind { random, almost_sparse, aligned_worstcase, custom };

std::string to_string(CovarianceKind kind);
std::string to_string(InstanceKind kind);
CovarianceKind covariance_kind_from_string(const std::string& s);
InstanceKind instance_kind_from_string(const std::string& s);

struct InstanceMeta {
  InstanceKind kind = InstanceKind::custom;
  std::uint64_t seed = 0;
  /// sigma_min(W_star) > 0.
  bool diverse = false;
  /// d > T >= k >= 1.
  bool wide_regime = false;
  /// Relevance vector the target head was built from: the mixing vector for
  /// random instances, the almost-sparse vector, or all-ones for the aligned
  /// construction.
  std::optional<Vector> reference_nu;
  /// Generator parameter: sigma_min floor (random) or target norm c_w (aligned).
  double generator_param = 0.0;
};

/// Ground truth of the linear multi-task model
///   y = x^T B_star w_t + z,  z ~ N(0, sigma_z^2),  x ~ N(0, Sigma_t).
/// Task indices are 1-based: 1..T are sources, T+1 is the target.
struct GroundTruth {
  int d = 0;
  int k = 0;
  int T = 0;
  Matrix B_star;        // d x k, orthonormal columns
  Matrix W_star;        // k x T
  Vector w_target_star; // k
  double sigma_z = 0.0;
  CovarianceKind covariance_kind = CovarianceKind::identity;
  /// Diagonal of Sigma_t, shared by all tasks. All ones for identity.
  Vector covariance_diag;
  InstanceMeta meta;

  /// Head of task `task_index` in [1, T+1].
  Vector head(int task_index) const;
  /// Population regression vector B_star * head(task_index).
  Vector regression_vector(int task_index) const;
};

/// Checks shape consistency and the orthonormality of B_star (1e-10).
/// Throws std::invalid_argument on violation.
void validate(const GroundTruth& gt);

/// Fills in the diverse / wide_regime flags from the matrices.
void refresh_flags(GroundTruth& gt);

struct TaskDataset {
  int task_index = 0;
  Matrix X;  // n x d
  Vector Y;  // n
  std::uint64_t seed = 0;
  std::uint64_t draw = 0;

  Index n() const { return X.rows(); }
};

/// Orthonormal factor of a Gaussian rows x cols matrix with the first nonzero
/// entry of every column made positive.
Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed);

/// Gaussian instance: B_star from QR, W_star i.i.d. Gaussian rescaled so that
/// sigma_min(W_star) >= sigma_min_floor, target head W_star * nu for a random
/// mixing vector nu (stored in meta.reference_nu).
GroundTruth make_random_instance(int d, int k, int T, double sigma_z, double sigma_min_floor,
                                 std::uint64_t seed);

/// nu(1) = sqrt(1 - 1/(T-1)), nu(t) = 1/(T-1) for t >= 2.
Vector almost_sparse_nu(int T);

struct AlmostSparseInstance {
  GroundTruth gt;
  Vector reference_nu;
};

/// Instance whose target head is W_star * almost_sparse_nu(T), with the row
/// space of W_star built around that vector so it is also the minimum-L2
/// solution of W_star nu = w_target_star.
AlmostSparseInstance make_almost_sparse_instance(int d, int k, int T, double sigma_z,
                                                 std::uint64_t seed);

/// Almost rank-1 W_star whose rows align with the all-ones vector:
///   W_star = (c_w / T) u 1^T + s_k * sum_{i>=2} alpha_i beta_i^T,
///   s_k = c_w / (2 sqrt((k-1) T)),
/// with target head W_star 1 of norm c_w. Its minimum-L2 relevance vector is
/// all-ones, which spreads an L2 allocation evenly over every task.
GroundTruth make_aligned_worstcase_instance(int d, int k, int T, double c_w, std::uint64_t seed,
                                            double sigma_z = 0.0);

/// Draws n i.i.d. samples of task `task_index`. Deterministic in
/// (seed, task_index, n, draw); different draw indices give independent data.
TaskDataset sample_task(const GroundTruth& gt, int task_index, Index n, std::uint64_t seed,
                        std::uint64_t draw = 0);

/// Stacks b under a (same task index).
TaskDataset concat(const TaskDataset& a, const TaskDataset& b);

}  // namespace amtrl
