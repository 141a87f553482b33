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

#include "amtrl/instance.hpp"

#include <cmath>

#include "amtrl/rng.hpp"

namespace amtrl {

std::string to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::identity:
      return "identity";
    case CovarianceKind::diagonal_bounded:
      return "diagonal_bounded";
  }
  return "identity";
}

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::random:
      return "random";
    case InstanceKind::almost_sparse:
      return "almost_sparse";
    case InstanceKind::aligned_worstcase:
      return "aligned_worstcase";
    case InstanceKind::custom:
      return "custom";
  }
  return "custom";
}

CovarianceKind covariance_kind_from_string(const std::string& s) {
  if (s == "identity") return CovarianceKind::identity;
  if (s == "diagonal_bounded") return CovarianceKind::diagonal_bounded;
  throw std::invalid_argument("unknown covariance kind: " + s);
}

InstanceKind instance_kind_from_string(const std::string& s) {
  if (s == "random") return InstanceKind::random;
  if (s == "almost_sparse") return InstanceKind::almost_sparse;
  if (s == "aligned_worstcase") return InstanceKind::aligned_worstcase;
  if (s == "custom") return InstanceKind::custom;
  throw std::invalid_argument("unknown instance kind: " + s);
}

Vector GroundTruth::head(int task_index) const {
  require(task_index >= 1 && task_index <= T + 1,
          "task index " + std::to_string(task_index) + " outside [1, " + std::to_string(T + 1) +
              "]");
  if (task_index == T + 1) return w_target_star;
  return W_star.col(task_index - 1);
}

Vector GroundTruth::regression_vector(int task_index) const { return B_star * head(task_index); }

void validate(const GroundTruth& gt) {
  require(gt.d >= 1 && gt.k >= 1 && gt.T >= 1, "dimensions must be positive");
  require(gt.k <= gt.d, "k must not exceed d");
  require(gt.B_star.rows() == gt.d && gt.B_star.cols() == gt.k, "B_star must be d x k");
  require(gt.W_star.rows() == gt.k && gt.W_star.cols() == gt.T, "W_star must be k x T");
  require(gt.w_target_star.size() == gt.k, "w_target_star must have length k");
  require(gt.covariance_diag.size() == gt.d, "covariance diagonal must have length d");
  require(gt.sigma_z >= 0.0, "sigma_z must be non-negative");
  require(gt.covariance_diag.minCoeff() > 0.0, "covariance diagonal must be positive");
  require(gt.B_star.allFinite() && gt.W_star.allFinite() && gt.w_target_star.allFinite(),
          "ground truth contains non-finite values");
  const Matrix gram = gt.B_star.transpose() * gt.B_star;
  const double err = (gram - Matrix::Identity(gt.k, gt.k)).cwiseAbs().maxCoeff();
  require(err <= 1e-10, "B_star columns are not orthonormal (max deviation " +
                            std::to_string(err) + ")");
}

void refresh_flags(GroundTruth& gt) {
  Eigen::JacobiSVD<Matrix> svd(gt.W_star);
  const auto& s = svd.singularValues();
  gt.meta.diverse = s.size() == gt.k && s(s.size() - 1) > 0.0;
  gt.meta.wide_regime = gt.d > gt.T && gt.T >= gt.k && gt.k >= 1;
}

Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  require(cols <= rows, "random_orthonormal needs cols <= rows");
  Stream rng(seed);
  Matrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (q(i, j) != 0.0) {
        if (q(i, j) < 0.0) q.col(j) *= -1.0;
        break;
      }
    }
  }
  return q;
}

namespace {

// Orthonormal T x k basis whose first column is lead / |lead|.
Matrix basis_with_leading(const Vector& lead, int k, std::uint64_t seed) {
  const Index T = lead.size();
  Stream rng(seed);
  Matrix m(T, k);
  m.col(0) = lead.normalized();
  for (int j = 1; j < k; ++j)
    for (Index i = 0; i < T; ++i) m(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(T, k);
  if (q.col(0).dot(m.col(0)) < 0.0) q.col(0) *= -1.0;
  return q;
}

GroundTruth skeleton(int d, int k, int T, double sigma_z, std::uint64_t seed, InstanceKind kind) {
  GroundTruth gt;
  gt.d = d;
  gt.k = k;
  gt.T = T;
  gt.sigma_z = sigma_z;
  gt.covariance_kind = CovarianceKind::identity;
  gt.covariance_diag = Vector::Ones(d);
  gt.meta.kind = kind;
  gt.meta.seed = seed;
  gt.B_star = random_orthonormal(d, k, stream_seed(seed, kInstanceDomain, 1));
  return gt;
}

}  // namespace

GroundTruth make_random_instance(int d, int k, int T, double sigma_z, double sigma_min_floor,
                                 std::uint64_t seed) {
  require(k >= 1 && d >= 1, "dimensions must be positive");
  require(k <= d, "k must not exceed d");
  require(T >= k, "need T >= k");
  require(sigma_min_floor > 0.0, "sigma_min_floor must be positive");
  require(sigma_z >= 0.0, "sigma_z must be non-negative");

  GroundTruth gt = skeleton(d, k, T, sigma_z, seed, InstanceKind::random);
  gt.meta.generator_param = sigma_min_floor;

  Stream rng(stream_seed(seed, kInstanceDomain, 2));
  gt.W_star.resize(k, T);
  for (int i = 0; i < k; ++i)
    for (int t = 0; t < T; ++t) gt.W_star(i, t) = rng.normal();
  const double smin = Eigen::JacobiSVD<Matrix>(gt.W_star).singularValues()(k - 1);
  if (!(smin > 0.0)) throw RankDeficientError("generated W_star is singular");
  if (smin < sigma_min_floor) gt.W_star *= sigma_min_floor / smin;

  Vector nu(T);
  for (int t = 0; t < T; ++t) nu(t) = rng.normal() / std::sqrt(static_cast<double>(T));
  gt.w_target_star = gt.W_star * nu;
  gt.meta.reference_nu = nu;
  refresh_flags(gt);
  return gt;
}

Vector almost_sparse_nu(int T) {
  require(T >= 3, "almost-sparse vector needs T >= 3");
  const double tail = 1.0 / static_cast<double>(T - 1);
  Vector nu = Vector::Constant(T, tail);
  nu(0) = std::sqrt(1.0 - tail);
  return nu;
}

AlmostSparseInstance make_almost_sparse_instance(int d, int k, int T, double sigma_z,
                                                 std::uint64_t seed) {
  require(T >= 3, "almost-sparse instance needs T >= 3");
  require(k >= 1 && k <= d, "need 1 <= k <= d");
  require(k <= T, "need k <= T");
  require(sigma_z >= 0.0, "sigma_z must be non-negative");

  GroundTruth gt = skeleton(d, k, T, sigma_z, seed, InstanceKind::almost_sparse);
  const Vector nu = almost_sparse_nu(T);

  // W_star = U diag(s) V^T with V's first column equal to nu (unit norm), so nu
  // lies in the row space and is the minimum-L2 solution.
  const Matrix V = basis_with_leading(nu, k, stream_seed(seed, kInstanceDomain, 3));
  const Matrix U = random_orthonormal(k, k, stream_seed(seed, kInstanceDomain, 4));
  Stream rng(stream_seed(seed, kInstanceDomain, 5));
  Vector s(k);
  const double scale = std::sqrt(static_cast<double>(T) / k);
  for (int i = 0; i < k; ++i) s(i) = scale * rng.uniform(1.0, 2.0);

  gt.W_star = U * s.asDiagonal() * V.transpose();
  gt.w_target_star = gt.W_star * nu;
  gt.meta.reference_nu = nu;
  refresh_flags(gt);
  return {std::move(gt), nu};
}

GroundTruth make_aligned_worstcase_instance(int d, int k, int T, double c_w, std::uint64_t seed,
                                            double sigma_z) {
  require(k >= 2, "aligned construction needs k >= 2");
  require(T >= k, "need T >= k");
  require(k <= d, "k must not exceed d");
  require(c_w > 0.0, "c_w must be positive");

  GroundTruth gt = skeleton(d, k, T, sigma_z, seed, InstanceKind::aligned_worstcase);
  gt.meta.generator_param = c_w;

  const Matrix U = random_orthonormal(k, k, stream_seed(seed, kInstanceDomain, 6));
  const Vector ones = Vector::Ones(T);
  const Matrix V = basis_with_leading(ones, k, stream_seed(seed, kInstanceDomain, 7));
  const double s_k = c_w / (2.0 * std::sqrt(static_cast<double>(k - 1) * T));

  gt.W_star = (c_w / T) * U.col(0) * ones.transpose();
  for (int i = 1; i < k; ++i) gt.W_star += s_k * U.col(i) * V.col(i).transpose();
  gt.w_target_star = gt.W_star * ones;
  gt.meta.reference_nu = ones;
  refresh_flags(gt);
  return gt;
}

TaskDataset sample_task(const GroundTruth& gt, int task_index, Index n, std::uint64_t seed,
                        std::uint64_t draw) {
  require(n >= 0, "sample count must be non-negative");
  const Vector beta = gt.regression_vector(task_index);  // range-checks task_index
  TaskDataset ds;
  ds.task_index = task_index;
  ds.seed = seed;
  ds.draw = draw;
  ds.X.resize(n, gt.d);
  ds.Y.resize(n);

  Stream rng(stream_seed(mix_seed(seed ^ kSampleDomain), static_cast<std::uint64_t>(task_index),
                         draw));
  const Vector scale = gt.covariance_diag.cwiseSqrt();
  Vector noise(n);
  // Row-interleaved draws keep datasets prefix-consistent in n.
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < gt.d; ++j) ds.X(i, j) = scale(j) * rng.normal();
    noise(i) = rng.normal();
  }
  ds.Y.noalias() = ds.X * beta;
  if (gt.sigma_z > 0.0) ds.Y += gt.sigma_z * noise;
  return ds;
}

TaskDataset concat(const TaskDataset& a, const TaskDataset& b) {
  require(a.task_index == b.task_index, "cannot concatenate datasets of different tasks");
  if (a.n() == 0) return b;
  if (b.n() == 0) return a;
  require(a.X.cols() == b.X.cols(), "dimension mismatch in concat");
  TaskDataset out;
  out.task_index = a.task_index;
  out.seed = a.seed;
  out.draw = b.draw;
  out.X.resize(a.n() + b.n(), a.X.cols());
  out.X << a.X, b.X;
  out.Y.resize(a.n() + b.n());
  out.Y << a.Y, b.Y;
  return out;
}

}  // namespace amtrl
