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

#include "amtrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "amtrl/rng.hpp"

namespace amtrl {

std::string to_string(TaskWeighting w) {
  return w == TaskWeighting::pooled ? "pooled" : "per_task";
}

TaskWeighting task_weighting_from_string(const std::string& s) {
  if (s == "per_task") return TaskWeighting::per_task;
  if (s == "pooled") return TaskWeighting::pooled;
  throw std::invalid_argument("unknown task weighting: " + s);
}

namespace {

// Pooled data and sufficient statistics of one source task.
struct TaskBlock {
  Matrix X;
  Vector Y;
  Matrix gram;  // X^T X
  Vector xty;   // X^T Y
  double weight = 0.0;  // 1 / (T n_t), or 1 / N when pooled
};

std::vector<TaskBlock> pool_tasks(std::span<const TaskDataset> datasets,
                                  TaskWeighting weighting = TaskWeighting::per_task) {
  require(!datasets.empty(), "fit_source needs at least one dataset");
  std::map<int, std::vector<const TaskDataset*>> by_task;
  Index d = -1;
  for (const auto& ds : datasets) {
    require(ds.task_index >= 1, "source task indices start at 1");
    require(ds.X.rows() == ds.Y.size(), "dataset X and Y row counts differ");
    if (d < 0) d = ds.X.cols();
    require(ds.X.cols() == d, "datasets disagree on input dimension");
    require(ds.X.allFinite() && ds.Y.allFinite(), "dataset contains non-finite values");
    by_task[ds.task_index].push_back(&ds);
  }
  const int T = by_task.rbegin()->first;
  require(static_cast<int>(by_task.size()) == T,
          "datasets must cover every task index 1..T (highest index " + std::to_string(T) + ")");

  std::vector<TaskBlock> blocks(T);
  for (auto& [t, parts] : by_task) {
    Index n = 0;
    for (const auto* p : parts) n += p->n();
    require(n >= 1, "task " + std::to_string(t) + " has no samples");
    TaskBlock& b = blocks[t - 1];
    b.X.resize(n, d);
    b.Y.resize(n);
    Index row = 0;
    for (const auto* p : parts) {
      b.X.middleRows(row, p->n()) = p->X;
      b.Y.segment(row, p->n()) = p->Y;
      row += p->n();
    }
    b.gram.noalias() = b.X.transpose() * b.X;
    b.xty.noalias() = b.X.transpose() * b.Y;
    b.weight = 1.0 / (static_cast<double>(T) * static_cast<double>(n));
  }
  if (weighting == TaskWeighting::pooled) {
    double total = 0.0;
    for (const auto& b : blocks) total += static_cast<double>(b.X.rows());
    for (auto& b : blocks) b.weight = 1.0 / total;
  }
  return blocks;
}

double objective(const std::vector<TaskBlock>& blocks, const Matrix& B, const Matrix& W) {
  double total = 0.0;
  for (size_t t = 0; t < blocks.size(); ++t) {
    const Vector beta = B * W.col(static_cast<Index>(t));
    total += blocks[t].weight * (blocks[t].Y - blocks[t].X * beta).squaredNorm();
  }
  return total;
}

// Exact per-task least squares given B.
void update_heads(const std::vector<TaskBlock>& blocks, const Matrix& B, Matrix& W) {
  const Index k = B.cols();
  for (size_t t = 0; t < blocks.size(); ++t) {
    const Matrix gb = blocks[t].gram * B;
    const Matrix h = B.transpose() * gb;
    const Vector r = B.transpose() * blocks[t].xty;
    Eigen::LDLT<Matrix> ldlt(h);
    Vector w;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        ldlt.vectorD().minCoeff() > 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      w = ldlt.solve(r);
    } else {
      w = h.completeOrthogonalDecomposition().solve(r);
    }
    W.col(static_cast<Index>(t)) = w.head(k);
  }
}

// Applies the B-step normal operator: sum_t c_t G_t V w_t w_t^T.
Matrix apply_normal(const std::vector<TaskBlock>& blocks, const Matrix& W, const Matrix& V) {
  Matrix out = Matrix::Zero(V.rows(), V.cols());
  for (size_t t = 0; t < blocks.size(); ++t) {
    const Vector w = W.col(static_cast<Index>(t));
    const Vector gv = blocks[t].gram * (V * w);
    out.noalias() += blocks[t].weight * gv * w.transpose();
  }
  return out;
}

// Exact minimization over B given W: one stacked least-squares problem in
// vec(B), solved through its d*k normal equations.
Matrix update_representation_direct(const std::vector<TaskBlock>& blocks, const Matrix& W,
                                    const Matrix& B_prev) {
  const Index d = B_prev.rows();
  const Index k = B_prev.cols();
  const Index dk = d * k;
  Matrix H = Matrix::Zero(dk, dk);
  Matrix rhs = Matrix::Zero(d, k);
  for (size_t t = 0; t < blocks.size(); ++t) {
    const Vector w = W.col(static_cast<Index>(t));
    const double c = blocks[t].weight;
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b <= a; ++b) {
        const double coef = c * w(a) * w(b);
        if (coef == 0.0) continue;
        H.block(a * d, b * d, d, d) += coef * blocks[t].gram;
      }
    }
    rhs.noalias() += c * blocks[t].xty * w.transpose();
  }
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < a; ++b) H.block(b * d, a * d, d, d) = H.block(a * d, b * d, d, d).transpose();

  const Eigen::Map<const Vector> r(rhs.data(), dk);
  Eigen::LLT<Matrix> llt(H);
  Vector x;
  if (llt.info() == Eigen::Success) {
    x = llt.solve(r);
  } else {
    // Rank-deficient heads leave B partly unidentified; any minimizer keeps
    // the objective monotone.
    x = H.completeOrthogonalDecomposition().solve(r);
  }
  if (!x.allFinite()) return B_prev;
  return Eigen::Map<const Matrix>(x.data(), d, k);
}

// Conjugate gradient on the same normal equations, started at B_prev. Every
// CG iterate lowers the quadratic, so the objective stays monotone.
Matrix update_representation_cg(const std::vector<TaskBlock>& blocks, const Matrix& W,
                                const Matrix& B_prev) {
  Matrix rhs = Matrix::Zero(B_prev.rows(), B_prev.cols());
  for (size_t t = 0; t < blocks.size(); ++t)
    rhs.noalias() += blocks[t].weight * blocks[t].xty * W.col(static_cast<Index>(t)).transpose();
  Matrix x = B_prev;
  Matrix res = rhs - apply_normal(blocks, W, x);
  Matrix p = res;
  double rs = res.squaredNorm();
  const double stop = 1e-28 * std::max(1.0, rhs.squaredNorm());
  const Index max_steps = std::min<Index>(B_prev.size(), 500);
  for (Index it = 0; it < max_steps && rs > stop; ++it) {
    const Matrix hp = apply_normal(blocks, W, p);
    const double denom = (p.array() * hp.array()).sum();
    if (!(denom > 0.0)) break;
    const double alpha = rs / denom;
    x += alpha * p;
    res -= alpha * hp;
    const double rs_next = res.squaredNorm();
    p = res + (rs_next / rs) * p;
    rs = rs_next;
  }
  return x;
}

// Thin QR with the triangular factor pushed into the heads; B W is unchanged.
void reorthonormalize(Matrix& B, Matrix& W) {
  const Index d = B.rows();
  const Index k = B.cols();
  Eigen::HouseholderQR<Matrix> qr(B);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, k);
  Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  B = std::move(Q);
  W = R * W;
}

Matrix spectral_init(const std::vector<TaskBlock>& blocks, Index d, int k, double ridge,
                     std::string& method) {
  const Index T = static_cast<Index>(blocks.size());
  if (T >= k) {
    Matrix betas(d, T);
    for (Index t = 0; t < T; ++t) {
      Matrix g = blocks[t].gram;
      g.diagonal().array() += ridge;
      // Scaled by the task's share of the objective.
      const double n = static_cast<double>(blocks[t].X.rows());
      betas.col(t) = std::sqrt(blocks[t].weight * n) * g.llt().solve(blocks[t].xty);
    }
    if (betas.allFinite()) {
      Eigen::JacobiSVD<Matrix> svd(betas, Eigen::ComputeThinU);
      const Vector& s = svd.singularValues();
      if (s(0) > 0.0 && s(k - 1) > 1e-12 * s(0)) {
        method = "spectral";
        return svd.matrixU().leftCols(k);
      }
    }
  }
  method = "random";
  return Matrix();
}

}  // namespace

double source_objective(std::span<const TaskDataset> datasets, const Matrix& B, const Matrix& W,
                        TaskWeighting weighting) {
  const auto blocks = pool_tasks(datasets, weighting);
  require(W.cols() == static_cast<Index>(blocks.size()), "W must have one column per task");
  require(B.cols() == W.rows(), "B and W disagree on k");
  return objective(blocks, B, W);
}

FittedModel fit_source(std::span<const TaskDataset> datasets, int k, const FitOptions& options) {
  const auto blocks = pool_tasks(datasets, options.weighting);
  const Index d = blocks.front().X.cols();
  const Index T = static_cast<Index>(blocks.size());
  require(k >= 1 && k <= d, "need 1 <= k <= d");
  require(options.max_iters >= 0, "max_iters must be non-negative");
  require(options.snapshot_count >= 1, "snapshot_count must be at least 1");

  FittedModel model;
  Matrix B;
  if (options.warm_start_B) {
    require(options.warm_start_B->rows() == d && options.warm_start_B->cols() == k,
            "warm start B must be d x k");
    B = *options.warm_start_B;
    Eigen::HouseholderQR<Matrix> qr(B);
    B = qr.householderQ() * Matrix::Identity(d, k);
    model.init_method = "warm_start";
  } else {
    B = spectral_init(blocks, d, k, options.init_ridge, model.init_method);
    if (B.size() == 0) B = random_orthonormal(d, k, stream_seed(options.seed, kAuxDomain, 11));
  }

  Matrix W(k, T);
  update_heads(blocks, B, W);
  double loss = objective(blocks, B, W);
  model.train_loss_history.push_back(loss);

  std::deque<ModelSnapshot> snaps;
  snaps.push_back({B, W});
  const bool direct = d * k <= options.direct_solve_limit;

  for (int it = 0; it < options.max_iters; ++it) {
    if (loss == 0.0) {
      model.converged = true;
      break;
    }
    Matrix B_next = direct ? update_representation_direct(blocks, W, B)
                           : update_representation_cg(blocks, W, B);
    Matrix W_next = W;
    reorthonormalize(B_next, W_next);
    update_heads(blocks, B_next, W_next);
    const double next = objective(blocks, B_next, W_next);
    ++model.iterations;
    // Round-off can produce a tiny uptick at the floor; keep the better iterate.
    if (next > loss) {
      model.converged = true;
      break;
    }
    B = std::move(B_next);
    W = std::move(W_next);
    const double prev = loss;
    loss = next;
    model.train_loss_history.push_back(loss);
    snaps.push_back({B, W});
    while (static_cast<int>(snaps.size()) > options.snapshot_count) snaps.pop_front();
    if (prev - loss <= options.tol * prev) {
      model.converged = true;
      break;
    }
  }
  while (static_cast<int>(snaps.size()) > options.snapshot_count) snaps.pop_front();

  model.B_hat = std::move(B);
  model.W_hat = std::move(W);
  model.snapshots.assign(snaps.begin(), snaps.end());
  return model;
}

Vector fit_target_head(const Matrix& B_hat, const TaskDataset& target) {
  require(target.n() >= 1, "target dataset is empty");
  require(target.X.cols() == B_hat.rows(), "target input dimension does not match B_hat");
  require(target.X.allFinite() && target.Y.allFinite(), "target data contains non-finite values");
  const Matrix design = target.X * B_hat;
  return design.completeOrthogonalDecomposition().solve(target.Y);
}

Vector fit_target_head(const FittedModel& model, const TaskDataset& target) {
  return fit_target_head(model.B_hat, target);
}

double excess_risk(const Matrix& B_hat, const Vector& w_hat, const GroundTruth& gt) {
  require(B_hat.rows() == gt.d && B_hat.cols() == w_hat.size(), "B_hat / w_hat shape mismatch");
  require(gt.B_star.cols() == gt.w_target_star.size(), "ground truth shape mismatch");
  const Vector delta = B_hat * w_hat - gt.B_star * gt.w_target_star;
  return delta.dot(gt.covariance_diag.cwiseProduct(delta));
}

double excess_risk(const FittedModel& model, const GroundTruth& gt) {
  require(model.w_target_hat.has_value(), "model has no fitted target head");
  return excess_risk(model.B_hat, *model.w_target_hat, gt);
}

double subspace_distance(const Matrix& B_hat, const Matrix& B_star) {
  require(B_hat.rows() == B_star.rows() && B_hat.cols() == B_star.cols(),
          "subspace_distance needs equally shaped bases");
  const Index k = B_hat.cols();
  const Matrix I = Matrix::Identity(k, k);
  require((B_hat.transpose() * B_hat - I).cwiseAbs().maxCoeff() <= 1e-6,
          "B_hat is not orthonormal");
  require((B_star.transpose() * B_star - I).cwiseAbs().maxCoeff() <= 1e-6,
          "B_star is not orthonormal");
  // sqrt(1 - sigma_k(B_hat^T B_star)^2) equals the spectral norm of the part of
  // B_hat outside span(B_star); the latter keeps precision for small angles.
  const Matrix outside = B_hat - B_star * (B_star.transpose() * B_hat);
  const Vector s = Eigen::JacobiSVD<Matrix>(outside).singularValues();
  return std::clamp(s(0), 0.0, 1.0);
}

}  // namespace amtrl
