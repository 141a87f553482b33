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

#include "amtrl/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amtrl/rng.hpp"
#include "amtrl/simplex.hpp"

namespace amtrl {

std::string to_string(NuSolver solver) {
  switch (solver) {
    case NuSolver::lasso:
      return "lasso";
    case NuSolver::min_l2:
      return "min_l2";
    case NuSolver::lp_l1_oracle:
      return "lp_l1_oracle";
    case NuSolver::known:
      return "known";
  }
  return "known";
}

NuSolver nu_solver_from_string(const std::string& s) {
  if (s == "lasso") return NuSolver::lasso;
  if (s == "min_l2") return NuSolver::min_l2;
  if (s == "lp_l1_oracle" || s == "lp") return NuSolver::lp_l1_oracle;
  if (s == "known") return NuSolver::known;
  throw std::invalid_argument("unknown relevance solver: " + s);
}

double default_support_tol(const Vector& nu) {
  const double inf = nu.size() ? nu.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * (1.0 + inf);
}

int support_size(const Vector& nu, double tol) {
  return static_cast<int>((nu.array().abs() > tol).count());
}

int support_size(const Vector& nu) { return support_size(nu, default_support_tol(nu)); }

namespace {

void check_system(const Matrix& W, const Vector& w) {
  require(W.rows() == w.size(), "W and w disagree on k");
  require(W.cols() >= 1, "W needs at least one column");
  require(W.allFinite() && w.allFinite(), "non-finite input to relevance solver");
}

void finish(RelevanceVector& rv, const Matrix& W, const Vector& w) {
  rv.support_tol = default_support_tol(rv.nu);
  rv.support_size = support_size(rv.nu, rv.support_tol);
  rv.residual_norm = (w - W * rv.nu).norm();
}

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

double lasso_objective(const Matrix& W, const Vector& w, const Vector& nu, double lambda) {
  return 0.5 * (w - W * nu).squaredNorm() + lambda * nu.lpNorm<1>();
}

RelevanceVector lasso(const Matrix& W, const Vector& w, double lambda,
                      const LassoOptions& options) {
  check_system(W, w);
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and non-negative");
  require(options.tol > 0.0, "lasso tol must be positive");
  require(options.continuation_ratio > 0.0 && options.continuation_ratio < 1.0,
          "continuation ratio must lie in (0, 1)");

  const Index T = W.cols();
  const Matrix G = W.transpose() * W;
  const Vector c = W.transpose() * w;
  const double diag_floor = 1e-14 * std::max(1e-300, G.diagonal().maxCoeff());

  RelevanceVector rv;
  rv.solver = NuSolver::lasso;
  rv.lambda = lambda;
  rv.nu = Vector::Zero(T);

  std::vector<bool> usable(static_cast<size_t>(T), true);
  for (Index j = 0; j < T; ++j) {
    if (!(G(j, j) > diag_floor)) {
      usable[static_cast<size_t>(j)] = false;
      if (lambda == 0.0) rv.degenerate_coordinates.push_back(j);
    }
  }

  const double lambda_max = c.cwiseAbs().maxCoeff();
  std::vector<double> stages;
  if (options.continuation && lambda < lambda_max) {
    for (double l = lambda_max * options.continuation_ratio; l > lambda;
         l *= options.continuation_ratio)
      stages.push_back(l);
  }
  stages.push_back(lambda);

  Vector& nu = rv.nu;
  Vector g = c;  // W^T (w - W nu)
  int sweeps = 0;
  bool converged = false;

  // One pass over `coords`; returns the largest coordinate change.
  auto sweep = [&](double lam, const std::vector<Index>& coords) {
    double max_change = 0.0;
    for (Index j : coords) {
      const double gjj = G(j, j);
      const double old = nu(j);
      const double updated = soft_threshold(g(j) + gjj * old, lam) / gjj;
      const double delta = updated - old;
      if (delta != 0.0) {
        nu(j) = updated;
        g.noalias() -= delta * G.col(j);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    return max_change;
  };

  std::vector<Index> all;
  for (Index j = 0; j < T; ++j)
    if (usable[static_cast<size_t>(j)]) all.push_back(j);

  // Finishing step for nearly collinear active columns, where the sweeps
  // crawl. While the active columns are linearly dependent, moves along a
  // null direction that does not increase the L1 term until a coordinate
  // reaches zero (the fit term is unchanged). Then solves the stationarity
  // equations on the support and sign pattern, accepting the result only if
  // it keeps every sign and satisfies the optimality conditions off the
  // support.
  auto polish = [&](double lam) {
    std::vector<Index> active;
    for (;;) {
      active.clear();
      for (Index j : all)
        if (nu(j) != 0.0) active.push_back(j);
      if (active.empty()) return false;
      const Index m = static_cast<Index>(active.size());
      Matrix Wa(W.rows(), m);
      for (Index a = 0; a < m; ++a) Wa.col(a) = W.col(active[a]);
      const Eigen::JacobiSVD<Matrix> svd(Wa, Eigen::ComputeFullV);
      const Vector& sv = svd.singularValues();
      const double rank_tol = 1e-12 * std::max(1e-300, sv(0));
      Index rank = 0;
      while (rank < sv.size() && sv(rank) > rank_tol) ++rank;
      if (rank == m) break;
      Vector d = svd.matrixV().col(m - 1);
      double slope = 0.0;
      for (Index a = 0; a < m; ++a) slope += (nu(active[a]) > 0.0 ? 1.0 : -1.0) * d(a);
      if (slope > 0.0) d = -d;
      double step = std::numeric_limits<double>::infinity();
      Index hit = -1;
      for (Index a = 0; a < m; ++a) {
        if (nu(active[a]) * d(a) < 0.0) {
          const double t = -nu(active[a]) / d(a);
          if (t < step) {
            step = t;
            hit = a;
          }
        }
      }
      if (hit < 0) return false;
      for (Index a = 0; a < m; ++a) nu(active[a]) += step * d(a);
      nu(active[hit]) = 0.0;
      g = c - G * nu;
    }
    const Index m = static_cast<Index>(active.size());
    Matrix Gaa(m, m);
    Vector rhs(m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) Gaa(a, b) = G(active[a], active[b]);
      rhs(a) = c(active[a]) - lam * (nu(active[a]) > 0.0 ? 1.0 : -1.0);
    }
    const Vector x = Gaa.ldlt().solve(rhs);
    for (Index a = 0; a < m; ++a)
      if (!(x(a) * nu(active[a]) > 0.0)) return false;
    Vector cand = nu;
    for (Index a = 0; a < m; ++a) cand(active[a]) = x(a);
    const Vector gc = c - G * cand;
    const double slack = 1e-12 * (1.0 + lambda_max);
    for (Index j : all)
      if (cand(j) == 0.0 && std::abs(gc(j)) > lam + slack) return false;
    if (lasso_objective(W, w, cand, lam) > lasso_objective(W, w, nu, lam)) return false;
    nu = cand;
    g = gc;
    return true;
  };

  for (size_t s = 0; s < stages.size(); ++s) {
    const double lam = stages[s];
    const bool final_stage = s + 1 == stages.size();
    const double stage_tol = final_stage ? options.tol : std::max(options.tol, 1e-8);
    converged = false;
    while (sweeps < options.max_iters) {
      const double full = sweep(lam, all);
      ++sweeps;
      if (final_stage) rv.objective_history.push_back(lasso_objective(W, w, nu, lam));
      if (full <= stage_tol * (1.0 + nu.cwiseAbs().maxCoeff())) {
        converged = true;
        break;
      }
      std::vector<Index> active;
      for (Index j : all)
        if (nu(j) != 0.0) active.push_back(j);
      while (sweeps < options.max_iters) {
        const double change = sweep(lam, active);
        ++sweeps;
        if (final_stage) rv.objective_history.push_back(lasso_objective(W, w, nu, lam));
        if (change <= stage_tol * (1.0 + nu.cwiseAbs().maxCoeff())) break;
        if (sweeps % 50 == 0 && polish(lam)) {
          if (final_stage) rv.objective_history.push_back(lasso_objective(W, w, nu, lam));
          break;
        }
      }
    }
    if (sweeps >= options.max_iters) break;
  }

  rv.sweeps = sweeps;
  rv.converged = converged;
  finish(rv, W, w);
  rv.kkt_residual = kkt_residual(W, w, nu, lambda, 0.0);
  return rv;
}

RelevanceVector min_l2_solution(const Matrix& W, const Vector& w) {
  check_system(W, w);
  require(W.rows() <= W.cols(), "min_l2_solution needs k <= T");
  Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 1e-10 * smax)) {
    throw RankDeficientError(
        "W is rank deficient (sigma_min / sigma_max = " + std::to_string(smax > 0 ? smin / smax : 0.0) +
        "); the source heads must span R^k");
  }
  RelevanceVector rv;
  rv.solver = NuSolver::min_l2;
  rv.nu = svd.matrixV() * (svd.matrixU().transpose() * w).cwiseQuotient(s);
  finish(rv, W, w);
  rv.kkt_residual = (W * rv.nu - w).cwiseAbs().maxCoeff();
  return rv;
}

RelevanceVector l1_oracle_lp(const Matrix& W, const Vector& w) {
  check_system(W, w);
  const Index k = W.rows();
  const Index T = W.cols();
  require(T <= 200, "l1_oracle_lp is limited to T <= 200");

  Matrix A(k, 2 * T);
  A << W, -W;
  const Vector cost = Vector::Ones(2 * T);
  const LpSolution lp = solve_standard_lp(A, w, cost);
  if (lp.status == LpStatus::infeasible)
    throw InfeasibleError("w lies outside the column space of W");
  if (lp.status != LpStatus::optimal)
    throw std::runtime_error("L1 oracle LP did not reach optimality");

  Vector x = lp.x;
  // Re-solve the basic variables against the original columns to remove
  // tableau round-off; keep the tableau values if that breaks sign.
  if (!lp.basis.empty()) {
    const Index m = static_cast<Index>(lp.basis.size());
    Matrix AB(k, m);
    for (Index i = 0; i < m; ++i) AB.col(i) = A.col(lp.basis[static_cast<size_t>(i)]);
    const Vector xb = AB.completeOrthogonalDecomposition().solve(w);
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if (xb.allFinite() && xb.minCoeff() >= -1e-9 * scale) {
      x.setZero();
      for (Index i = 0; i < m; ++i) x(lp.basis[static_cast<size_t>(i)]) = std::max(0.0, xb(i));
    }
  }

  RelevanceVector rv;
  rv.solver = NuSolver::lp_l1_oracle;
  rv.nu = x.head(T) - x.tail(T);
  finish(rv, W, w);
  rv.kkt_residual = (W * rv.nu - w).cwiseAbs().maxCoeff();
  return rv;
}

RelevanceVector known_relevance(const Vector& nu) {
  RelevanceVector rv;
  rv.solver = NuSolver::known;
  rv.nu = nu;
  rv.support_tol = default_support_tol(nu);
  rv.support_size = support_size(nu, rv.support_tol);
  return rv;
}

double kkt_residual(const Matrix& W, const Vector& w, const Vector& nu, double lambda,
                    double support_tol) {
  require(lambda >= 0.0, "lambda must be non-negative");
  require(W.cols() == nu.size() && W.rows() == w.size(), "kkt_residual shape mismatch");
  const double tol = support_tol < 0.0 ? 0.0 : support_tol;
  const Vector g = W.transpose() * (w - W * nu);
  double worst = 0.0;
  for (Index t = 0; t < nu.size(); ++t) {
    double r;
    if (std::abs(nu(t)) > tol) {
      r = std::abs(g(t) - lambda * (nu(t) > 0.0 ? 1.0 : -1.0));
    } else {
      r = std::max(0.0, std::abs(g(t)) - lambda);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

LambdaRule lambda_rule(int k, double R, double C_W, double sigma_underbar) {
  require(k > 0 && R > 0.0 && C_W > 0.0 && sigma_underbar > 0.0,
          "lambda_rule arguments must be positive");
  const double k32 = std::pow(static_cast<double>(k), 1.5);
  const double a = 2160.0 * k32 * C_W * C_W / sigma_underbar;
  const double b = std::sqrt(2160.0 * k32 * C_W * C_W * C_W / sigma_underbar);
  LambdaRule out;
  out.gamma = std::max(a, b);
  out.lambda = 45.0 * std::sqrt(static_cast<double>(k)) * R * C_W * sigma_underbar / out.gamma *
               std::max(1.0, C_W / out.gamma);
  return out;
}

double exploration_beta1(int T, int k, double C_W, double sigma_underbar, int d, double delta) {
  require(T > 0 && k > 0 && d > 0 && C_W > 0.0 && sigma_underbar > 0.0 && delta > 0.0 &&
              delta < 1.0,
          "exploration_beta1 arguments out of range");
  const double ratio = C_W / sigma_underbar;
  return 1e5 * T * std::pow(static_cast<double>(k), 3) * std::pow(ratio, 6) *
         (d + std::log(4.0 * T / delta));
}

double exploration_beta2(int k, int d, int T, double delta, double nu_hat_l1, double epsilon,
                         double beta1) {
  require(k > 0 && d > 0 && T > 0 && delta > 0.0 && delta < 1.0 && epsilon > 0.0 &&
              nu_hat_l1 >= 0.0,
          "exploration_beta2 arguments out of range");
  return k * (d + T + std::log(1.0 / delta)) * nu_hat_l1 * nu_hat_l1 / (epsilon * epsilon) + beta1;
}

NormBoundReport norm_bound_check(const Matrix& W, const Vector& w) {
  check_system(W, w);
  NormBoundReport rep;
  const Vector s = Eigen::JacobiSVD<Matrix>(W).singularValues();
  rep.sigma_min = s(s.size() - 1);
  if (!(rep.sigma_min > 1e-10 * s(0)))
    throw RankDeficientError("norm_bound_check needs W with full row rank");
  rep.c_w = w.norm();
  rep.nu1_l1 = l1_oracle_lp(W, w).nu.lpNorm<1>();
  rep.nu2_l2 = min_l2_solution(W, w).nu.norm();
  const double k = static_cast<double>(W.rows());
  rep.l2_bound = rep.c_w / rep.sigma_min;
  rep.l1_bound = std::sqrt(k) * rep.l2_bound;
  rep.l1_general_bound = std::sqrt(static_cast<double>(W.cols())) * rep.l2_bound;
  const double slack = 1.0 + 1e-9;
  rep.l1_ok = rep.nu1_l1 <= rep.l1_bound * slack;
  rep.l2_ok = rep.nu2_l2 <= rep.l2_bound * slack;
  rep.l1_general_ok = rep.nu1_l1 <= rep.l1_general_bound * slack;
  return rep;
}

double restricted_eigenvalue_estimate(const Matrix& W, const std::vector<Index>& support,
                                      int samples, std::uint64_t seed) {
  const Index T = W.cols();
  require(samples > 0, "samples must be positive");
  require(!support.empty(), "support must be non-empty");
  std::vector<bool> in_s(static_cast<size_t>(T), false);
  for (Index j : support) {
    require(j >= 0 && j < T, "support index out of range");
    in_s[static_cast<size_t>(j)] = true;
  }
  Stream rng(stream_seed(seed, kAuxDomain, 21));
  double best = std::numeric_limits<double>::infinity();
  Vector delta(T);
  for (int s = 0; s < samples; ++s) {
    double on = 0.0, off = 0.0;
    for (Index j = 0; j < T; ++j) {
      delta(j) = rng.normal();
      (in_s[static_cast<size_t>(j)] ? on : off) += std::abs(delta(j));
    }
    if (off > 0.0) {
      const double target = 3.0 * on * rng.uniform();
      for (Index j = 0; j < T; ++j)
        if (!in_s[static_cast<size_t>(j)]) delta(j) *= target / off;
    }
    const double q = (W * delta).squaredNorm() / delta.squaredNorm();
    best = std::min(best, q);
  }
  return best;
}

}  // namespace amtrl
