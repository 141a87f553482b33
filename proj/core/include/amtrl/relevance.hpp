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
#include <string>
#include <vector>

#include "amtrl/types.hpp"

namespace amtrl {

/// Relevance vectors nu solve (approximately) W nu = w, expressing the target
/// head as a combination of source heads.
enum class NuSolver { lasso, min_l2, lp_l1_oracle, known };

std::string to_string(NuSolver solver);
NuSolver nu_solver_from_string(const std::string& s);

/// Regularization used when nothing else is configured.
inline constexpr double kLazyLambda = 1e-10;

struct RelevanceVector {
  Vector nu;
  NuSolver solver = NuSolver::known;
  double lambda = 0.0;
  /// Lasso: stationarity residual (see kkt_residual). Equality-constrained
  /// solvers: max-abs residual of W nu - w.
  double kkt_residual = 0.0;
  int support_size = 0;
  double support_tol = 0.0;
  double residual_norm = 0.0;  // |w - W nu|_2

  // Lasso bookkeeping.
  int sweeps = 0;
  bool converged = true;
  /// Objective after each coordinate sweep at the requested lambda.
  std::vector<double> objective_history;
  /// Zero columns met with lambda = 0; those coordinates are held at 0.
  std::vector<Index> degenerate_coordinates;
};

/// 1e-9 * (1 + |nu|_inf).
double default_support_tol(const Vector& nu);
int support_size(const Vector& nu, double tol);
int support_size(const Vector& nu);

struct LassoOptions {
  /// Sweeps stop once the largest coordinate change is <= tol * (1 + |nu|_inf).
  double tol = 1e-12;
  /// Cap on coordinate sweeps, summed over all continuation stages.
  int max_iters = 100000;
  /// Warm-start through a geometric lambda sequence from |W^T w|_inf down to
  /// the requested value. Only changes the path, not the fixed point.
  bool continuation = true;
  double continuation_ratio = 0.1;
};

/// 1/2 |w - W nu|^2 + lambda |nu|_1.
double lasso_objective(const Matrix& W, const Vector& w, const Vector& nu, double lambda);

/// Cyclic coordinate descent with exact soft-thresholding updates, started
/// from zero, on the raw (unstandardized) columns of W.
RelevanceVector lasso(const Matrix& W, const Vector& w, double lambda,
                      const LassoOptions& options = {});

/// Minimum Euclidean norm solution W^T (W W^T)^{-1} w. Throws
/// RankDeficientError when sigma_min(W) <= 1e-10 sigma_max(W).
RelevanceVector min_l2_solution(const Matrix& W, const Vector& w);

/// Exact minimum-L1 solution from the split-variable LP
///   min 1^T (p + q)  s.t.  W p - W q = w,  p, q >= 0,
/// returned at a vertex, so at most rank(W) entries are nonzero. Throws
/// InfeasibleError when w is outside the column space of W.
RelevanceVector l1_oracle_lp(const Matrix& W, const Vector& w);

/// Wraps a caller-supplied vector.
RelevanceVector known_relevance(const Vector& nu);

/// max_t of |g_t - lambda sign(nu_t)| on the support and max(0, |g_t| - lambda)
/// off it, with g = W^T (w - W nu). Zero at a Lasso optimum.
double kkt_residual(const Matrix& W, const Vector& w, const Vector& nu, double lambda,
                    double support_tol = -1.0);

struct LambdaRule {
  double lambda = 0.0;
  double gamma = 0.0;
};

/// Theory-driven regularization:
///   gamma    = max{2160 k^{3/2} C_W^2 / s, sqrt(2160 k^{3/2} C_W^3 / s)}
///   lambda_k = 45 sqrt(k) R C_W s / gamma * max{1, C_W / gamma}
/// with s the lower bound on sigma_min(W*).
LambdaRule lambda_rule(int k, double R, double C_W, double sigma_underbar);

/// Exploration budgets for documentation; their constants are far too
/// conservative to drive desk-scale runs.
double exploration_beta1(int T, int k, double C_W, double sigma_underbar, int d, double delta);
double exploration_beta2(int k, int d, int T, double delta, double nu_hat_l1, double epsilon,
                         double beta1);

struct NormBoundReport {
  double nu1_l1 = 0.0;
  double nu2_l2 = 0.0;
  double c_w = 0.0;
  double sigma_min = 0.0;
  double l1_bound = 0.0;  // sqrt(k) c_w / sigma_min
  double l2_bound = 0.0;  // c_w / sigma_min
  /// sqrt(T) c_w / sigma_min, which always holds: |nu^1|_1 <= |nu^2|_1.
  double l1_general_bound = 0.0;
  bool l1_ok = false;
  bool l2_ok = false;
  bool l1_general_ok = false;
};

/// Compares |nu^1|_1 and |nu^2|_2 with their sigma_min(W) bounds. The sqrt(k)
/// form of the L1 bound can fail once T > k: for W = (1 1), w = 2 it gives
/// sqrt(2) while |nu^1|_1 = 2. l1_ok reports it as stated; l1_general_ok is
/// the sqrt(T) form.
NormBoundReport norm_bound_check(const Matrix& W, const Vector& w);

/// Smallest |W D|^2 / |D|^2 over `samples` random directions D in the cone
/// |D_{S^c}|_1 <= 3 |D_S|_1. An upper estimate of the restricted eigenvalue;
/// exact minimization over the cone is not attempted.
double restricted_eigenvalue_estimate(const Matrix& W, const std::vector<Index>& support,
                                      int samples, std::uint64_t seed);

}  // namespace amtrl
