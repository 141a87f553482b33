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

#include "amtrl/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace amtrl {
namespace {

struct Tableau {
  Matrix t;  // (m+1) x (cols+1); last row reduced costs, last column rhs
  std::vector<Index> basis;
  Index m = 0;
  Index rhs = 0;
  double pivot_tol = 1e-9;
  double cost_tol = 1e-10;
  int pivots = 0;

  void pivot(Index r, Index j) {
    t.row(r) /= t(r, j);
    for (Index i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = t(i, j);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[static_cast<size_t>(r)] = j;
    ++pivots;
  }

  // Runs pricing / ratio-test iterations over entering columns [0, allowed).
  LpStatus run(Index allowed, int max_pivots) {
    bool bland = false;
    int degenerate_run = 0;
    while (true) {
      if (pivots >= max_pivots) return LpStatus::iteration_limit;
      Index enter = -1;
      double best = -cost_tol;
      for (Index j = 0; j < allowed; ++j) {
        const double rc = t(m, j);
        if (rc < -cost_tol) {
          if (bland) {
            enter = j;
            break;
          }
          if (rc < best) {
            best = rc;
            enter = j;
          }
        }
      }
      if (enter < 0) return LpStatus::optimal;

      Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        const double a = t(i, enter);
        if (a <= pivot_tol) continue;
        const double r = std::max(0.0, t(i, rhs)) / a;
        const bool tie = leave >= 0 && std::abs(r - ratio) <= 1e-12 * std::max(1.0, ratio);
        if (r < ratio && !tie) {
          ratio = r;
          leave = i;
        } else if (tie && basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)]) {
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::unbounded;

      if (ratio <= 1e-14) {
        if (++degenerate_run > 50) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpSolution solve_standard_lp(const Matrix& A, const Vector& b, const Vector& c, int max_pivots) {
  const Index m = A.rows();
  const Index n = A.cols();
  require(b.size() == m, "LP: b has wrong length");
  require(c.size() == n, "LP: c has wrong length");
  require(A.allFinite() && b.allFinite() && c.allFinite(), "LP: non-finite input");

  LpSolution out;
  out.x = Vector::Zero(n);
  if (m == 0) {
    out.status = (c.array() < 0.0).any() ? LpStatus::unbounded : LpStatus::optimal;
    return out;
  }

  const double a_scale = std::max(1e-300, A.cwiseAbs().maxCoeff());
  const double b_scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  Tableau tab;
  tab.m = m;
  tab.rhs = n + m;
  tab.pivot_tol = 1e-9 * a_scale;
  tab.cost_tol = 1e-11 * std::max(1.0, c.cwiseAbs().maxCoeff()) * std::max(1.0, a_scale);
  tab.t = Matrix::Zero(m + 1, n + m + 1);
  tab.basis.resize(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * A.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, tab.rhs) = sign * b(i);
    tab.basis[static_cast<size_t>(i)] = n + i;
  }

  // Phase 1: minimize the sum of artificials.
  for (Index j = 0; j < n; ++j) tab.t(m, j) = -tab.t.col(j).head(m).sum();
  tab.t(m, tab.rhs) = -tab.t.col(tab.rhs).head(m).sum();
  LpStatus st = tab.run(n, max_pivots);
  if (st == LpStatus::iteration_limit) {
    out.status = st;
    out.pivots = tab.pivots;
    return out;
  }
  const double infeasibility = -tab.t(m, tab.rhs);
  if (infeasibility > 1e-9 * b_scale) {
    out.status = LpStatus::infeasible;
    out.pivots = tab.pivots;
    return out;
  }

  // Pivot remaining artificials out; rows where that is impossible are
  // redundant and keep a zero-valued artificial.
  std::vector<bool> redundant(static_cast<size_t>(m), false);
  for (Index i = 0; i < m; ++i) {
    if (tab.basis[static_cast<size_t>(i)] < n) continue;
    Index best = -1;
    double best_abs = tab.pivot_tol;
    for (Index j = 0; j < n; ++j) {
      const double a = std::abs(tab.t(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best >= 0) {
      tab.pivot(i, best);
    } else {
      redundant[static_cast<size_t>(i)] = true;
    }
  }

  // Phase 2 with the true costs.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = c.transpose();
  for (Index i = 0; i < m; ++i) {
    const Index j = tab.basis[static_cast<size_t>(i)];
    if (j < n && c(j) != 0.0) tab.t.row(m) -= c(j) * tab.t.row(i);
  }
  st = tab.run(n, max_pivots);
  out.status = st;
  out.pivots = tab.pivots;
  if (st != LpStatus::optimal) return out;

  for (Index i = 0; i < m; ++i) {
    const Index j = tab.basis[static_cast<size_t>(i)];
    if (j < n && !redundant[static_cast<size_t>(i)]) {
      out.x(j) = std::max(0.0, tab.t(i, tab.rhs));
      out.basis.push_back(j);
    }
  }
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace amtrl
