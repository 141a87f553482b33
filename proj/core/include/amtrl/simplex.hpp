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

#include <vector>

#include "amtrl/types.hpp"

namespace amtrl {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  Vector x;
  double objective = 0.0;
  /// Column indices of the final basis (one per non-redundant row).
  std::vector<Index> basis;
  int pivots = 0;
};

/// Dense two-phase tableau simplex for
///   minimize c^T x  subject to  A x = b,  x >= 0.
/// Uses Dantzig pricing with a switch to Bland's rule after a run of
/// degenerate pivots, so it terminates and always returns a basic feasible
/// solution: at most rank(A) entries of x are nonzero.
LpSolution solve_standard_lp(const Matrix& A, const Vector& b, const Vector& c,
                             int max_pivots = 100000);

}  // namespace amtrl
