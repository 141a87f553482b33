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

#include "amtrl/types.hpp"

namespace amtrl {

enum class AllocationStrategy { L1, L2, LpNq, passive, known_nu, cost_aware };

std::string to_string(AllocationStrategy s);

/// Per-task sample counts for the T source tasks.
struct Allocation {
  std::vector<std::int64_t> n;
  /// Real-valued allocation before integer rounding.
  Vector continuous;
  std::int64_t N_tot = 0;
  std::int64_t N_floor = 0;
  AllocationStrategy strategy = AllocationStrategy::L1;
  double q = 1.0;
  /// Proportionality constant c' of n_t = max{c' w_t, N_floor}.
  double c_prime = 0.0;
  std::vector<std::string> warnings;

  std::int64_t total() const;
  int T() const { return static_cast<int>(n.size()); }
};

struct WaterFill {
  Vector n;
  double c_prime = 0.0;
};

/// Continuous solution of sum_t max{c' weight_t, floor} = total, found exactly
/// by scanning the breakpoints of the piecewise-linear left-hand side.
/// Requires weights >= 0 with at least one positive entry and
/// total >= T * floor.
WaterFill water_fill(const Vector& weights, double total, double floor);

/// Floors every entry and hands the remaining units to the largest
/// fractional parts (lower index first on ties). The result sums to `total`.
std::vector<std::int64_t> round_largest_remainder(const Vector& continuous, std::int64_t total);

/// n_t = max{c' |nu(t)|, N_floor} with sum_t n_t = N_tot, rounded to integers.
/// nu = 0 falls back to a uniform allocation with a warning.
Allocation allocate_fixed_nu(const Vector& nu, std::int64_t N_tot, std::int64_t N_floor);

/// n_t = max{c' |nu_p(t)|^q, N_floor}; q = 1 is allocate_fixed_nu.
Allocation lpnq_allocation(const Vector& nu_p, double q, std::int64_t N_tot, std::int64_t N_floor);

/// N_tot / T per task, remainder to the lowest task indices.
Allocation uniform_allocation(int T, std::int64_t N_tot, std::int64_t N_floor = 0);

/// sum_t nu(t)^2 / n_t. Throws std::domain_error when some nu(t) != 0 has
/// n_t = 0; terms with nu(t) = 0 contribute nothing.
double nu_tilde_objective(const Vector& nu, std::span<const std::int64_t> n);
double nu_tilde_objective(const Vector& nu, const Allocation& allocation);
double nu_tilde_objective(const Vector& nu, const Vector& n_continuous);

struct BilevelOptions {
  int random_starts = 6;
  int max_iters = 200000;
  double tol = 1e-15;
  std::uint64_t seed = 0;
};

struct BilevelResult {
  Vector nu;
  Vector n_continuous;
  Allocation allocation;
  double objective = 0.0;  // continuous sum_t nu(t)^2 / n_t
  int iterations = 0;
  int starts = 0;
};

/// Numerical minimum of min_nu sum_t nu(t)^2 / n_t(nu) subject to W nu = w,
/// with n(nu) the continuous fixed-nu allocation. Alternates an exact
/// weighted minimum-norm nu-step with the water-filling n-step from several
/// starting points and keeps the best. Desk-scale oracle (T <= 30).
BilevelResult bilevel_oracle(const Matrix& W, const Vector& w, std::int64_t N_tot,
                             std::int64_t N_floor, const BilevelOptions& options = {});

enum class CostKind { linear, saltus, piecewise_concave };

std::string to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& s);

/// Per-task sampling cost f_t(n).
///  linear:            C_var * n
///  saltus:            0 for n <= N_free, else C_fix + C_var (n - N_free)
///  piecewise_concave: saltus whose per-sample slope drops to slopes[i] once
///                     n - N_free exceeds breakpoints[i] (slopes non-increasing)
struct CostFunction {
  CostKind kind = CostKind::linear;
  double C_fix = 0.0;
  double C_var = 1.0;
  std::int64_t N_free = 0;
  std::vector<double> breakpoints;
  std::vector<double> slopes;

  static CostFunction linear(double C_var);
  static CostFunction saltus(double C_fix, double C_var, std::int64_t N_free);

  void validate() const;
  double operator()(std::int64_t n) const;
};

/// sum_t f_t(phase1_t + increment_t).
double eval_cost(const Allocation& increments, const Allocation& phase1,
                 std::span<const CostFunction> cost_fns);
/// sum_t f_t(n_t) for an allocation of total counts.
double eval_total_cost(const Allocation& totals, std::span<const CostFunction> cost_fns);

/// Floor-only phase-1 allocation.
Allocation floor_allocation(int T, std::int64_t N_floor);
/// totals - phase1, task by task.
Allocation increments_over(const Allocation& totals, const Allocation& phase1);

/// Phase-2 budget restricted to the support of nu (meant for nu^1, which has
/// at most k nonzeros), split in proportion to |nu(t)| there; tasks off the
/// support keep their floor samples only.
Allocation cost_aware_allocate(const Vector& nu, std::int64_t N_tot, std::int64_t N_floor,
                               std::span<const CostFunction> cost_fns);

struct SupportSearchResult {
  std::vector<Index> support;
  Vector nu;
  Allocation allocation;
  double cost = 0.0;
  double objective = 0.0;
  long supports_checked = 0;
};

/// Exhaustive search over supports S with |S| <= max_support (T <= 15): nu is
/// the minimum-L1 solution restricted to S, n follows allocate_fixed_nu, and
/// the cheapest allocation whose nu-tilde objective is <= objective_cap wins
/// (ties: smaller objective). Returns nullopt when no support qualifies.
std::optional<SupportSearchResult> cost_support_enumeration(
    const Matrix& W, const Vector& w, std::int64_t N_tot, std::int64_t N_floor,
    std::span<const CostFunction> cost_fns, double objective_cap, int max_support);

}  // namespace amtrl
