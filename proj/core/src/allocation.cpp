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

#include "amtrl/allocation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "amtrl/relevance.hpp"
#include "amtrl/rng.hpp"

namespace amtrl {

std::string to_string(AllocationStrategy s) {
  switch (s) {
    case AllocationStrategy::L1:
      return "L1";
    case AllocationStrategy::L2:
      return "L2";
    case AllocationStrategy::LpNq:
      return "LpNq";
    case AllocationStrategy::passive:
      return "passive";
    case AllocationStrategy::known_nu:
      return "known_nu";
    case AllocationStrategy::cost_aware:
      return "cost_aware";
  }
  return "L1";
}

std::int64_t Allocation::total() const { return std::accumulate(n.begin(), n.end(), std::int64_t{0}); }

WaterFill water_fill(const Vector& weights, double total, double floor) {
  const Index T = weights.size();
  require(T >= 1, "water_fill needs at least one task");
  require(floor >= 0.0, "floor must be non-negative");
  require((weights.array() >= 0.0).all() && weights.allFinite(),
          "weights must be finite and non-negative");
  require(total >= static_cast<double>(T) * floor, "total below T * floor");
  require(weights.maxCoeff() > 0.0, "water_fill needs a positive weight");

  std::vector<Index> order(static_cast<size_t>(T));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return weights(a) > weights(b); });
  Index positive = 0;
  while (positive < T && weights(order[static_cast<size_t>(positive)]) > 0.0) ++positive;

  WaterFill out;
  if (floor == 0.0) {
    out.c_prime = total / weights.sum();
  } else if (total == static_cast<double>(T) * floor) {
    out.c_prime = floor / weights(order[0]);
  } else {
    // The top m tasks sit above the floor: c' = (total - (T - m) floor) / S_m.
    double prefix = 0.0;
    out.c_prime = std::numeric_limits<double>::quiet_NaN();
    for (Index m = 1; m <= positive; ++m) {
      prefix += weights(order[static_cast<size_t>(m - 1)]);
      const double c = (total - static_cast<double>(T - m) * floor) / prefix;
      const bool top_ok = c * weights(order[static_cast<size_t>(m - 1)]) >= floor * (1.0 - 1e-14);
      const bool next_ok =
          m == positive || c * weights(order[static_cast<size_t>(m)]) <= floor * (1.0 + 1e-14);
      if (top_ok && next_ok) {
        out.c_prime = c;
        break;
      }
    }
    if (!std::isfinite(out.c_prime)) {
      // Numerically unreachable; fall back to the full-support piece.
      out.c_prime = (total - static_cast<double>(T - positive) * floor) / prefix;
    }
  }
  out.n = (out.c_prime * weights.array()).max(floor).matrix();
  return out;
}

std::vector<std::int64_t> round_largest_remainder(const Vector& continuous, std::int64_t total) {
  const Index T = continuous.size();
  std::vector<std::int64_t> n(static_cast<size_t>(T));
  std::vector<double> frac(static_cast<size_t>(T));
  std::int64_t assigned = 0;
  for (Index t = 0; t < T; ++t) {
    const double v = std::max(0.0, continuous(t));
    const double f = std::floor(v);
    n[static_cast<size_t>(t)] = static_cast<std::int64_t>(f);
    frac[static_cast<size_t>(t)] = v - f;
    assigned += n[static_cast<size_t>(t)];
  }
  std::int64_t remainder = total - assigned;
  require(remainder >= 0, "continuous allocation exceeds the total");
  std::vector<Index> order(static_cast<size_t>(T));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return frac[static_cast<size_t>(a)] > frac[static_cast<size_t>(b)];
  });
  for (Index i = 0; remainder > 0; i = (i + 1) % T, --remainder) ++n[static_cast<size_t>(order[static_cast<size_t>(i)])];
  return n;
}

namespace {

void check_budget(Index T, std::int64_t N_tot, std::int64_t N_floor) {
  require(T >= 1, "allocation needs at least one task");
  require(N_floor >= 0, "N_floor must be non-negative");
  if (N_tot < static_cast<std::int64_t>(T) * N_floor) {
    throw InfeasibleError("budget " + std::to_string(N_tot) + " below T * N_floor = " +
                          std::to_string(static_cast<std::int64_t>(T) * N_floor));
  }
}

Allocation from_weights(const Vector& weights, std::int64_t N_tot, std::int64_t N_floor,
                        AllocationStrategy strategy, double q) {
  const Index T = weights.size();
  check_budget(T, N_tot, N_floor);
  Allocation a;
  a.N_tot = N_tot;
  a.N_floor = N_floor;
  a.strategy = strategy;
  a.q = q;
  if (!(weights.maxCoeff() > 0.0)) {
    a = uniform_allocation(static_cast<int>(T), N_tot, N_floor);
    a.strategy = strategy;
    a.q = q;
    a.warnings.push_back("relevance vector is zero; fell back to a uniform allocation");
    return a;
  }
  const WaterFill wf = water_fill(weights, static_cast<double>(N_tot), static_cast<double>(N_floor));
  a.continuous = wf.n;
  a.c_prime = wf.c_prime;
  a.n = round_largest_remainder(wf.n, N_tot);
  return a;
}

}  // namespace

Allocation allocate_fixed_nu(const Vector& nu, std::int64_t N_tot, std::int64_t N_floor) {
  require(nu.allFinite(), "nu must be finite");
  return from_weights(nu.cwiseAbs(), N_tot, N_floor, AllocationStrategy::L1, 1.0);
}

Allocation lpnq_allocation(const Vector& nu_p, double q, std::int64_t N_tot, std::int64_t N_floor) {
  require(q > 0.0 && std::isfinite(q), "q must be positive");
  require(nu_p.allFinite(), "nu must be finite");
  const Vector weights = nu_p.cwiseAbs().array().pow(q).matrix();
  AllocationStrategy s = AllocationStrategy::LpNq;
  if (q == 1.0) s = AllocationStrategy::L1;
  if (q == 2.0) s = AllocationStrategy::L2;
  return from_weights(weights, N_tot, N_floor, s, q);
}

Allocation uniform_allocation(int T, std::int64_t N_tot, std::int64_t N_floor) {
  check_budget(T, N_tot, N_floor);
  Allocation a;
  a.N_tot = N_tot;
  a.N_floor = N_floor;
  a.strategy = AllocationStrategy::passive;
  a.continuous = Vector::Constant(T, static_cast<double>(N_tot) / T);
  a.c_prime = static_cast<double>(N_tot) / T;
  a.n.assign(static_cast<size_t>(T), N_tot / T);
  for (std::int64_t r = 0; r < N_tot % T; ++r) ++a.n[static_cast<size_t>(r)];
  return a;
}

double nu_tilde_objective(const Vector& nu, std::span<const std::int64_t> n) {
  require(static_cast<Index>(n.size()) == nu.size(), "nu and allocation lengths differ");
  double total = 0.0;
  for (Index t = 0; t < nu.size(); ++t) {
    const double v = nu(t);
    if (v == 0.0) continue;
    const auto nt = n[static_cast<size_t>(t)];
    if (nt <= 0)
      throw std::domain_error("task " + std::to_string(t + 1) +
                              " has nonzero relevance but no samples");
    total += v * v / static_cast<double>(nt);
  }
  return total;
}

double nu_tilde_objective(const Vector& nu, const Allocation& allocation) {
  return nu_tilde_objective(nu, std::span<const std::int64_t>(allocation.n));
}

double nu_tilde_objective(const Vector& nu, const Vector& n_continuous) {
  require(n_continuous.size() == nu.size(), "nu and allocation lengths differ");
  double total = 0.0;
  for (Index t = 0; t < nu.size(); ++t) {
    if (nu(t) == 0.0) continue;
    if (!(n_continuous(t) > 0.0))
      throw std::domain_error("task " + std::to_string(t + 1) +
                              " has nonzero relevance but no samples");
    total += nu(t) * nu(t) / n_continuous(t);
  }
  return total;
}

namespace {

// argmin sum_t nu_t^2 / n_t  s.t.  W nu = w, i.e. nu = D W^T (W D W^T)^{-1} w.
Vector weighted_min_norm(const Matrix& W, const Vector& w, const Vector& n) {
  const Matrix WD = W * n.asDiagonal();
  const Matrix M = WD * W.transpose();
  const Vector mu = M.ldlt().solve(w);
  return WD.transpose() * mu;
}

}  // namespace

BilevelResult bilevel_oracle(const Matrix& W, const Vector& w, std::int64_t N_tot,
                             std::int64_t N_floor, const BilevelOptions& options) {
  const Index T = W.cols();
  require(T <= 30, "bilevel_oracle is limited to T <= 30");
  check_budget(T, N_tot, N_floor);
  const RelevanceVector l2 = min_l2_solution(W, w);  // throws on rank deficiency

  std::vector<Vector> starts{l2.nu};
  const Matrix P_null = Matrix::Identity(T, T) - W.completeOrthogonalDecomposition().pseudoInverse() * W;
  Stream rng(stream_seed(options.seed, kAuxDomain, 31));
  for (int s = 0; s < options.random_starts; ++s) {
    Vector g(T);
    for (Index t = 0; t < T; ++t) g(t) = rng.normal();
    starts.push_back(l2.nu + l2.nu.norm() * (P_null * g));
  }

  const double total = static_cast<double>(N_tot);
  const double floor = static_cast<double>(N_floor);
  BilevelResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (const Vector& start : starts) {
    Vector nu = start;
    Vector n;
    double obj = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < options.max_iters; ++it) {
      if (!(nu.cwiseAbs().maxCoeff() > 0.0)) break;
      n = water_fill(nu.cwiseAbs(), total, floor).n;
      const Vector next = weighted_min_norm(W, w, n);
      const double next_obj = nu_tilde_objective(next, n);
      const double change = (next - nu).lpNorm<1>();
      nu = next;
      const bool done = obj - next_obj <= options.tol * next_obj &&
                        change <= 1e-13 * (1.0 + nu.lpNorm<1>());
      obj = next_obj;
      if (done) break;
    }
    if (n.size() == 0) continue;
    n = water_fill(nu.cwiseAbs(), total, floor).n;
    obj = nu_tilde_objective(nu, n);
    best.iterations += it;
    ++best.starts;
    if (obj < best.objective) {
      best.objective = obj;
      best.nu = nu;
      best.n_continuous = n;
    }
  }
  require(best.nu.size() == T, "bilevel_oracle found no feasible start");
  best.allocation = allocate_fixed_nu(best.nu, N_tot, N_floor);
  return best;
}

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::linear:
      return "linear";
    case CostKind::saltus:
      return "saltus";
    case CostKind::piecewise_concave:
      return "piecewise_concave";
  }
  return "linear";
}

CostKind cost_kind_from_string(const std::string& s) {
  if (s == "linear") return CostKind::linear;
  if (s == "saltus") return CostKind::saltus;
  if (s == "piecewise_concave") return CostKind::piecewise_concave;
  throw std::invalid_argument("unknown cost kind: " + s);
}

CostFunction CostFunction::linear(double C_var) {
  CostFunction f;
  f.kind = CostKind::linear;
  f.C_var = C_var;
  return f;
}

CostFunction CostFunction::saltus(double C_fix, double C_var, std::int64_t N_free) {
  CostFunction f;
  f.kind = CostKind::saltus;
  f.C_fix = C_fix;
  f.C_var = C_var;
  f.N_free = N_free;
  return f;
}

void CostFunction::validate() const {
  require(C_fix >= 0.0 && C_var >= 0.0, "cost coefficients must be non-negative");
  require(N_free >= 0, "N_free must be non-negative");
  if (kind == CostKind::piecewise_concave) {
    require(breakpoints.size() == slopes.size(), "breakpoints and slopes must pair up");
    double prev_b = 0.0;
    double prev_s = C_var;
    for (size_t i = 0; i < slopes.size(); ++i) {
      require(breakpoints[i] > prev_b, "breakpoints must be increasing and positive");
      require(slopes[i] >= 0.0 && slopes[i] <= prev_s, "slopes must be non-increasing");
      prev_b = breakpoints[i];
      prev_s = slopes[i];
    }
  }
}

double CostFunction::operator()(std::int64_t n) const {
  require(n >= 0, "sample counts must be non-negative");
  switch (kind) {
    case CostKind::linear:
      return C_var * static_cast<double>(n);
    case CostKind::saltus:
      return n <= N_free ? 0.0 : C_fix + C_var * static_cast<double>(n - N_free);
    case CostKind::piecewise_concave: {
      if (n <= N_free) return 0.0;
      const double m = static_cast<double>(n - N_free);
      double cost = C_fix;
      double start = 0.0;
      double slope = C_var;
      for (size_t i = 0; i < breakpoints.size() && m > breakpoints[i]; ++i) {
        cost += slope * (breakpoints[i] - start);
        start = breakpoints[i];
        slope = slopes[i];
      }
      return cost + slope * (m - start);
    }
  }
  return 0.0;
}

double eval_cost(const Allocation& increments, const Allocation& phase1,
                 std::span<const CostFunction> cost_fns) {
  require(increments.n.size() == cost_fns.size() && phase1.n.size() == cost_fns.size(),
          "one cost function per task is required");
  double total = 0.0;
  for (size_t t = 0; t < cost_fns.size(); ++t) {
    require(increments.n[t] >= 0 && phase1.n[t] >= 0, "sample counts must be non-negative");
    total += cost_fns[t](phase1.n[t] + increments.n[t]);
  }
  return total;
}

double eval_total_cost(const Allocation& totals, std::span<const CostFunction> cost_fns) {
  require(totals.n.size() == cost_fns.size(), "one cost function per task is required");
  double total = 0.0;
  for (size_t t = 0; t < cost_fns.size(); ++t) total += cost_fns[t](totals.n[t]);
  return total;
}

Allocation floor_allocation(int T, std::int64_t N_floor) {
  require(T >= 1 && N_floor >= 0, "invalid floor allocation");
  Allocation a;
  a.n.assign(static_cast<size_t>(T), N_floor);
  a.continuous = Vector::Constant(T, static_cast<double>(N_floor));
  a.N_tot = static_cast<std::int64_t>(T) * N_floor;
  a.N_floor = N_floor;
  a.strategy = AllocationStrategy::passive;
  return a;
}

Allocation increments_over(const Allocation& totals, const Allocation& phase1) {
  require(totals.n.size() == phase1.n.size(), "allocation lengths differ");
  Allocation inc = totals;
  inc.N_floor = 0;
  inc.continuous = totals.continuous.size() == phase1.continuous.size()
                       ? Vector(totals.continuous - phase1.continuous)
                       : Vector();
  for (size_t t = 0; t < inc.n.size(); ++t) {
    inc.n[t] = totals.n[t] - phase1.n[t];
    require(inc.n[t] >= 0, "phase-1 counts exceed the totals");
  }
  inc.N_tot = inc.total();
  return inc;
}

Allocation cost_aware_allocate(const Vector& nu, std::int64_t N_tot, std::int64_t N_floor,
                               std::span<const CostFunction> cost_fns) {
  require(static_cast<Index>(cost_fns.size()) == nu.size(), "one cost function per task is required");
  for (const auto& f : cost_fns) f.validate();
  Vector masked = nu;
  const double tol = default_support_tol(nu);
  for (Index t = 0; t < nu.size(); ++t)
    if (std::abs(masked(t)) <= tol) masked(t) = 0.0;
  Allocation a = allocate_fixed_nu(masked, N_tot, N_floor);
  a.strategy = AllocationStrategy::cost_aware;
  return a;
}

std::optional<SupportSearchResult> cost_support_enumeration(
    const Matrix& W, const Vector& w, std::int64_t N_tot, std::int64_t N_floor,
    std::span<const CostFunction> cost_fns, double objective_cap, int max_support) {
  const Index T = W.cols();
  require(T <= 15, "cost_support_enumeration is limited to T <= 15");
  require(static_cast<Index>(cost_fns.size()) == T, "one cost function per task is required");
  require(max_support >= 1, "max_support must be positive");
  check_budget(T, N_tot, N_floor);

  std::optional<SupportSearchResult> best;
  long checked = 0;
  for (unsigned mask = 1; mask < (1u << T); ++mask) {
    const int size = std::popcount(mask);
    if (size > max_support) continue;
    std::vector<Index> support;
    for (Index t = 0; t < T; ++t)
      if (mask & (1u << t)) support.push_back(t);
    Matrix WS(W.rows(), size);
    for (int i = 0; i < size; ++i) WS.col(i) = W.col(support[static_cast<size_t>(i)]);
    Vector nu_s;
    try {
      nu_s = l1_oracle_lp(WS, w).nu;
    } catch (const InfeasibleError&) {
      continue;
    }
    if ((WS * nu_s - w).norm() > 1e-8 * (1.0 + w.norm())) continue;
    ++checked;
    Vector nu = Vector::Zero(T);
    for (int i = 0; i < size; ++i) nu(support[static_cast<size_t>(i)]) = nu_s(i);
    Allocation a = allocate_fixed_nu(nu, N_tot, N_floor);
    double obj;
    try {
      obj = nu_tilde_objective(nu, a);
    } catch (const std::domain_error&) {
      continue;
    }
    if (obj > objective_cap) continue;
    const double cost = eval_total_cost(a, cost_fns);
    if (!best || cost < best->cost - 1e-9 * std::max(1.0, std::abs(cost)) ||
        (std::abs(cost - best->cost) <= 1e-9 * std::max(1.0, std::abs(cost)) &&
         obj < best->objective)) {
      best = SupportSearchResult{support, nu, a, cost, obj, 0};
    }
  }
  if (best) best->supports_checked = checked;
  return best;
}

}  // namespace amtrl
