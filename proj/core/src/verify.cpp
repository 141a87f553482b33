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

#include "amtrl/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "amtrl/allocation.hpp"
#include "amtrl/relevance.hpp"
#include "amtrl/rng.hpp"
#include "amtrl/trainer.hpp"

namespace amtrl {

VerifyLevel verify_level_from_string(const std::string& s) {
  if (s == "fast") return VerifyLevel::fast;
  if (s == "full") return VerifyLevel::full;
  throw std::invalid_argument("verify level must be 'fast' or 'full', got '" + s + "'");
}

std::string to_string(VerifyLevel level) { return level == VerifyLevel::fast ? "fast" : "full"; }

bool VerifyReport::passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.passed; });
}

namespace {

// Tracks the worst violation of one property against its tolerance.
struct Probe {
  double tol = 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  void check(double violation, const std::string& where) {
    ++cases;
    worst = std::max(worst, violation);
    if (!(violation <= tol)) {
      if (failures == 0) first_failure = where;
      ++failures;
    }
  }
};

using Body = std::function<void(Probe&, bool full, std::uint64_t seed)>;

struct Property {
  std::string name;
  double tolerance;
  Body body;
};

Matrix gaussian(Index r, Index c, Stream& rng) {
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

Vector gaussian(Index n, Stream& rng) { return gaussian(n, 1, rng).col(0); }

int uniform_int(Stream& rng, int lo, int hi) {
  return lo + static_cast<int>(std::floor(rng.uniform() * (hi - lo + 1)));
}

std::string where(const char* what, int i) {
  std::ostringstream os;
  os << what << " #" << i;
  return os.str();
}

// A random feasible integer allocation: floors plus a random split of the rest.
std::vector<std::int64_t> random_allocation(int T, std::int64_t N, std::int64_t F, Stream& rng) {
  std::vector<std::int64_t> n(static_cast<size_t>(T), F);
  Vector u(T);
  for (Index t = 0; t < T; ++t) u(t) = -std::log(std::max(1e-300, rng.uniform()));
  const std::int64_t rest = N - static_cast<std::int64_t>(T) * F;
  const Vector share = u / u.sum() * static_cast<double>(rest);
  std::int64_t used = 0;
  for (int t = 0; t < T; ++t) {
    const auto s = static_cast<std::int64_t>(std::floor(share(t)));
    n[static_cast<size_t>(t)] += s;
    used += s;
  }
  for (std::int64_t r = 0; r < rest - used; ++r)
    ++n[static_cast<size_t>(uniform_int(rng, 0, T - 1))];
  return n;
}

struct System {
  Matrix W;
  Vector w;
  int k;
};

System random_system(Stream& rng, int max_k, int max_T, bool strictly_wide) {
  const int k = uniform_int(rng, 1, max_k);
  const int T = uniform_int(rng, strictly_wide ? k + 1 : k, std::max(max_T, k + 1));
  System s{gaussian(k, T, rng), Vector(), k};
  s.w = s.W * gaussian(T, rng);
  return s;
}

std::vector<Property> properties() {
  std::vector<Property> ps;

  ps.push_back({"allocation_beats_random_integer", 1e-12, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 1);
    const int instances = full ? 100 : 20;
    const int draws = full ? 1000 : 200;
    for (int i = 0; i < instances; ++i) {
      const int T = uniform_int(rng, 2, 20);
      Vector nu = gaussian(T, rng);
      const std::int64_t F = uniform_int(rng, 1, 20);
      const std::int64_t N = T * F + uniform_int(rng, 0, 5000);
      const double best = nu_tilde_objective(nu, allocate_fixed_nu(nu, N, F));
      double violation = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < draws; ++r) {
        const auto n = random_allocation(T, N, F, rng);
        const double obj = nu_tilde_objective(nu, std::span<const std::int64_t>(n));
        violation = std::max(violation, (best - obj) / obj);
      }
      p.check(violation, where("instance", i));
    }
  }});

  ps.push_back({"floor_free_equality", 1e-12, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 2);
    const int instances = full ? 100 : 30;
    for (int i = 0; i < instances; ++i) {
      const int T = uniform_int(rng, 1, 40);
      const Vector nu = gaussian(T, rng);
      const double N = 1.0 + 1e5 * rng.uniform();
      const WaterFill wf = water_fill(nu.cwiseAbs(), N, 0.0);
      const double expect = std::pow(nu.lpNorm<1>(), 2) / N;
      p.check(std::abs(nu_tilde_objective(nu, wf.n) - expect) / expect, where("instance", i));
    }
  }});

  ps.push_back({"lp_support_at_most_k", 0.0, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 3);
    const int instances = full ? 100 : 25;
    for (int i = 0; i < instances; ++i) {
      const System s = random_system(rng, 6, 30, false);
      const RelevanceVector nu = l1_oracle_lp(s.W, s.w);
      p.check(static_cast<double>(nu.support_size - s.k), where("instance", i));
    }
  }});

  ps.push_back({"lp_feasibility", 1e-8, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 4);
    const int instances = full ? 100 : 25;
    for (int i = 0; i < instances; ++i) {
      const System s = random_system(rng, 6, 30, false);
      const Vector nu = l1_oracle_lp(s.W, s.w).nu;
      p.check((s.W * nu - s.w).cwiseAbs().maxCoeff() / (1.0 + s.w.norm()), where("instance", i));
    }
  }});

  ps.push_back({"lp_l1_minimality", 1e-9, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 5);
    const int instances = full ? 50 : 10;
    const int draws = full ? 1000 : 100;
    for (int i = 0; i < instances; ++i) {
      const System s = random_system(rng, 5, 20, true);
      const Vector nu1 = l1_oracle_lp(s.W, s.w).nu;
      const Matrix null_proj = Matrix::Identity(s.W.cols(), s.W.cols()) -
                               s.W.completeOrthogonalDecomposition().pseudoInverse() * s.W;
      double violation = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < draws; ++r) {
        const Vector other = nu1 + null_proj * gaussian(s.W.cols(), rng) * rng.uniform();
        violation = std::max(violation, (nu1.lpNorm<1>() - other.lpNorm<1>()) /
                                            (1.0 + other.lpNorm<1>()));
      }
      p.check(violation, where("instance", i));
    }
  }});

  ps.push_back({"norm_bounds_general", 1e-9, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 3);  // same instances as the sparsity sweep
    const int instances = full ? 100 : 25;
    for (int i = 0; i < instances; ++i) {
      const System s = random_system(rng, 6, 30, false);
      const NormBoundReport r = norm_bound_check(s.W, s.w);
      p.check(std::max((r.nu1_l1 - r.l1_general_bound) / r.l1_general_bound,
                       (r.nu2_l2 - r.l2_bound) / r.l2_bound),
              where("instance", i));
    }
  }});

  ps.push_back({"lasso_basis_pursuit_limit", 1e-4, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 6);
    const int instances = full ? 50 : 15;
    for (int i = 0; i < instances; ++i) {
      const System s = random_system(rng, 5, 20, true);
      const Vector nu1 = l1_oracle_lp(s.W, s.w).nu;
      const Vector nu = lasso(s.W, s.w, 1e-8).nu;
      p.check((nu - nu1).lpNorm<1>() / (1.0 + nu1.lpNorm<1>()), where("instance", i));
    }
  }});

  ps.push_back({"lasso_kkt", 1e-8, [](Probe& p, bool full, auto seed) {
    Stream rng(seed, 7);
    const int instances = full ? 100 : 25;
    for (int i = 0; i < instances; ++i) {
      const System s = random_system(rng, 6, 30, false);
      const double lambda_max = (s.W.transpose() * s.w).cwiseAbs().maxCoeff();
      const double lambda = lambda_max * std::pow(10.0, -8.0 * rng.uniform());
      const RelevanceVector nu = lasso(s.W, s.w, lambda);
      p.check(nu.kkt_residual, where("instance", i));
    }
  }});

  ps.push_back({"lambda_rule_reference", 1e-15, [](Probe& p, bool, auto) {
    const LambdaRule r = lambda_rule(1, 1.0, 1.0, 1.0);
    p.check(std::max(std::abs(r.gamma - 2160.0) / 2160.0, std::abs(r.lambda - 45.0 / 2160.0)),
            "k=1, R=1, C_W=1, sigma=1");
  }});

  ps.push_back({"almost_sparse_reference", 1e-12, [](Probe& p, bool, auto seed) {
    for (int T : {11, 50}) {
      const AlmostSparseInstance inst = make_almost_sparse_instance(T + 10, 3, T, 0.0, seed);
      const Vector& nu = inst.reference_nu;
      p.check(std::abs(nu.norm() - 1.0), where("unit norm, T", T));
      const double nu1 = l1_oracle_lp(inst.gt.W_star, inst.gt.w_target_star).nu.lpNorm<1>();
      p.check((nu1 - nu.lpNorm<1>()) / nu.lpNorm<1>(), where("lp below reference, T", T));
      p.check(nu.lpNorm<1>() - 2.0, where("reference l1 below 2, T", T));
    }
  }});

  auto bilevel = [](Probe& p, bool full, std::uint64_t seed, bool objective) {
    Stream rng(seed, 8);
    const int instances = full ? 20 : 3;
    for (int i = 0; i < instances; ++i) {
      const int k = uniform_int(rng, 1, 4);
      const int T = uniform_int(rng, k + 1, 12);
      const Matrix W = gaussian(k, T, rng);
      const Vector w = W * gaussian(T, rng);
      // Floor-free: a positive floor leaves the L1 allocation O(T N_floor / N)
      // above the true optimum.
      const std::int64_t N = 1000000;
      const Vector nu1 = l1_oracle_lp(W, w).nu;
      const Allocation a = allocate_fixed_nu(nu1, N, 0);
      BilevelOptions opts;
      opts.seed = seed + static_cast<std::uint64_t>(i);
      const BilevelResult b = bilevel_oracle(W, w, N, 0, opts);
      if (objective) {
        const double ref = nu_tilde_objective(nu1, a.continuous);
        p.check(std::abs(b.objective - ref) / ref, where("instance", i));
      } else {
        p.check((b.nu - nu1).lpNorm<1>(), where("instance", i));
      }
    }
  };
  ps.push_back({"bilevel_floor_free_nu", 1e-4,
                [bilevel](Probe& p, bool full, auto seed) { bilevel(p, full, seed, false); }});
  ps.push_back({"bilevel_floor_free_objective", 1e-6,
                [bilevel](Probe& p, bool full, auto seed) { bilevel(p, full, seed, true); }});

  ps.push_back({"als_loss_monotone", 1e-12, [](Probe& p, bool full, auto seed) {
    const int instances = full ? 20 : 5;
    for (int i = 0; i < instances; ++i) {
      const GroundTruth gt = make_random_instance(12, 3, 8, 0.3, 1.0, seed + i);
      std::vector<TaskDataset> data;
      for (int t = 1; t <= gt.T; ++t) data.push_back(sample_task(gt, t, 40, seed + i));
      FitOptions opts;
      opts.seed = seed + i;
      // Random start so the descent has room to show.
      opts.warm_start_B = random_orthonormal(gt.d, gt.k, seed + 1000 + i);
      const FittedModel m = fit_source(data, gt.k, opts);
      double violation = -std::numeric_limits<double>::infinity();
      const auto& h = m.train_loss_history;
      for (size_t j = 1; j < h.size(); ++j)
        violation = std::max(violation, (h[j] - h[j - 1]) / h[j - 1]);
      if (h.size() < 2) violation = 0.0;
      p.check(violation, where("instance", i));
    }
  }});

  ps.push_back({"als_noiseless_recovery", 1e-6, [](Probe& p, bool full, auto seed) {
    const int instances = full ? 10 : 3;
    for (int i = 0; i < instances; ++i) {
      const GroundTruth gt = make_random_instance(10, 3, 6, 0.0, 1.0, seed + 50 + i);
      std::vector<TaskDataset> data;
      for (int t = 1; t <= gt.T; ++t) data.push_back(sample_task(gt, t, 50 * gt.d, seed + i));
      const FittedModel m = fit_source(data, gt.k);
      const double initial = m.train_loss_history.front();
      const double loss_violation = m.final_loss() / (1e-16 * (1.0 + initial));
      // Scaled so that both parts share the 1e-6 tolerance.
      p.check(std::max(subspace_distance(m.B_hat, gt.B_star), 1e-6 * loss_violation),
              where("instance", i));
    }
  }});

  return ps;
}

}  // namespace

std::vector<std::string> verify_property_names() {
  std::vector<std::string> names;
  for (const auto& p : properties())
    names.push_back(p.name);
  return names;
}

VerifyReport run_verify(const VerifyOptions& options) {
  const auto ps = properties();
  for (const auto& [name, tol] : options.tolerance_overrides) {
    const bool known = std::any_of(ps.begin(), ps.end(), [&](const Property& p) { return p.name == name; });
    require(known, "unknown property in tolerance override: " + name);
  }
  VerifyReport report;
  report.level = options.level;
  const bool full = options.level == VerifyLevel::full;
  for (const auto& prop : ps) {
    Probe probe;
    probe.tol = prop.tolerance;
    if (auto it = options.tolerance_overrides.find(prop.name); it != options.tolerance_overrides.end())
      probe.tol = it->second;
    PropertyResult r;
    r.name = prop.name;
    r.tolerance = probe.tol;
    const auto start = std::chrono::steady_clock::now();
    try {
      prop.body(probe, full, options.seed);
      r.passed = probe.failures == 0 && probe.cases > 0;
      r.detail = probe.failures ? "first failure: " + probe.first_failure : "";
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.worst = probe.cases ? probe.worst : 0.0;
    r.cases = probe.cases;
    r.failures = probe.failures;
    report.properties.push_back(r);
  }
  return report;
}

Json to_json(const VerifyReport& report) {
  Json props = Json::array();
  for (const auto& p : report.properties) {
    props.push_back(Json{{"name", p.name},
                         {"passed", p.passed},
                         {"tolerance", p.tolerance},
                         {"worst", p.worst},
                         {"cases", p.cases},
                         {"failures", p.failures},
                         {"detail", p.detail},
                         {"ms", p.ms}});
  }
  return Json{{"level", to_string(report.level)}, {"passed", report.passed()}, {"properties", props}};
}

}  // namespace amtrl
