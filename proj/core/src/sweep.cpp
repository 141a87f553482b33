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

#include "amtrl/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "amtrl/stats.hpp"

namespace amtrl {
namespace {

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

InstanceSpec instance_spec_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("instance spec must be an object");
  InstanceSpec s;
  std::string kind = to_string(s.kind);
  read_opt(j, "kind", kind);
  try {
    s.kind = instance_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  read_opt(j, "d", s.d);
  read_opt(j, "k", s.k);
  read_opt(j, "T", s.T);
  read_opt(j, "sigma_z", s.sigma_z);
  read_opt(j, "seed", s.seed);
  read_opt(j, "sigma_min_floor", s.sigma_min_floor);
  read_opt(j, "c_w", s.c_w);
  read_opt(j, "path", s.path);
  return s;
}

Json to_json(const InstanceSpec& s) {
  Json j{{"kind", to_string(s.kind)}, {"d", s.d},   {"k", s.k},
         {"T", s.T},                  {"sigma_z", s.sigma_z}, {"seed", s.seed},
         {"sigma_min_floor", s.sigma_min_floor}, {"c_w", s.c_w}};
  if (!s.path.empty()) j["path"] = s.path;
  return j;
}

GroundTruth make_instance(const InstanceSpec& s) {
  switch (s.kind) {
    case InstanceKind::random:
      return make_random_instance(s.d, s.k, s.T, s.sigma_z, s.sigma_min_floor, s.seed);
    case InstanceKind::almost_sparse:
      return make_almost_sparse_instance(s.d, s.k, s.T, s.sigma_z, s.seed).gt;
    case InstanceKind::aligned_worstcase:
      return make_aligned_worstcase_instance(s.d, s.k, s.T, s.c_w, s.seed, s.sigma_z);
    case InstanceKind::custom:
      require(!s.path.empty(), "custom instances need a path");
      return ground_truth_from_json(read_json_file(s.path));
  }
  throw std::invalid_argument("unknown instance kind");
}

RunParams run_params_from_json(const Json& j, RunParams p) {
  if (!j.is_object()) throw FormatError("run parameters must be an object");
  read_opt(j, "k", p.k);
  read_opt(j, "N_floor", p.N_floor);
  read_opt(j, "N_tot", p.N_tot);
  read_opt(j, "n_target", p.n_target);
  if (j.contains("lambda_policy")) {
    try {
      p.lambda_policy = lambda_policy_from_string(j["lambda_policy"].get<std::string>());
    } catch (const std::exception& e) {
      throw FormatError(e.what());
    }
  }
  if (j.contains("lambda")) {
    read_opt(j, "lambda", p.lambda);
    if (!j.contains("lambda_policy")) p.lambda_policy = LambdaPolicy::explicit_value;
  }
  read_opt(j, "nu_average", p.nu_average);
  read_opt(j, "warm_start", p.warm_start);
  read_opt(j, "seed", p.seed);
  read_opt(j, "stages", p.stages);
  read_opt(j, "growth", p.growth);
  read_opt(j, "beta_1", p.beta_1);
  read_opt(j, "q", p.q);
  if (j.contains("nu_ref")) p.nu_ref = vector_from_json(j["nu_ref"]);
  read_opt(j, "fit_tol", p.fit.tol);
  read_opt(j, "fit_max_iters", p.fit.max_iters);
  if (j.contains("fit_weighting")) {
    try {
      p.fit.weighting = task_weighting_from_string(j["fit_weighting"].get<std::string>());
    } catch (const std::exception& e) {
      throw FormatError(e.what());
    }
  }
  read_opt(j, "lasso_tol", p.lasso.tol);
  read_opt(j, "lasso_max_iters", p.lasso.max_iters);
  return p;
}

const std::vector<std::string>& known_strategies() {
  static const std::vector<std::string> names{"L1",       "L2",       "passive",
                                              "known_L1", "known_L2", "multistage"};
  return names;
}

RunResult run_strategy(const std::string& strategy, const GroundTruth& gt, RunParams params) {
  params.k = gt.k;
  GroundTruthOracle oracle(gt, params.seed);
  RunResult r;
  if (strategy == "L1") {
    r = run_l1_amtrl(oracle, params);
  } else if (strategy == "L2") {
    r = run_l2_amtrl(oracle, params);
  } else if (strategy == "passive") {
    r = run_passive(oracle, params);
  } else if (strategy == "known_L1") {
    params.nu_ref = l1_oracle_lp(gt.W_star, gt.w_target_star).nu;
    params.q = 1.0;
    r = run_known_nu(oracle, params);
  } else if (strategy == "known_L2") {
    params.nu_ref = min_l2_solution(gt.W_star, gt.w_target_star).nu;
    params.q = 2.0;
    r = run_known_nu(oracle, params);
  } else if (strategy == "multistage") {
    if (!(params.beta_1 > 0.0)) {
      double geometric = 0.0;
      for (int i = 0; i < params.stages; ++i) geometric += std::pow(params.growth, i);
      params.beta_1 = static_cast<double>(params.N_tot) / geometric;
    }
    r = run_multistage(oracle, params);
    r.N_tot = params.N_tot;
  } else {
    throw std::invalid_argument("unknown strategy: " + strategy);
  }
  r.strategy = strategy;
  return r;
}

void validate(const SweepConfig& c) {
  require(c.seeds >= 1, "seeds must be >= 1");
  require(!c.budgets.empty(), "budget grid must not be empty");
  for (size_t i = 1; i < c.budgets.size(); ++i)
    require(c.budgets[i] > c.budgets[i - 1], "budget grid must be strictly increasing");
  require(!c.strategies.empty(), "at least one strategy is required");
  for (const auto& s : c.strategies) {
    const auto& names = known_strategies();
    require(std::find(names.begin(), names.end(), s) != names.end(), "unknown strategy: " + s);
  }
  require(c.N_floor >= 0, "N_floor must be non-negative");
}

SweepConfig sweep_config_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("sweep config must be an object");
  SweepConfig c;
  if (j.contains("instance")) c.instance = instance_spec_from_json(j["instance"]);
  read_opt(j, "resample_instance", c.resample_instance);
  read_opt(j, "strategies", c.strategies);
  read_opt(j, "budgets", c.budgets);
  read_opt(j, "N_floor", c.N_floor);
  read_opt(j, "seeds", c.seeds);
  read_opt(j, "seed_base", c.seed_base);
  read_opt(j, "write_run_json", c.write_run_json);
  if (j.contains("params")) c.params = run_params_from_json(j["params"]);
  c.params.N_floor = c.N_floor;
  validate(c);
  return c;
}

int worker_threads() {
  if (const char* env = std::getenv("AMTRL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepOutput run_sweep(const SweepConfig& config) {
  validate(config);
  struct Job {
    std::string strategy;
    std::int64_t N_tot;
    int seed_index;
  };
  std::vector<Job> jobs;
  for (const auto& s : config.strategies)
    for (auto N : config.budgets)
      for (int i = 0; i < config.seeds; ++i) jobs.push_back({s, N, i});

  // One instance per seed index (or one shared), built up front.
  std::vector<GroundTruth> instances;
  const int instance_count = config.resample_instance ? config.seeds : 1;
  for (int i = 0; i < instance_count; ++i) {
    InstanceSpec spec = config.instance;
    if (config.resample_instance) spec.seed += static_cast<std::uint64_t>(i);
    instances.push_back(make_instance(spec));
  }

  std::vector<SweepRow> rows(jobs.size());
  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const size_t idx = next++;
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      SweepRow& row = rows[idx];
      row.strategy = job.strategy;
      row.seed = config.seed_base + static_cast<std::uint64_t>(job.seed_index);
      row.N_tot = job.N_tot;
      row.N_floor = config.N_floor;
      RunParams p = config.params;
      p.N_tot = job.N_tot;
      p.N_floor = config.N_floor;
      p.seed = row.seed;
      const GroundTruth& gt = instances[config.resample_instance ? job.seed_index : 0];
      try {
        RunResult r = run_strategy(job.strategy, gt, p);
        row.ER = r.excess_risk;
        row.subspace_dist = r.subspace_distance;
        row.nu_l1 = r.nu_l1;
        row.support = r.support;
        row.wall_ms = r.wall_ms;
        if (!std::isfinite(row.ER) || !std::isfinite(row.subspace_dist)) {
          row.status = "nonfinite";
          row.ER = row.subspace_dist = 0.0;
        }
        if (config.write_run_json) row.result = std::move(r);
      } catch (const InfeasibleError&) {
        row.status = "infeasible";
      } catch (const RankDeficientError&) {
        row.status = "rank_deficient";
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(worker_threads(), static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.strategy, a.seed, a.N_tot) < std::tie(b.strategy, b.seed, b.N_tot);
  });

  SweepOutput out;
  std::map<std::pair<std::string, std::int64_t>, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) groups[{r.strategy, r.N_tot}].push_back(&r);
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> curves;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.strategy = key.first;
    s.N_tot = key.second;
    s.runs = static_cast<int>(members.size());
    std::vector<double> er, dist;
    for (const SweepRow* r : members) {
      if (r->status != "ok") continue;
      er.push_back(r->ER);
      dist.push_back(r->subspace_dist);
    }
    s.ok_runs = static_cast<int>(er.size());
    if (!er.empty()) {
      s.median_ER = median(er);
      s.q1_ER = quantile(er, 0.25);
      s.q3_ER = quantile(er, 0.75);
      s.iqr_ER = s.q3_ER - s.q1_ER;
      s.median_subspace_dist = median(dist);
      if (s.median_ER > 0.0) {
        curves[s.strategy].first.push_back(static_cast<double>(s.N_tot));
        curves[s.strategy].second.push_back(s.median_ER);
      }
    }
    out.summary.push_back(s);
  }
  for (const auto& [strategy, xy] : curves) {
    if (xy.first.size() < 2) continue;
    const LineFit f = fit_loglog(xy.first, xy.second);
    out.slopes.push_back({strategy, f.slope, f.intercept, f.points});
  }
  out.rows = std::move(rows);
  return out;
}

std::string runs_csv(const SweepOutput& out) {
  std::ostringstream os;
  os << kRunsHeader << '\n';
  for (const auto& r : out.rows) {
    os << r.strategy << ',' << r.seed << ',' << r.N_tot << ',' << r.N_floor << ','
       << format_double(r.ER) << ',' << format_double(r.subspace_dist) << ','
       << format_double(r.nu_l1) << ',' << r.support << ',' << r.status << ','
       << format_double(r.wall_ms) << '\n';
  }
  return os.str();
}

std::string summary_csv(const SweepOutput& out) {
  std::ostringstream os;
  os << kSummaryHeader << '\n';
  for (const auto& s : out.summary) {
    os << s.strategy << ',' << s.N_tot << ',' << s.runs << ',' << s.ok_runs << ','
       << format_double(s.median_ER) << ',' << format_double(s.q1_ER) << ','
       << format_double(s.q3_ER) << ',' << format_double(s.iqr_ER) << ','
       << format_double(s.median_subspace_dist) << '\n';
  }
  return os.str();
}

std::string plot_data(const SweepOutput& out, const std::string& strategy) {
  std::ostringstream os;
  os << "# log(N_tot) log(median_ER)\n";
  for (const auto& s : out.summary) {
    if (s.strategy != strategy || s.ok_runs == 0 || !(s.median_ER > 0.0)) continue;
    os << format_double(std::log(static_cast<double>(s.N_tot))) << ' '
       << format_double(std::log(s.median_ER)) << '\n';
  }
  return os.str();
}

void write_sweep(const SweepOutput& out, const SweepConfig& config,
                 const std::filesystem::path& dir) {
  write_text_file(dir / "runs.csv", runs_csv(out));
  write_text_file(dir / "summary.csv", summary_csv(out));
  std::ostringstream slopes;
  slopes << "strategy,slope,intercept,points\n";
  for (const auto& s : out.slopes)
    slopes << s.strategy << ',' << format_double(s.slope) << ',' << format_double(s.intercept)
           << ',' << s.points << '\n';
  write_text_file(dir / "slopes.csv", slopes.str());
  for (const auto& s : config.strategies)
    write_text_file(dir / ("plot_" + s + ".dat"), plot_data(out, s));
  if (config.write_run_json) {
    for (const auto& r : out.rows) {
      if (!r.result) continue;
      write_json_file(dir / "runs" /
                          (r.strategy + "_" + std::to_string(r.N_tot) + "_" +
                           std::to_string(r.seed) + ".json"),
                      to_json(*r.result));
    }
  }
}

}  // namespace amtrl
