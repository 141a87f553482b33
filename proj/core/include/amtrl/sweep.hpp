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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "amtrl/instance.hpp"
#include "amtrl/pipeline.hpp"
#include "amtrl/serialization.hpp"

namespace amtrl {

struct InstanceSpec {
  InstanceKind kind = InstanceKind::random;
  int d = 20;
  int k = 3;
  int T = 10;
  double sigma_z = 0.1;
  std::uint64_t seed = 0;
  /// sigma_min floor of random instances.
  double sigma_min_floor = 1.0;
  /// Target norm of aligned instances.
  double c_w = 1.0;
  /// Path of a stored instance; required for kind = custom.
  std::string path;
};

InstanceSpec instance_spec_from_json(const Json& j);
Json to_json(const InstanceSpec& spec);
/// Builds (or, for custom specs, loads) the instance.
GroundTruth make_instance(const InstanceSpec& spec);

/// Run parameters from a JSON object; absent keys keep the values in `base`.
RunParams run_params_from_json(const Json& j, RunParams base = {});

/// Names accepted in SweepConfig::strategies.
const std::vector<std::string>& known_strategies();

/// Runs one named strategy. "known_L1" allocates from the exact minimum-L1
/// relevance vector of the ground truth, "known_L2" from the minimum-L2 one
/// with q = 2; "multistage" spreads N_tot over a geometric beta schedule
/// unless params.beta_1 is set.
RunResult run_strategy(const std::string& strategy, const GroundTruth& gt, RunParams params);

struct SweepConfig {
  InstanceSpec instance;
  /// Draw a fresh instance per seed (instance seed + seed index) instead of
  /// reusing one.
  bool resample_instance = false;
  std::vector<std::string> strategies;
  std::vector<std::int64_t> budgets;
  std::int64_t N_floor = 20;
  int seeds = 1;
  std::uint64_t seed_base = 1000;
  RunParams params;
  /// Also write one JSON document per run under runs/.
  bool write_run_json = false;
};

/// Checks the strictly increasing budget grid, seeds >= 1, and strategy names.
void validate(const SweepConfig& config);
SweepConfig sweep_config_from_json(const Json& j);

struct SweepRow {
  std::string strategy;
  std::uint64_t seed = 0;
  std::int64_t N_tot = 0;
  std::int64_t N_floor = 0;
  double ER = 0.0;
  double subspace_dist = 0.0;
  double nu_l1 = 0.0;
  int support = 0;
  std::string status = "ok";
  double wall_ms = 0.0;
  std::optional<RunResult> result;
};

struct SummaryRow {
  std::string strategy;
  std::int64_t N_tot = 0;
  int runs = 0;
  int ok_runs = 0;
  double median_ER = 0.0;
  double q1_ER = 0.0;
  double q3_ER = 0.0;
  double iqr_ER = 0.0;
  double median_subspace_dist = 0.0;
};

struct SlopeRow {
  std::string strategy;
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

struct SweepOutput {
  std::vector<SweepRow> rows;  // sorted by (strategy, seed, N_tot)
  std::vector<SummaryRow> summary;
  std::vector<SlopeRow> slopes;
};

/// Worker count: AMTRL_THREADS when set, else the hardware concurrency.
int worker_threads();

/// Runs strategies x budgets x seeds on a worker pool. Infeasible or
/// rank-deficient rows are recorded through their status, not thrown.
SweepOutput run_sweep(const SweepConfig& config);

inline constexpr const char* kRunsHeader =
    "strategy,seed,N_tot,N_floor,ER,subspace_dist,nu_l1,support,status,wall_ms";
inline constexpr const char* kSummaryHeader =
    "strategy,N_tot,runs,ok_runs,median_ER,q1_ER,q3_ER,IQR_ER,median_subspace_dist";

std::string runs_csv(const SweepOutput& out);
std::string summary_csv(const SweepOutput& out);
/// "log(N_tot) log(median ER)" pairs for one strategy.
std::string plot_data(const SweepOutput& out, const std::string& strategy);

/// Writes runs.csv, summary.csv, slopes.csv, plot_<strategy>.dat and, when
/// enabled, runs/<strategy>_<N_tot>_<seed>.json under `dir`.
void write_sweep(const SweepOutput& out, const SweepConfig& config,
                 const std::filesystem::path& dir);

}  // namespace amtrl
