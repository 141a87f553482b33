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

// amtrl: instance generation, single runs, budget sweeps, relevance solves and
// the verification suite.
//
// Exit codes: 0 success, 1 property failure, 2 usage or config error, 3 I/O.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amtrl/relevance.hpp"
#include "amtrl/serialization.hpp"
#include "amtrl/sweep.hpp"
#include "amtrl/verify.hpp"

namespace fs = std::filesystem;
using namespace amtrl;

namespace {

constexpr int kOk = 0;
constexpr int kPropertyFailure = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

// A config may hold the instance spec at the top level or under "instance".
InstanceSpec instance_from_config(const Json& cfg) {
  if (cfg.contains("instance_path")) {
    InstanceSpec s;
    s.kind = InstanceKind::custom;
    s.path = cfg["instance_path"].get<std::string>();
    return s;
  }
  return instance_spec_from_json(cfg.contains("instance") ? cfg["instance"] : cfg);
}

int cmd_gen(const fs::path& config, const fs::path& out) {
  const Json cfg = read_json_file(config);
  const GroundTruth gt = make_instance(instance_from_config(cfg));
  const fs::path file = out / "instance.json";
  write_json_file(file, to_json(gt));
  std::cout << file.string() << '\n';
  return kOk;
}

int cmd_run(const fs::path& config, const fs::path& out) {
  const Json cfg = read_json_file(config);
  const GroundTruth gt = make_instance(instance_from_config(cfg));
  const std::string strategy = cfg.value("strategy", std::string("L1"));
  RunParams params;
  if (cfg.contains("params")) params = run_params_from_json(cfg["params"]);
  require(params.N_tot > 0, "params.N_tot must be positive");
  const RunResult r = run_strategy(strategy, gt, params);

  write_json_file(out / "run.json", to_json(r));
  if (!r.stages.empty()) write_text_file(out / "allocation.csv", allocation_csv(r.stages.back().allocation));
  SweepOutput row;
  row.rows.push_back({r.strategy, r.seed, r.N_tot, r.N_floor, r.excess_risk, r.subspace_distance,
                      r.nu_l1, r.support, r.status, r.wall_ms, std::nullopt});
  write_text_file(out / "run.csv", runs_csv(row));
  std::cout << runs_csv(row);
  return kOk;
}

int cmd_sweep(const fs::path& config, const fs::path& out) {
  const SweepConfig cfg = sweep_config_from_json(read_json_file(config));
  const SweepOutput result = run_sweep(cfg);
  write_sweep(result, cfg, out);
  std::cout << summary_csv(result);
  return kOk;
}

int cmd_nu_solve(const fs::path& config, const fs::path& out) {
  const Json cfg = read_json_file(config);
  Matrix W;
  Vector w;
  if (cfg.contains("W_star")) {
    const GroundTruth gt = ground_truth_from_json(cfg);
    W = gt.W_star;
    w = gt.w_target_star;
  } else {
    if (!cfg.contains("W") || !cfg.contains("w")) throw FormatError("nu-solve needs 'W' and 'w'");
    W = matrix_from_json(cfg["W"]);
    w = vector_from_json(cfg["w"]);
  }
  require(W.rows() == w.size(), "W and w disagree on k");
  NuSolver solver = NuSolver::lasso;
  if (cfg.contains("solver")) solver = nu_solver_from_string(cfg["solver"].get<std::string>());
  RelevanceVector nu;
  switch (solver) {
    case NuSolver::lasso:
      nu = lasso(W, w, cfg.value("lambda", kLazyLambda));
      break;
    case NuSolver::min_l2:
      nu = min_l2_solution(W, w);
      break;
    case NuSolver::lp_l1_oracle:
      nu = l1_oracle_lp(W, w);
      break;
    case NuSolver::known:
      if (!cfg.contains("nu")) throw FormatError("solver 'known' needs 'nu'");
      nu = known_relevance(vector_from_json(cfg["nu"]));
      break;
  }
  const Json doc = to_json(nu);
  if (!out.empty()) write_json_file(out / "nu.json", doc);
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const std::string& level, const std::vector<std::string>& overrides,
               const fs::path& out) {
  VerifyOptions opts;
  opts.level = verify_level_from_string(level);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected name=value, got " + o);
    opts.tolerance_overrides[o.substr(0, eq)] = std::stod(o.substr(eq + 1));
  }
  const VerifyReport report = run_verify(opts);
  const Json doc = to_json(report);
  if (!out.empty()) write_json_file(out / "verify.json", doc);
  std::cout << doc.dump(2) << '\n';
  for (const auto& p : report.properties)
    if (!p.passed) std::cerr << "FAILED: " << p.name << " " << p.detail << '\n';
  return report.passed() ? kOk : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active multi-task representation learning experiments"};
  app.require_subcommand(1);

  fs::path config, out;
  std::string level = "fast";
  std::vector<std::string> overrides;

  auto add_io = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", config, "JSON config")->required();
    auto* o = sub->add_option("--out", out, "output directory");
    if (out_required) o->required();
  };
  auto* gen = app.add_subcommand("gen", "generate an instance");
  add_io(gen, true);
  auto* run = app.add_subcommand("run", "run one strategy");
  add_io(run, true);
  auto* sweep = app.add_subcommand("sweep", "strategies x budgets x seeds");
  add_io(sweep, true);
  auto* nu = app.add_subcommand("nu-solve", "solve for a relevance vector");
  add_io(nu, false);
  auto* verify = app.add_subcommand("verify", "run the oracle property suite");
  verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--tolerance", overrides, "override a tolerance, name=value");
  verify->add_option("--out", out, "output directory");
  verify->add_option("--config", config, "unused; accepted for symmetry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(config, out);
    if (*run) return cmd_run(config, out);
    if (*sweep) return cmd_sweep(config, out);
    if (*nu) return cmd_nu_solve(config, out);
    if (*verify) return cmd_verify(level, overrides, out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kUsage;
  } catch (const RankDeficientError& e) {
    std::cerr << "rank deficient: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPropertyFailure;
  }
  return kUsage;
}
