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

#include "amtrl/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "amtrl/rng.hpp"

namespace amtrl {

GroundTruthOracle::GroundTruthOracle(GroundTruth gt, std::uint64_t seed)
    : gt_(std::move(gt)), seed_(seed) {
  validate(gt_);
}

TaskDataset GroundTruthOracle::sample(int task_index, Index n, std::uint64_t draw) {
  TaskDataset ds = sample_task(gt_, task_index, n, seed_, draw);
  count(task_index, n);
  return ds;
}

std::string to_string(LambdaPolicy p) {
  switch (p) {
    case LambdaPolicy::lazy:
      return "lazy";
    case LambdaPolicy::theory_rule:
      return "theory_rule";
    case LambdaPolicy::explicit_value:
      return "explicit";
  }
  return "lazy";
}

LambdaPolicy lambda_policy_from_string(const std::string& s) {
  if (s == "lazy") return LambdaPolicy::lazy;
  if (s == "theory_rule") return LambdaPolicy::theory_rule;
  if (s == "explicit") return LambdaPolicy::explicit_value;
  throw std::invalid_argument("unknown lambda policy: " + s);
}

double select_lambda(const RunParams& params, const Matrix& W_hat, const Vector& w_hat) {
  switch (params.lambda_policy) {
    case LambdaPolicy::lazy:
      return kLazyLambda;
    case LambdaPolicy::explicit_value:
      require(params.lambda >= 0.0, "lambda must be non-negative");
      return params.lambda;
    case LambdaPolicy::theory_rule: {
      const Eigen::JacobiSVD<Matrix> svd(W_hat);
      const double s_min = svd.singularValues()(svd.singularValues().size() - 1);
      const double c_w = W_hat.colwise().norm().maxCoeff();
      const double r = w_hat.norm();
      if (!(s_min > 0.0) || !(c_w > 0.0) || !(r > 0.0)) return kLazyLambda;
      return lambda_rule(W_hat.rows(), r, c_w, s_min).lambda;
    }
  }
  return kLazyLambda;
}

namespace {

using Clock = std::chrono::steady_clock;

// Source data grouped by task, grown in place as stages add samples.
class SourcePool {
 public:
  SourcePool(TaskOracle& oracle, int T) : oracle_(oracle), have_(static_cast<size_t>(T), 0) {}

  // Tops every task up to totals[t]; each increment is a fresh draw.
  void grow_to(const std::vector<std::int64_t>& totals) {
    ++draw_;
    for (size_t t = 0; t < totals.size(); ++t) {
      const std::int64_t extra = totals[t] - have_[t];
      if (extra <= 0) continue;
      data_.push_back(oracle_.sample(static_cast<int>(t) + 1, extra, draw_));
      have_[t] = totals[t];
    }
  }

  const std::vector<TaskDataset>& data() const { return data_; }
  const std::vector<std::int64_t>& counts() const { return have_; }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : have_) s += v;
    return s;
  }

 private:
  TaskOracle& oracle_;
  std::vector<std::int64_t> have_;
  std::vector<TaskDataset> data_;
  std::uint64_t draw_ = 0;
};

struct Fit {
  FittedModel model;
  Vector w_target;
};

class Runner {
 public:
  Runner(TaskOracle& oracle, const RunParams& params, std::string strategy)
      : oracle_(oracle), params_(params), pool_(oracle, oracle.T()), start_(Clock::now()) {
    require(params.k >= 1 && params.k <= oracle.d(), "k must lie in [1, d]");
    require(params.k <= oracle.T(), "k must not exceed T");
    require(params.N_floor >= 0, "N_floor must be non-negative");
    require(params.n_target >= 1, "n_target must be positive");
    result_.strategy = std::move(strategy);
    result_.seed = params.seed;
    result_.N_tot = params.N_tot;
    result_.N_floor = params.N_floor;
    target_ = oracle.sample(oracle.T() + 1, params.n_target, 0);
    result_.target_samples = params.n_target;
  }

  int T() const { return oracle_.T(); }

  // Grows the data to `allocation`, refits, and records the stage.
  const Fit& stage(const Allocation& allocation) {
    pool_.grow_to(allocation.n);
    for (auto v : pool_.counts())
      require(v >= 1, "every source task needs at least one sample to fit");
    FitOptions opts = params_.fit;
    opts.seed = stream_seed(params_.seed, kAuxDomain, result_.stages.size());
    opts.snapshot_count = std::max(opts.snapshot_count, params_.nu_average);
    if (params_.warm_start && fit_) opts.warm_start_B = fit_->model.B_hat;
    Fit f;
    f.model = fit_source(pool_.data(), params_.k, opts);
    f.w_target = fit_target_head(f.model, target_);
    f.model.w_target_hat = f.w_target;
    fit_ = std::move(f);

    StageSummary s;
    s.allocation = allocation;
    s.allocation.n = pool_.counts();
    s.train_loss = fit_->model.final_loss();
    s.fit_iterations = fit_->model.iterations;
    if (const GroundTruth* gt = oracle_.truth()) {
      s.subspace_distance = subspace_distance(fit_->model.B_hat, gt->B_star);
      s.excess_risk = excess_risk(fit_->model.B_hat, fit_->w_target, *gt);
    } else {
      s.subspace_distance = std::numeric_limits<double>::quiet_NaN();
      s.excess_risk = std::numeric_limits<double>::quiet_NaN();
    }
    result_.stages.push_back(s);
    return *fit_;
  }

  // Lasso relevance averaged over the trailing snapshots of the last fit.
  Vector lasso_nu() {
    const auto& snaps = fit_->model.snapshots;
    const int use = std::max(1, std::min<int>(params_.nu_average, static_cast<int>(snaps.size())));
    Vector avg = Vector::Zero(T());
    if (snaps.empty()) {
      const double lambda = select_lambda(params_, fit_->model.W_hat, fit_->w_target);
      avg = lasso(fit_->model.W_hat, fit_->w_target, lambda, params_.lasso).nu;
    } else {
      for (size_t i = snaps.size() - static_cast<size_t>(use); i < snaps.size(); ++i) {
        const Vector w = fit_target_head(snaps[i].B, target_);
        const double lambda = select_lambda(params_, snaps[i].W, w);
        avg += lasso(snaps[i].W, w, lambda, params_.lasso).nu;
      }
      avg /= use;
    }
    result_.nu_history.push_back(avg);
    return avg;
  }

  Vector min_l2_nu() {
    Vector nu = min_l2_solution(fit_->model.W_hat, fit_->w_target).nu;
    result_.nu_history.push_back(nu);
    return nu;
  }

  RunResult finish(const Vector& nu) {
    result_.nu = nu;
    result_.nu_l1 = nu.size() ? nu.lpNorm<1>() : 0.0;
    result_.support = nu.size() ? support_size(nu) : 0;
    if (!result_.stages.empty()) {
      result_.excess_risk = result_.stages.back().excess_risk;
      result_.subspace_distance = result_.stages.back().subspace_distance;
    }
    result_.total_samples = pool_.total();
    result_.wall_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    return result_;
  }

 private:
  TaskOracle& oracle_;
  const RunParams& params_;
  SourcePool pool_;
  TaskDataset target_;
  std::optional<Fit> fit_;
  RunResult result_;
  Clock::time_point start_;
};

RunResult two_phase(TaskOracle& oracle, const RunParams& params, bool l1) {
  Runner run(oracle, params, l1 ? "L1" : "L2");
  const int T = run.T();
  require(params.N_floor >= 1, "two-phase runs need N_floor >= 1 for the exploration fit");
  if (params.N_tot < static_cast<std::int64_t>(T) * params.N_floor)
    throw InfeasibleError("N_tot below T * N_floor");
  run.stage(floor_allocation(T, params.N_floor));
  const Vector nu = l1 ? run.lasso_nu() : run.min_l2_nu();
  Allocation a = l1 ? allocate_fixed_nu(nu, params.N_tot, params.N_floor)
                    : lpnq_allocation(nu, 2.0, params.N_tot, params.N_floor);
  run.stage(a);
  return run.finish(nu);
}

}  // namespace

RunResult run_l1_amtrl(TaskOracle& oracle, const RunParams& params) {
  return two_phase(oracle, params, true);
}

RunResult run_l2_amtrl(TaskOracle& oracle, const RunParams& params) {
  return two_phase(oracle, params, false);
}

RunResult run_passive(TaskOracle& oracle, const RunParams& params) {
  Runner run(oracle, params, "passive");
  const Allocation a = uniform_allocation(run.T(), params.N_tot, params.N_floor);
  run.stage(a);
  return run.finish(Vector());
}

RunResult run_known_nu(TaskOracle& oracle, const RunParams& params) {
  require(params.nu_ref.has_value(), "run_known_nu needs nu_ref");
  Runner run(oracle, params, "known_nu");
  require(params.nu_ref->size() == run.T(), "nu_ref must have T entries");
  Allocation a = lpnq_allocation(*params.nu_ref, params.q, params.N_tot, params.N_floor);
  a.strategy = AllocationStrategy::known_nu;
  run.stage(a);
  return run.finish(*params.nu_ref);
}

RunResult run_multistage(TaskOracle& oracle, const RunParams& params) {
  require(params.stages >= 1, "stages must be >= 1");
  require(params.growth > 1.0, "growth must exceed 1");
  require(params.beta_1 > 0.0, "beta_1 must be positive");
  Runner run(oracle, params, "multistage");
  const int T = run.T();
  Vector nu = Vector::Ones(T);
  double beta = params.beta_1;
  for (int i = 0; i < params.stages; ++i) {
    Allocation a;
    a.N_floor = params.N_floor;
    a.strategy = AllocationStrategy::L1;
    a.n.resize(static_cast<size_t>(T));
    a.continuous.resize(T);
    const double l1 = nu.lpNorm<1>();
    for (Index t = 0; t < T; ++t) {
      const double share = l1 > 0.0 ? beta * std::abs(nu(t)) / l1 : beta / T;
      a.continuous(t) = std::max(share, static_cast<double>(params.N_floor));
      a.n[static_cast<size_t>(t)] =
          std::max(static_cast<std::int64_t>(std::floor(share)), params.N_floor);
    }
    a.N_tot = a.total();
    a.c_prime = l1 > 0.0 ? beta / l1 : 0.0;
    run.stage(a);
    nu = run.lasso_nu();
    beta *= params.growth;
  }
  return run.finish(nu);
}

}  // namespace amtrl
