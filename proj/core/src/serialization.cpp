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

#include "amtrl/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace amtrl {
namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const Matrix& m) {
  Json data = Json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Json to_json(const Vector& v) {
  Json data = Json::array();
  for (Index i = 0; i < v.size(); ++i) data.push_back(v(i));
  return data;
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = field<Index>(j, "rows");
  const auto cols = field<Index>(j, "cols");
  const auto data = field<std::vector<double>>(j, "data");
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
    throw FormatError("matrix data does not match its shape");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<size_t>(r * cols + c)];
  return m;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError("expected an array of numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json to_json(const GroundTruth& gt) {
  Json meta{{"kind", to_string(gt.meta.kind)},
            {"seed", gt.meta.seed},
            {"diverse", gt.meta.diverse},
            {"wide_regime", gt.meta.wide_regime},
            {"generator_param", gt.meta.generator_param}};
  if (gt.meta.reference_nu) meta["reference_nu"] = to_json(*gt.meta.reference_nu);
  return Json{{"d", gt.d},
              {"k", gt.k},
              {"T", gt.T},
              {"sigma_z", gt.sigma_z},
              {"covariance_kind", to_string(gt.covariance_kind)},
              {"covariance_diag", to_json(gt.covariance_diag)},
              {"B_star", to_json(gt.B_star)},
              {"W_star", to_json(gt.W_star)},
              {"w_target_star", to_json(gt.w_target_star)},
              {"meta", std::move(meta)}};
}

GroundTruth ground_truth_from_json(const Json& j) {
  GroundTruth gt;
  gt.d = field<int>(j, "d");
  gt.k = field<int>(j, "k");
  gt.T = field<int>(j, "T");
  gt.sigma_z = field<double>(j, "sigma_z");
  try {
    gt.covariance_kind = covariance_kind_from_string(field<std::string>(j, "covariance_kind"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  gt.covariance_diag = j.contains("covariance_diag") ? vector_from_json(j["covariance_diag"])
                                                     : Vector::Ones(gt.d);
  gt.B_star = matrix_from_json(field<Json>(j, "B_star"));
  gt.W_star = matrix_from_json(field<Json>(j, "W_star"));
  gt.w_target_star = vector_from_json(field<Json>(j, "w_target_star"));
  if (j.contains("meta")) {
    const Json& m = j["meta"];
    try {
      gt.meta.kind = instance_kind_from_string(field<std::string>(m, "kind"));
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
    gt.meta.seed = field<std::uint64_t>(m, "seed");
    gt.meta.diverse = field<bool>(m, "diverse");
    gt.meta.wide_regime = field<bool>(m, "wide_regime");
    gt.meta.generator_param = m.value("generator_param", 0.0);
    if (m.contains("reference_nu")) gt.meta.reference_nu = vector_from_json(m["reference_nu"]);
  }
  try {
    validate(gt);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid instance: ") + e.what());
  }
  return gt;
}

Json to_json(const FittedModel& model) {
  Json j{{"B_hat", to_json(model.B_hat)},
         {"W_hat", to_json(model.W_hat)},
         {"train_loss_history", model.train_loss_history},
         {"iterations", model.iterations},
         {"converged", model.converged},
         {"init_method", model.init_method}};
  if (model.w_target_hat) j["w_target_hat"] = to_json(*model.w_target_hat);
  return j;
}

Json to_json(const RelevanceVector& nu) {
  Json j{{"nu", to_json(nu.nu)},
         {"solver", to_string(nu.solver)},
         {"lambda", nu.lambda},
         {"kkt_residual", nu.kkt_residual},
         {"support_size", nu.support_size},
         {"support_tol", nu.support_tol},
         {"residual_norm", nu.residual_norm},
         {"l1_norm", nu.nu.lpNorm<1>()},
         {"l2_norm", nu.nu.norm()}};
  if (nu.solver == NuSolver::lasso) {
    j["sweeps"] = nu.sweeps;
    j["converged"] = nu.converged;
    j["degenerate_coordinates"] = nu.degenerate_coordinates;
  }
  return j;
}

Json to_json(const Allocation& a) {
  return Json{{"n", a.n},
              {"continuous", to_json(a.continuous)},
              {"N_tot", a.N_tot},
              {"N_floor", a.N_floor},
              {"strategy", to_string(a.strategy)},
              {"q", a.q},
              {"c_prime", a.c_prime},
              {"warnings", a.warnings}};
}

Allocation allocation_from_json(const Json& j) {
  Allocation a;
  a.n = field<std::vector<std::int64_t>>(j, "n");
  a.continuous = j.contains("continuous") ? vector_from_json(j["continuous"]) : Vector();
  a.N_tot = field<std::int64_t>(j, "N_tot");
  a.N_floor = field<std::int64_t>(j, "N_floor");
  const auto s = field<std::string>(j, "strategy");
  bool known = false;
  for (auto st : {AllocationStrategy::L1, AllocationStrategy::L2, AllocationStrategy::LpNq,
                  AllocationStrategy::passive, AllocationStrategy::known_nu,
                  AllocationStrategy::cost_aware}) {
    if (to_string(st) == s) {
      a.strategy = st;
      known = true;
    }
  }
  if (!known) throw FormatError("unknown allocation strategy: " + s);
  a.q = j.value("q", 1.0);
  a.c_prime = j.value("c_prime", 0.0);
  a.warnings = j.value("warnings", std::vector<std::string>{});
  return a;
}

Json to_json(const RunResult& r) {
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    stages.push_back(Json{{"allocation", to_json(s.allocation)},
                          {"train_loss", s.train_loss},
                          {"subspace_distance", s.subspace_distance},
                          {"excess_risk", s.excess_risk},
                          {"fit_iterations", s.fit_iterations}});
  }
  Json history = Json::array();
  for (const auto& nu : r.nu_history) history.push_back(to_json(nu));
  return Json{{"strategy", r.strategy},
              {"seed", r.seed},
              {"N_tot", r.N_tot},
              {"N_floor", r.N_floor},
              {"stages", std::move(stages)},
              {"nu_history", std::move(history)},
              {"nu", to_json(r.nu)},
              {"nu_l1", r.nu_l1},
              {"support", r.support},
              {"excess_risk", r.excess_risk},
              {"subspace_distance", r.subspace_distance},
              {"total_samples", r.total_samples},
              {"target_samples", r.target_samples},
              {"wall_ms", r.wall_ms},
              {"status", r.status}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string loss_history_csv(const FittedModel& model) {
  std::ostringstream os;
  os << "iteration,loss\n";
  for (size_t i = 0; i < model.train_loss_history.size(); ++i)
    os << i << ',' << format_double(model.train_loss_history[i]) << '\n';
  return os.str();
}

std::string allocation_csv(const Allocation& a) {
  std::ostringstream os;
  os << "task,n,continuous\n";
  for (size_t t = 0; t < a.n.size(); ++t) {
    const double c = static_cast<Index>(t) < a.continuous.size()
                         ? a.continuous(static_cast<Index>(t))
                         : static_cast<double>(a.n[t]);
    os << t + 1 << ',' << a.n[t] << ',' << format_double(c) << '\n';
  }
  return os.str();
}

}  // namespace amtrl
