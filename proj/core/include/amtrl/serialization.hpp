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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amtrl/allocation.hpp"
#include "amtrl/instance.hpp"
#include "amtrl/pipeline.hpp"
#include "amtrl/relevance.hpp"
#include "amtrl/trainer.hpp"

// JSON documents use shortest round-trip number formatting, so doubles survive
// a write/read cycle bit for bit. Matrices are {"rows", "cols", "data"} with
// row-major data.

namespace amtrl {

using Json = nlohmann::json;

Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);

Json to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const Json& j);

Json to_json(const FittedModel& model);
Json to_json(const RelevanceVector& nu);
Json to_json(const Allocation& a);
Allocation allocation_from_json(const Json& j);
Json to_json(const RunResult& r);

/// Throws IoError when the file cannot be read, FormatError on bad JSON.
Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline. Throws IoError.
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// "%.17g", so values read back exactly.
std::string format_double(double x);

/// Two columns: iteration, loss.
std::string loss_history_csv(const FittedModel& model);
/// One row per task: task, n, continuous.
std::string allocation_csv(const Allocation& a);

}  // namespace amtrl
