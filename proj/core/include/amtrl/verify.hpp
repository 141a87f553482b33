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
#include <map>
#include <string>
#include <vector>

#include "amtrl/serialization.hpp"

namespace amtrl {

enum class VerifyLevel { fast, full };

VerifyLevel verify_level_from_string(const std::string& s);
std::string to_string(VerifyLevel level);

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::fast;
  std::uint64_t seed = 7;
  /// Replaces the named property's tolerance.
  std::map<std::string, double> tolerance_overrides;
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  double tolerance = 0.0;
  /// Largest violation statistic seen; passing means worst <= tolerance.
  double worst = 0.0;
  int cases = 0;
  int failures = 0;
  std::string detail;
  double ms = 0.0;
};

struct VerifyReport {
  VerifyLevel level = VerifyLevel::fast;
  std::vector<PropertyResult> properties;

  bool passed() const;
};

/// Property names in report order. Both levels run every property; full
/// uses more instances and draws.
std::vector<std::string> verify_property_names();

/// Runs the oracle-backed property suite. Unknown override names throw
/// std::invalid_argument.
VerifyReport run_verify(const VerifyOptions& options);

Json to_json(const VerifyReport& report);

}  // namespace amtrl
