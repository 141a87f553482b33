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

#include <vector>

namespace amtrl {

/// Linear-interpolation quantile (the usual "type 7" definition), p in [0, 1].
double quantile(std::vector<double> values, double p);
double median(const std::vector<double>& values);
/// Third minus first quartile.
double iqr(const std::vector<double>& values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

/// Least-squares line through (x, y).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Least-squares line through (log x, log y); requires positive inputs.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace amtrl
