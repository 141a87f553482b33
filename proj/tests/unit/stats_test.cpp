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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "amtrl/stats.hpp"

namespace amtrl {
namespace {

TEST(Stats, QuantilesInterpolate) {
  const std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(median(v), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(iqr(v), 1.5);
  EXPECT_DOUBLE_EQ(median({7.0}), 7.0);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Stats, LogLogSlope) {
  std::vector<double> x, y;
  for (double n : {1000.0, 2000.0, 4000.0, 8000.0}) {
    x.push_back(n);
    y.push_back(3.0 / n);
  }
  const LineFit f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
  EXPECT_EQ(f.points, 4);
  EXPECT_THROW(fit_loglog({1.0, -1.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST(Stats, LineThroughPoints) {
  const LineFit f = fit_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

}  // namespace
}  // namespace amtrl
