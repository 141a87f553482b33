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

#include <gtest/gtest.h>

#include "amtrl/instance.hpp"
#include "amtrl/relevance.hpp"

namespace amtrl {
namespace {

double sigma_min(const Matrix& m) {
  const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
  return s(s.size() - 1);
}

TEST(RandomInstance, SmallestLegalInstance) {
  const GroundTruth gt = make_random_instance(4, 1, 1, 0.0, 1.0, 0);
  EXPECT_EQ(gt.B_star.rows(), 4);
  EXPECT_EQ(gt.B_star.cols(), 1);
  EXPECT_NEAR(gt.B_star.norm(), 1.0, 1e-12);
  EXPECT_GE(std::abs(gt.W_star(0, 0)), 1.0);
}

TEST(RandomInstance, SigmaMinFloorHolds) {
  const GroundTruth gt = make_random_instance(30, 5, 40, 0.5, 0.5, 7);
  EXPECT_GE(sigma_min(gt.W_star), 0.5);
  EXPECT_TRUE(gt.meta.diverse);
  EXPECT_FALSE(gt.meta.wide_regime);  // d = 30 < T = 40
  ASSERT_TRUE(gt.meta.reference_nu.has_value());
  EXPECT_LE((gt.W_star * *gt.meta.reference_nu - gt.w_target_star).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RandomInstance, WideRegimeFlag) {
  EXPECT_TRUE(make_random_instance(20, 3, 8, 0.1, 1.0, 1).meta.wide_regime);
}

TEST(RandomInstance, Deterministic) {
  const GroundTruth a = make_random_instance(30, 5, 40, 0.5, 0.5, 7);
  const GroundTruth b = make_random_instance(30, 5, 40, 0.5, 0.5, 7);
  EXPECT_EQ(a.B_star, b.B_star);
  EXPECT_EQ(a.W_star, b.W_star);
  EXPECT_EQ(a.w_target_star, b.w_target_star);
  const GroundTruth c = make_random_instance(30, 5, 40, 0.5, 0.5, 8);
  EXPECT_NE(a.B_star, c.B_star);
}

TEST(RandomInstance, RejectsBadDimensions) {
  EXPECT_THROW(make_random_instance(3, 4, 5, 0.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(make_random_instance(10, 4, 3, 0.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(make_random_instance(10, 2, 3, 0.0, 0.0, 0), std::invalid_argument);
}

TEST(RandomInstance, OrthonormalAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GroundTruth gt = make_random_instance(15, 4, 6, 0.1, 1.0, seed);
    const Matrix G = gt.B_star.transpose() * gt.B_star - Matrix::Identity(4, 4);
    EXPECT_LE(G.cwiseAbs().maxCoeff(), 1e-10);
    // First nonzero entry of each column is positive.
    for (Index j = 0; j < 4; ++j) {
      Index i = 0;
      while (gt.B_star(i, j) == 0.0) ++i;
      EXPECT_GT(gt.B_star(i, j), 0.0);
    }
  }
}

TEST(AlmostSparse, ReferenceVectorT11) {
  const Vector nu = almost_sparse_nu(11);
  EXPECT_DOUBLE_EQ(nu(0), std::sqrt(0.9));
  for (Index t = 1; t < 11; ++t) EXPECT_DOUBLE_EQ(nu(t), 0.1);
  EXPECT_NEAR(nu.norm(), 1.0, 1e-12);
  EXPECT_NEAR(nu.lpNorm<1>(), std::sqrt(0.9) + 1.0, 1e-12);
  EXPECT_LT(nu.lpNorm<1>(), 2.0);
}

TEST(AlmostSparse, ReferenceVectorT3) {
  const Vector nu = almost_sparse_nu(3);
  EXPECT_DOUBLE_EQ(nu(0), std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(nu(1), 0.5);
  EXPECT_DOUBLE_EQ(nu(2), 0.5);
  EXPECT_NEAR(nu.norm(), 1.0, 1e-12);
}

TEST(AlmostSparse, L1NormBySummationT51) {
  const Vector nu = almost_sparse_nu(51);
  double sum = 0.0;
  for (Index t = 0; t < nu.size(); ++t) sum += std::abs(nu(t));
  EXPECT_NEAR(sum, std::sqrt(49.0 / 50.0) + 1.0, 1e-12);
}

TEST(AlmostSparse, InstanceProperties) {
  for (int T : {3, 11, 50}) {
    const AlmostSparseInstance inst = make_almost_sparse_instance(T + 5, 3, T, 0.1, 4);
    EXPECT_EQ(inst.reference_nu, almost_sparse_nu(T));
    EXPECT_NEAR(inst.reference_nu.norm(), 1.0, 1e-12);
    EXPECT_LE((inst.gt.W_star * inst.reference_nu - inst.gt.w_target_star).cwiseAbs().maxCoeff(),
              1e-10);
    // The reference vector is also the minimum-L2 solution.
    const Vector nu2 = min_l2_solution(inst.gt.W_star, inst.gt.w_target_star).nu;
    EXPECT_LE((nu2 - inst.reference_nu).norm(), 1e-8);
  }
}

TEST(AlmostSparse, RejectsSmallT) {
  EXPECT_THROW(make_almost_sparse_instance(10, 2, 2, 0.0, 0), std::invalid_argument);
}

TEST(AlignedWorstCase, SigmaMinFormula) {
  const GroundTruth gt = make_aligned_worstcase_instance(10, 2, 4, 1.0, 3);
  EXPECT_NEAR(sigma_min(gt.W_star), 0.25, 1e-12);
  const GroundTruth g2 = make_aligned_worstcase_instance(40, 5, 30, 2.0, 3);
  EXPECT_NEAR(sigma_min(g2.W_star), 2.0 / (2.0 * std::sqrt(4.0 * 30.0)), 1e-12);
}

TEST(AlignedWorstCase, MinL2IsAllOnesDirection) {
  const GroundTruth gt = make_aligned_worstcase_instance(40, 5, 30, 1.5, 9);
  const Vector nu2 = min_l2_solution(gt.W_star, gt.w_target_star).nu;
  // Sine of the angle to the all-ones direction; acos loses half the digits.
  const Vector u = Vector::Ones(30) / std::sqrt(30.0);
  const double sine = (nu2 - nu2.dot(u) * u).norm() / nu2.norm();
  EXPECT_LE(std::asin(sine), 1e-8);
  EXPECT_NEAR((gt.W_star * nu2).norm(), 1.5, 1e-10);
  EXPECT_NEAR(gt.w_target_star.norm(), 1.5, 1e-10);
}

TEST(AlignedWorstCase, RejectsKBelowTwo) {
  EXPECT_THROW(make_aligned_worstcase_instance(10, 1, 4, 1.0, 0), std::invalid_argument);
}

TEST(SampleTask, NoiselessResidualIsZero) {
  const GroundTruth gt = make_random_instance(12, 3, 5, 0.0, 1.0, 2);
  for (int t = 1; t <= gt.T + 1; ++t) {
    const TaskDataset ds = sample_task(gt, t, 50, 11);
    const Vector r = ds.Y - ds.X * gt.regression_vector(t);
    EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-12 * (1.0 + ds.Y.cwiseAbs().maxCoeff()));
    EXPECT_EQ(ds.task_index, t);
  }
}

TEST(SampleTask, EmptyDataset) {
  const GroundTruth gt = make_random_instance(6, 2, 3, 0.1, 1.0, 2);
  const TaskDataset ds = sample_task(gt, 1, 0, 0);
  EXPECT_EQ(ds.n(), 0);
  EXPECT_EQ(ds.X.cols(), 6);
  EXPECT_EQ(ds.Y.size(), 0);
}

TEST(SampleTask, NoiseVariance) {
  const GroundTruth gt = make_random_instance(8, 2, 3, 0.5, 1.0, 5);
  const TaskDataset ds = sample_task(gt, 2, 10000, 3);
  const Vector z = ds.Y - ds.X * gt.regression_vector(2);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / static_cast<double>(z.size() - 1);
  EXPECT_GE(var, 0.23);
  EXPECT_LE(var, 0.27);
}

TEST(SampleTask, PureAndDrawIndependent) {
  const GroundTruth gt = make_random_instance(8, 2, 3, 0.5, 1.0, 5);
  const TaskDataset a = sample_task(gt, 1, 30, 9, 0);
  const TaskDataset b = sample_task(gt, 1, 30, 9, 0);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.Y, b.Y);
  const TaskDataset c = sample_task(gt, 1, 30, 9, 1);
  EXPECT_NE(a.X, c.X);
  const TaskDataset other_task = sample_task(gt, 2, 30, 9, 0);
  EXPECT_NE(a.X, other_task.X);
}

TEST(SampleTask, PrefixConsistentInN) {
  const GroundTruth gt = make_random_instance(8, 2, 3, 0.5, 1.0, 5);
  const TaskDataset small = sample_task(gt, 1, 10, 9);
  const TaskDataset large = sample_task(gt, 1, 25, 9);
  EXPECT_EQ(small.X, large.X.topRows(10));
  EXPECT_EQ(small.Y, large.Y.head(10));
}

TEST(SampleTask, RejectsOutOfRangeTask) {
  const GroundTruth gt = make_random_instance(8, 2, 3, 0.5, 1.0, 5);
  EXPECT_THROW(sample_task(gt, 0, 5, 0), std::invalid_argument);
  EXPECT_THROW(sample_task(gt, 5, 5, 0), std::invalid_argument);
}

TEST(SampleTask, DiagonalCovariance) {
  GroundTruth gt = make_random_instance(4, 1, 2, 0.0, 1.0, 5);
  gt.covariance_kind = CovarianceKind::diagonal_bounded;
  gt.covariance_diag = Vector::Constant(4, 4.0);
  const TaskDataset ds = sample_task(gt, 1, 20000, 1);
  const double var = ds.X.col(0).squaredNorm() / 20000.0;
  EXPECT_NEAR(var, 4.0, 0.2);
}

TEST(Concat, StacksRows) {
  const GroundTruth gt = make_random_instance(8, 2, 3, 0.5, 1.0, 5);
  const TaskDataset a = sample_task(gt, 1, 4, 1, 0);
  const TaskDataset b = sample_task(gt, 1, 3, 1, 1);
  const TaskDataset c = concat(a, b);
  EXPECT_EQ(c.n(), 7);
  EXPECT_EQ(c.X.bottomRows(3), b.X);
  EXPECT_THROW(concat(a, sample_task(gt, 2, 3, 1)), std::invalid_argument);
}

TEST(Validate, DetectsNonOrthonormalB) {
  GroundTruth gt = make_random_instance(8, 2, 3, 0.5, 1.0, 5);
  gt.B_star(0, 0) += 1e-6;
  EXPECT_THROW(validate(gt), std::invalid_argument);
}

}  // namespace
}  // namespace amtrl
