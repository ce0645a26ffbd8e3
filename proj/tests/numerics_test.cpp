/*
 * Copyright 2026 The TaskProbe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "taskprobe/numerics.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "taskprobe/parallel.hpp"

namespace taskprobe {
namespace {

TEST(GaussianSampleTest, SampleMeanConvergesToMean) {
  SeededRng rng(11);
  const Matrix x = gaussian_sample(Vector::Zero(2), 1.0, 100000, rng);
  ASSERT_EQ(x.rows(), 100000);
  ASSERT_EQ(x.cols(), 2);
  const Vector m = row_mean(x);
  EXPECT_LT(std::abs(m[0]), 0.02);
  EXPECT_LT(std::abs(m[1]), 0.02);
}

TEST(GaussianSampleTest, RejectsNonPositiveVariance) {
  SeededRng rng(1);
  try {
    gaussian_sample(Vector::Zero(2), 0.0, 5, rng);
    FAIL() << "expected a parameter error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParameter);
  }
  EXPECT_THROW(gaussian_sample(Vector::Zero(2), -1.0, 5, rng), Error);
  EXPECT_THROW(gaussian_sample(Vector::Zero(2), 1.0, 0, rng), Error);
}

TEST(GaussianSampleTest, SameSeedSameDraws) {
  SeededRng a(42, 3), b(42, 3);
  const Vector mean = Vector::LinSpaced(4, -1.0, 1.0);
  EXPECT_EQ(gaussian_sample(mean, 2.0, 50, a), gaussian_sample(mean, 2.0, 50, b));
}

TEST(SeededRngTest, SubstreamsAreDistinctAndStable) {
  const SeededRng root(5);
  SeededRng s1 = root.substream(1), s1b = root.substream(1), s2 = root.substream(2);
  EXPECT_NE(s1.stream_id(), s2.stream_id());
  const double a = s1.normal();
  EXPECT_EQ(a, s1b.normal());
  EXPECT_NE(a, s2.normal());
  // Substream identity does not depend on draws already taken from the parent.
  SeededRng used(5);
  used.normal();
  EXPECT_EQ(used.substream(7).stream_id(), root.substream(7).stream_id());
}

TEST(SeededRngTest, SubstreamsLookIndependent) {
  // Correlation of paired draws from adjacent streams is ~N(0, 1/n).
  const SeededRng root(9);
  constexpr int kN = 20000;
  double sxy = 0.0;
  for (int i = 0; i < kN; ++i) {
    SeededRng a = root.substream(2 * i), b = root.substream(2 * i + 1);
    sxy += a.normal() * b.normal();
  }
  EXPECT_LT(std::abs(sxy / kN), 5.0 / std::sqrt(kN));
}

TEST(SampleCovarianceTest, TwoRowsByHand) {
  Matrix x(2, 2);
  x << 0, 0, 2, 0;
  Matrix expected(2, 2);
  expected << 2, 0, 0, 0;
  EXPECT_EQ(sample_covariance(x), expected);
}

TEST(SampleCovarianceTest, IdenticalRowsGiveZero) {
  Matrix x = Matrix::Constant(5, 3, 1.25);
  EXPECT_TRUE(sample_covariance(x).isZero(0.0));
}

TEST(SampleCovarianceTest, NeedsTwoRows) {
  try {
    sample_covariance(Matrix::Ones(1, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInsufficientData);
  }
}

TEST(SampleCovarianceTest, ConsistentForIsotropicGaussian) {
  SeededRng rng(3);
  const Matrix x = gaussian_sample(Vector::Zero(2), 3.0, 100000, rng);
  const Matrix q = sample_covariance(x);
  EXPECT_LT(oracle::max_abs_diff(q, 3.0 * Matrix::Identity(2, 2)), 0.1);
}

TEST(SampleCovarianceTest, MatchesDoubleSumAndIsSymmetricPsd) {
  SeededRng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(10));
    const int d = 1 + static_cast<int>(rng.below(6));
    Matrix x(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = 3.0 * rng.normal() + 10.0;
    const Matrix q = sample_covariance(x);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        EXPECT_NEAR(q(a, b), oracle::covariance_entry(x, a, b), 1e-9);
        EXPECT_EQ(q(a, b), q(b, a));
      }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * std::max(q.trace(), 1e-300));
  }
}

TEST(RegularizedCovarianceTest, Examples) {
  const Matrix i4 = Matrix::Identity(4, 4);
  EXPECT_EQ(regularized_covariance(i4, 0.0), i4);
  EXPECT_EQ(regularized_covariance(i4, 0.5), 1.5 * i4);
  const Matrix q = Eigen::Vector2d(2.0, 0.0).asDiagonal();
  const Matrix expected = Eigen::Vector2d(3.0, 1.0).asDiagonal();
  EXPECT_EQ(regularized_covariance(q, 1.0), expected);
}

TEST(RegularizedCovarianceTest, RejectsNonSquare) {
  try {
    regularized_covariance(Matrix::Zero(2, 3), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
}

TEST(InverseSqrtTest, ScalarAndDiagonal) {
  EXPECT_LT(oracle::max_abs_diff(inverse_sqrt_psd(4.0 * Matrix::Identity(3, 3)),
                                 0.5 * Matrix::Identity(3, 3)),
            1e-15);
  const Matrix s = Eigen::Vector2d(1.0, 9.0).asDiagonal();
  const Matrix expected = Eigen::Vector2d(1.0, 1.0 / 3.0).asDiagonal();
  EXPECT_LT(oracle::max_abs_diff(inverse_sqrt_psd(s), expected), 1e-15);
}

TEST(InverseSqrtTest, WhitensRandomSpdMatrices) {
  SeededRng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(12));
    const Matrix s = oracle::random_spd(d, rng, 1e-3);
    const Matrix w = inverse_sqrt_psd(s);
    EXPECT_EQ(w, w.transpose());
    EXPECT_LT(oracle::max_abs_diff(w * s * w, Matrix::Identity(d, d)), 1e-8) << "d=" << d;
  }
}

TEST(InverseSqrtTest, IllConditionedButValid) {
  // Condition number just under 1e8.
  SeededRng rng(4);
  const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_spd(6, rng)).householderQ();
  Vector values(6);
  values << 1.0, 1e-1, 1e-3, 1e-5, 1e-7, 2e-8;
  const Matrix s = q * values.asDiagonal() * q.transpose();
  const Matrix w = inverse_sqrt_psd(s);
  EXPECT_LT(oracle::max_abs_diff(w * s * w, Matrix::Identity(6, 6)), 1e-8);
}

TEST(InverseSqrtTest, SingularMatrixIsRejected) {
  const Matrix s = Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
  try {
    inverse_sqrt_psd(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingular);
  }
  EXPECT_THROW(inverse_sqrt_psd(Matrix::Zero(2, 2)), Error);
  EXPECT_THROW(inverse_sqrt_psd(-Matrix::Identity(2, 2)), Error);
}

TEST(ParallelForTest, VisitsEveryIndexOnceAndPropagatesErrors) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
    if (i == 7) throw Error(ErrorKind::kParameter, "boom");
  }, 3), Error);
}

TEST(ParallelForTest, WorkerCountHonorsEnvironment) {
  ::setenv("TASKPROBE_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  ::setenv("TASKPROBE_THREADS", "zero", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("TASKPROBE_THREADS");
}

}  // namespace
}  // namespace taskprobe
