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
#pragma once

// Linear algebra and sampling primitives shared by every other module.
//
// Matrices hold one sample per row. All sampling goes through SeededRng so a
// (master_seed, stream_id) pair reproduces its draws exactly.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "taskprobe/error.hpp"

namespace taskprobe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// A seedable random stream. Streams are identified by (master_seed,
// stream_id); substream() derives child streams by hashing, so trials and
// workers each get their own generator and results never depend on
// scheduling.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t master_seed, std::uint64_t stream_id = 0)
      : master_seed_(master_seed),
        stream_id_(stream_id),
        engine_(detail::mix64(detail::mix64(master_seed) ^
                              detail::mix64(stream_id ^ 0x5851f42d4c957f2dULL))) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Child stream; depends only on this stream's identity and `child`, never on
  // how many draws were already taken.
  SeededRng substream(std::uint64_t child) const {
    return SeededRng(master_seed_,
                     detail::mix64(stream_id_ * 0xd1342543de82ef95ULL + child + 1));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  bool coin() { return (engine_() >> 63) != 0; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    detail::require(n > 0, ErrorKind::kParameter, "below(0)");
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

namespace detail {

// Like gaussian_sample but admits sd == 0 (degenerate test worlds).
inline Matrix gaussian_rows(const Vector& mean, double sd, std::size_t n,
                            SeededRng& rng) {
  const auto d = mean.size();
  Matrix out(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = mean[j] + sd * rng.normal();
  return out;
}

inline Vector gaussian_vector(const Vector& mean, double sd, SeededRng& rng) {
  Vector out(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) out[j] = mean[j] + sd * rng.normal();
  return out;
}

}  // namespace detail

// n rows drawn i.i.d. from N(mean, variance * I).
inline Matrix gaussian_sample(const Vector& mean, double variance, std::size_t n,
                              SeededRng& rng) {
  detail::require(variance > 0.0 && std::isfinite(variance), ErrorKind::kParameter,
                  "variance must be positive and finite");
  detail::require(n >= 1, ErrorKind::kParameter, "sample count must be at least 1");
  detail::require(mean.size() >= 1, ErrorKind::kDimension, "mean must be nonempty");
  return detail::gaussian_rows(mean, std::sqrt(variance), n, rng);
}

inline Vector row_mean(const Matrix& data) {
  detail::require(data.rows() >= 1, ErrorKind::kInsufficientData,
                  "mean of an empty matrix");
  return data.colwise().mean().transpose();
}

// Unbiased (n - 1) sample covariance of the rows of `data`.
inline Matrix sample_covariance(const Matrix& data) {
  detail::require(data.rows() >= 2, ErrorKind::kInsufficientData,
                  "sample covariance needs at least 2 rows, got " +
                      std::to_string(data.rows()));
  const Matrix centered = data.rowwise() - data.colwise().mean();
  Matrix q = (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
  return 0.5 * (q + q.transpose());
}

// Q + lambda * (tr(Q) / d) * I.
inline Matrix regularized_covariance(const Matrix& q, double lambda) {
  detail::require(q.rows() == q.cols() && q.rows() >= 1, ErrorKind::kDimension,
                  "covariance must be square");
  detail::require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::kParameter,
                  "lambda must be nonnegative");
  const double d = static_cast<double>(q.rows());
  Matrix out = q;
  out.diagonal().array() += lambda * q.trace() / d;
  return out;
}

// Eigenvalues below this fraction of the largest one count as zero.
inline constexpr double kEigenRelativeTolerance = 1e-12;

// Symmetric inverse square root U diag(1/sqrt(l)) U^T of an SPD matrix.
inline Matrix inverse_sqrt_psd(const Matrix& s) {
  detail::require(s.rows() == s.cols() && s.rows() >= 1, ErrorKind::kDimension,
                  "inverse_sqrt_psd needs a square matrix");
  detail::require(s.allFinite(), ErrorKind::kParameter, "matrix has non-finite entries");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  detail::require(eig.info() == Eigen::Success, ErrorKind::kSingular,
                  "eigendecomposition failed");
  const Vector& values = eig.eigenvalues();
  const double largest = values.maxCoeff();
  const double smallest = values.minCoeff();
  detail::require(largest > 0.0 && smallest > kEigenRelativeTolerance * largest,
                  ErrorKind::kSingular,
                  "smallest eigenvalue " + std::to_string(smallest) +
                      " is below tolerance; regularize first");
  const Matrix& u = eig.eigenvectors();
  Matrix w = u * values.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
  return 0.5 * (w + w.transpose());
}

}  // namespace taskprobe
