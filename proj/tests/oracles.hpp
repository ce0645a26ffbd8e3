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

// Test-only reference implementations. These deliberately avoid the library's
// code paths (no Eigen expressions for the quantity under test, plain loops,
// direct definitions) so they can serve as independent oracles.

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <vector>

#include "taskprobe/numerics.hpp"
#include "taskprobe/synthmtl.hpp"

namespace taskprobe::oracle {

// Mann-Whitney U / (n_in n_out) with ties counted as one half.
inline double mann_whitney_auc(const std::vector<double>& in, const std::vector<double>& out) {
  double wins = 0.0;
  for (double a : in)
    for (double b : out) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  return wins / (static_cast<double>(in.size()) * static_cast<double>(out.size()));
}

// Covariance entry (a, b) by the textbook double sum.
inline double covariance_entry(const Matrix& x, Eigen::Index a, Eigen::Index b) {
  const auto n = x.rows();
  double ma = 0.0, mb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ma += x(i, a);
    mb += x(i, b);
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += (x(i, a) - ma) * (x(i, b) - mb);
  return s / static_cast<double>(n - 1);
}

// Sum of per-coordinate unbiased variances divided by the dimension.
inline double mean_coordinate_variance(const Matrix& x) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) s += covariance_entry(x, c, c);
  return s / static_cast<double>(x.cols());
}

// Mean |<e_i, e_j>| over ordered pairs i != j (each unordered pair twice).
inline double mean_abs_pair_product(const Matrix& e, bool cosine) {
  double s = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.rows(); ++j) {
      if (i == j) continue;
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (Eigen::Index c = 0; c < e.cols(); ++c) {
        dot += e(i, c) * e(j, c);
        ni += e(i, c) * e(i, c);
        nj += e(j, c) * e(j, c);
      }
      s += std::abs(cosine ? dot / std::sqrt(ni * nj) : dot);
      ++count;
    }
  return s / static_cast<double>(count);
}

// Max-entry distance between two matrices.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

// Random symmetric positive definite matrix A A^T + shift I.
inline Matrix random_spd(int d, SeededRng& rng, double shift = 0.5) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  Matrix s = a * a.transpose();
  for (int i = 0; i < d; ++i) s(i, i) += shift;
  return s;
}

// Logit of one row for head `task`, by explicit loops over every layer.
inline double mtl_logit(const MtlParameters& p, const Vector& x, int task) {
  double logit = 0.0;
  std::vector<double> act(static_cast<std::size_t>(p.hidden()));
  for (int h = 0; h < p.hidden(); ++h) {
    double z = p.layer1_bias[h];
    for (int c = 0; c < p.dim(); ++c) z += p.layer1_weights(h, c) * x[c];
    act[static_cast<std::size_t>(h)] = z > 0.0 ? z : 0.0;
  }
  for (int e = 0; e < p.embed_dim(); ++e) {
    double emb = 0.0;
    for (int h = 0; h < p.hidden(); ++h) emb += p.projection(e, h) * act[static_cast<std::size_t>(h)];
    logit += p.heads(task, e) * emb;
  }
  return logit;
}

// (1/T) sum_j (1/N_j) sum_i log(1 + exp(-y_ij logit_ij)).
inline double mtl_loss(const MtlParameters& p, const std::vector<Matrix>& inputs,
                       const std::vector<Vector>& labels) {
  double total = 0.0;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    double task = 0.0;
    for (Eigen::Index i = 0; i < inputs[j].rows(); ++i) {
      const double m = labels[j][i] * mtl_logit(p, inputs[j].row(i).transpose(), static_cast<int>(j));
      task += std::log1p(std::exp(-m));
    }
    total += task / static_cast<double>(inputs[j].rows());
  }
  return total / static_cast<double>(inputs.size());
}

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-6) over every
// parameter entry, with central differences of step h on mtl_loss.
inline double gradient_check(const MtlParameters& p, const std::vector<Matrix>& inputs,
                             const std::vector<Vector>& labels, double h = 1e-5) {
  std::vector<TaskBatch> batches;
  for (std::size_t j = 0; j < inputs.size(); ++j) batches.push_back({&inputs[j], &labels[j]});
  const MtlParameters analytic = multitask_loss_and_gradient(p, batches).gradient;
  double worst = 0.0;
  MtlParameters q = p;
  auto probe = [&](double& entry, double grad) {
    const double saved = entry;
    entry = saved + h;
    const double up = mtl_loss(q, inputs, labels);
    entry = saved - h;
    const double down = mtl_loss(q, inputs, labels);
    entry = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(grad), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(grad - numeric) / scale);
  };
  for (Eigen::Index i = 0; i < q.layer1_weights.size(); ++i)
    probe(q.layer1_weights.data()[i], analytic.layer1_weights.data()[i]);
  for (Eigen::Index i = 0; i < q.layer1_bias.size(); ++i)
    probe(q.layer1_bias.data()[i], analytic.layer1_bias.data()[i]);
  for (Eigen::Index i = 0; i < q.projection.size(); ++i)
    probe(q.projection.data()[i], analytic.projection.data()[i]);
  for (Eigen::Index i = 0; i < q.heads.size(); ++i)
    probe(q.heads.data()[i], analytic.heads.data()[i]);
  return worst;
}

// Random tiny model and per-task data for gradient checks: d=4, hidden=5,
// k=3, T=2, N=4, with nonzero biases and labels in {-1, +1}.
struct TinyProblem {
  MtlParameters params;
  std::vector<Matrix> inputs;
  std::vector<Vector> labels;
};

inline TinyProblem tiny_problem(std::uint64_t seed) {
  SeededRng rng(seed);
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  };
  TinyProblem t;
  t.params = MtlParameters::zeros(4, 5, 3, 2);
  fill(t.params.layer1_weights);
  fill(t.params.layer1_bias);
  fill(t.params.projection);
  fill(t.params.heads);
  for (int j = 0; j < 2; ++j) {
    Matrix x(4, 4);
    fill(x);
    Vector y(4);
    for (int i = 0; i < 4; ++i) y[i] = rng.coin() ? 1.0 : -1.0;
    t.inputs.push_back(x);
    t.labels.push_back(y);
  }
  return t;
}

}  // namespace taskprobe::oracle
