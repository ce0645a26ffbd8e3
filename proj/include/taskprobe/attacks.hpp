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

// Black-box task-inference attacks on embedding sets.
//
// Each challenge task contributes the embeddings of k of its samples. The
// variance attack scores a set by its average coordinate-wise sample
// variance. The inner-product attack whitens embeddings with a transform
// estimated from every *other* task's embeddings and scores the set by the
// mean absolute inner product (optionally cosine) over distinct pairs.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "taskprobe/error.hpp"
#include "taskprobe/game.hpp"
#include "taskprobe/numerics.hpp"
#include "taskprobe/parallel.hpp"

namespace taskprobe {

struct EmbeddingSet {
  std::string task_id;
  Matrix embeddings;                 // k x d_e, one row per queried sample
  std::optional<Membership> label;   // known only in evaluation
};

enum class AttackKind { kVariance, kInnerProduct, kCosineInnerProduct };

inline std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kVariance: return "variance";
    case AttackKind::kInnerProduct: return "inner-product";
    case AttackKind::kCosineInnerProduct: return "cosine";
  }
  return "unknown";
}

inline AttackKind parse_attack(std::string_view text) {
  if (text == "variance") return AttackKind::kVariance;
  if (text == "inner-product") return AttackKind::kInnerProduct;
  if (text == "cosine") return AttackKind::kCosineInnerProduct;
  throw Error(ErrorKind::kParse, "unknown attack '" + std::string(text) + "'");
}

struct AttackScore {
  std::string task_id;
  double statistic = 0.0;
  AttackKind attack = AttackKind::kVariance;
  std::optional<Membership> label;
};

struct WhiteningContext {
  Vector pooled_mean;
  Matrix transform;
  double lambda = 0.0;
  std::string excluded_task;
};

inline constexpr double kDefaultWhiteningLambda = 1e-3;

// tr(Q) / d_e for the sample covariance Q of the set.
inline AttackScore variance_attack(const EmbeddingSet& set) {
  detail::require(set.embeddings.rows() >= 2, ErrorKind::kInsufficientData,
                  "variance attack on task '" + set.task_id + "' needs at least 2 embeddings");
  detail::require(set.embeddings.allFinite(), ErrorKind::kParameter,
                  "non-finite embedding in task '" + set.task_id + "'");
  const Matrix q = sample_covariance(set.embeddings);
  return {set.task_id, q.trace() / static_cast<double>(q.rows()), AttackKind::kVariance, set.label};
}

// Whitening fitted on the pooled embeddings of every task except
// `excluded_task`: W = (Q + lambda tr(Q)/d I)^(-1/2), centered on the pool
// mean. An id that matches no task excludes nothing.
inline WhiteningContext build_whitening(std::span<const EmbeddingSet> all_sets,
                                        const std::string& excluded_task, double lambda) {
  detail::require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::kParameter,
                  "lambda must be nonnegative");
  Eigen::Index rows = 0;
  Eigen::Index dim = -1;
  for (const auto& set : all_sets) {
    if (dim < 0) dim = set.embeddings.cols();
    detail::require(set.embeddings.cols() == dim, ErrorKind::kDimension,
                    "embedding dimension differs across tasks");
    if (set.task_id != excluded_task) rows += set.embeddings.rows();
  }
  detail::require(rows >= 2, ErrorKind::kSingular,
                  "whitening pool without task '" + excluded_task + "' has fewer than 2 rows");

  Matrix pool(rows, dim);
  Eigen::Index at = 0;
  for (const auto& set : all_sets) {
    if (set.task_id == excluded_task) continue;
    pool.middleRows(at, set.embeddings.rows()) = set.embeddings;
    at += set.embeddings.rows();
  }
  WhiteningContext ctx;
  ctx.pooled_mean = row_mean(pool);
  ctx.transform = inverse_sqrt_psd(regularized_covariance(sample_covariance(pool), lambda));
  ctx.lambda = lambda;
  ctx.excluded_task = excluded_task;
  return ctx;
}

// Each row e becomes W (e - pooled_mean).
inline EmbeddingSet apply_whitening(const WhiteningContext& ctx, const EmbeddingSet& set) {
  detail::require(set.embeddings.cols() == ctx.transform.rows(), ErrorKind::kDimension,
                  "embedding dimension does not match whitening transform");
  EmbeddingSet out{set.task_id, Matrix(), set.label};
  out.embeddings = (set.embeddings.rowwise() - ctx.pooled_mean.transpose()) * ctx.transform;
  return out;
}

// Mean over unordered pairs i < j of |<e_i, e_j>|; with use_cosine each
// vector is unit-normalized first.
inline AttackScore inner_product_attack(const EmbeddingSet& set, bool use_cosine) {
  const Eigen::Index k = set.embeddings.rows();
  detail::require(k >= 2, ErrorKind::kInsufficientData,
                  "inner-product attack on task '" + set.task_id + "' needs at least 2 embeddings");
  detail::require(set.embeddings.allFinite(), ErrorKind::kParameter,
                  "non-finite embedding in task '" + set.task_id + "'");
  Matrix e = set.embeddings;
  if (use_cosine) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double norm = e.row(i).norm();
      detail::require(norm > 0.0, ErrorKind::kDegenerateInput,
                      "zero-norm embedding in task '" + set.task_id + "' under cosine similarity");
      e.row(i) /= norm;
    }
  }
  const Matrix gram = e * e.transpose();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) sum += std::abs(gram(i, j));
  const double pairs = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0;
  return {set.task_id, sum / pairs,
          use_cosine ? AttackKind::kCosineInnerProduct : AttackKind::kInnerProduct, set.label};
}

struct AttackStudyOptions {
  AttackKind attack = AttackKind::kVariance;
  double lambda = kDefaultWhiteningLambda;
  // Leave-one-task-out whitening before the inner-product attacks.
  bool whiten_inner_product = true;
  // Experimental: whiten before the variance attack as well.
  bool whiten_variance = false;
  unsigned threads = 1;
};

// Scores every task in the study. Task ids must be unique; when whitening is
// on, task i is whitened with the pool of all other tasks.
inline std::vector<AttackScore> run_attack_study(std::span<const EmbeddingSet> all_sets,
                                                 const AttackStudyOptions& options) {
  std::unordered_set<std::string> ids;
  for (const auto& set : all_sets)
    detail::require(ids.insert(set.task_id).second, ErrorKind::kParameter,
                    "duplicate task id '" + set.task_id + "' in study");
  const bool inner = options.attack != AttackKind::kVariance;
  const bool whiten = inner ? options.whiten_inner_product : options.whiten_variance;
  if (whiten)
    detail::require(all_sets.size() >= 2, ErrorKind::kInsufficientData,
                    "whitened attack study needs at least 2 tasks");

  std::vector<AttackScore> scores(all_sets.size());
  parallel_for(all_sets.size(), [&](std::size_t i) {
    const EmbeddingSet& raw = all_sets[i];
    const EmbeddingSet set =
        whiten ? apply_whitening(build_whitening(all_sets, raw.task_id, options.lambda), raw) : raw;
    scores[i] = inner ? inner_product_attack(set, options.attack == AttackKind::kCosineInnerProduct)
                      : variance_attack(set);
  }, options.threads);
  return scores;
}

}  // namespace taskprobe
