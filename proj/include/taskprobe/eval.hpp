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

// Metrics for inclusion tests: ROC curves, AUC, TPR at a fixed FPR and
// operating points at pooled-percentile thresholds, plus a generic runner
// for the inclusion game over any scoring procedure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskprobe/error.hpp"
#include "taskprobe/game.hpp"
#include "taskprobe/numerics.hpp"
#include "taskprobe/parallel.hpp"

namespace taskprobe {

// Which side of the threshold means "included". Callers choose; nothing here
// flips it automatically.
enum class Orientation { kHigherIsIn, kLowerIsIn };

inline std::string_view to_string(Orientation o) {
  return o == Orientation::kHigherIsIn ? "higher-is-in" : "lower-is-in";
}

inline Orientation parse_orientation(std::string_view text) {
  if (text == "higher-is-in") return Orientation::kHigherIsIn;
  if (text == "lower-is-in") return Orientation::kLowerIsIn;
  throw Error(ErrorKind::kParse, "unknown orientation '" + std::string(text) + "'");
}

struct ScoredPopulation {
  std::vector<double> in_scores;
  std::vector<double> out_scores;
  Orientation orientation = Orientation::kHigherIsIn;

  void add(Membership truth, double score) {
    (truth == Membership::kIn ? in_scores : out_scores).push_back(score);
  }
  std::size_t size() const { return in_scores.size() + out_scores.size(); }
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.0;

  bool below_chance() const { return auc < 0.5; }
};

struct OperatingPoint {
  double percentile = 0.0;
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double balanced_accuracy = 0.0;
};

inline double balanced_accuracy(double tpr, double fpr) { return (tpr + (1.0 - fpr)) / 2.0; }

namespace detail {

inline void require_finite(std::span<const double> scores, const char* what) {
  for (double s : scores)
    require(std::isfinite(s), ErrorKind::kParameter, std::string(what) + " contains a non-finite score");
}

// Score mapped so that larger always means "more likely In".
inline double oriented(double score, Orientation o) {
  return o == Orientation::kHigherIsIn ? score : -score;
}

}  // namespace detail

// Threshold-sweep ROC. Equal scores form a single step, so ties give a
// diagonal segment and the trapezoidal area equals the Mann-Whitney
// statistic with ties counted as one half.
inline RocResult roc(const ScoredPopulation& pop) {
  detail::require(!pop.in_scores.empty() && !pop.out_scores.empty(),
                  ErrorKind::kInsufficientData, "ROC needs nonempty in and out populations");
  detail::require_finite(pop.in_scores, "in population");
  detail::require_finite(pop.out_scores, "out population");

  struct Entry {
    double score;
    bool in;
  };
  std::vector<Entry> entries;
  entries.reserve(pop.size());
  for (double s : pop.in_scores) entries.push_back({detail::oriented(s, pop.orientation), true});
  for (double s : pop.out_scores) entries.push_back({detail::oriented(s, pop.orientation), false});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  const double n_in = static_cast<double>(pop.in_scores.size());
  const double n_out = static_cast<double>(pop.out_scores.size());
  RocResult result;
  result.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area2 = 0.0;  // twice the area, in units of (1/n_out)(1/n_in)
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t tp_step = 0, fp_step = 0;
    const double score = entries[i].score;
    for (; i < entries.size() && entries[i].score == score; ++i)
      (entries[i].in ? tp_step : fp_step) += 1;
    area2 += static_cast<double>(fp_step) * static_cast<double>(2 * tp + tp_step);
    tp += tp_step;
    fp += fp_step;
    result.points.push_back({static_cast<double>(fp) / n_out, static_cast<double>(tp) / n_in});
  }
  result.points.back() = {1.0, 1.0};
  result.auc = area2 / (2.0 * n_in * n_out);
  return result;
}

// Largest TPR among ROC points with FPR <= target. No interpolation.
inline double tpr_at_fpr(const RocResult& curve, double fpr_target) {
  detail::require(fpr_target >= 0.0 && fpr_target <= 1.0, ErrorKind::kParameter,
                  "fpr target must lie in [0, 1]");
  double best = 0.0;
  for (const auto& p : curve.points)
    if (p.fpr <= fpr_target) best = std::max(best, p.tpr);
  return best;
}

// Nearest-rank percentile of the pooled scores (rank ceil(p/100 * n)) after
// orientation; a score is called In when it lies strictly beyond the
// threshold. For a balanced pool this puts roughly (1 - p/100) of all scores
// on the In side, so tpr + fpr ~ 2 (1 - p/100).
inline std::vector<OperatingPoint> percentile_operating_points(const ScoredPopulation& pop,
                                                               std::span<const double> percentiles) {
  detail::require(pop.size() > 0, ErrorKind::kInsufficientData, "empty score pool");
  detail::require(!pop.in_scores.empty() && !pop.out_scores.empty(),
                  ErrorKind::kInsufficientData, "operating points need both populations");
  detail::require_finite(pop.in_scores, "in population");
  detail::require_finite(pop.out_scores, "out population");
  std::vector<double> pooled;
  pooled.reserve(pop.size());
  for (double s : pop.in_scores) pooled.push_back(detail::oriented(s, pop.orientation));
  for (double s : pop.out_scores) pooled.push_back(detail::oriented(s, pop.orientation));
  std::sort(pooled.begin(), pooled.end());

  std::vector<OperatingPoint> points;
  for (double p : percentiles) {
    detail::require(p > 0.0 && p < 100.0, ErrorKind::kParameter, "percentile must lie in (0, 100)");
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(pooled.size())));
    rank = std::clamp<std::size_t>(rank, 1, pooled.size());
    const double cut = pooled[rank - 1];
    auto above = [cut, &pop](std::span<const double> scores) {
      std::size_t count = 0;
      for (double s : scores) count += detail::oriented(s, pop.orientation) > cut ? 1 : 0;
      return static_cast<double>(count) / static_cast<double>(scores.size());
    };
    OperatingPoint op;
    op.percentile = p;
    op.threshold = pop.orientation == Orientation::kHigherIsIn ? cut : -cut;
    op.tpr = above(pop.in_scores);
    op.fpr = above(pop.out_scores);
    op.balanced_accuracy = balanced_accuracy(op.tpr, op.fpr);
    points.push_back(op);
  }
  return points;
}

struct MomentSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for fewer than 2 values
  double standard_error = 0.0;
};

inline MomentSummary summarize(std::span<const double> values) {
  MomentSummary m;
  m.count = values.size();
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.variance = ss / static_cast<double>(values.size() - 1);
    m.standard_error = std::sqrt(m.variance / static_cast<double>(values.size()));
  }
  return m;
}

// Produces the adversary's statistic for one round given the true bit and
// the round's stream.
using ScoreSource = std::function<double(Membership, SeededRng&)>;

// Plays `trials` rounds of the inclusion game. Round i draws its coin and all
// further randomness from draw_round(rng.substream(kRoundStreams), i).
inline ScoredPopulation run_security_game(const ScoreSource& source, std::size_t trials,
                                          const SeededRng& rng,
                                          Orientation orientation = Orientation::kHigherIsIn,
                                          unsigned threads = worker_count()) {
  std::vector<double> scores(trials);
  std::vector<Membership> truths(trials);
  const SeededRng rounds = rng.substream(kRoundStreams);
  parallel_for(trials, [&](std::size_t i) {
    GameRound round = draw_round(rounds, i);
    truths[i] = round.truth;
    scores[i] = source(round.truth, round.rng);
  }, threads);
  ScoredPopulation pop;
  pop.orientation = orientation;
  for (std::size_t i = 0; i < trials; ++i) pop.add(truths[i], scores[i]);
  return pop;
}

}  // namespace taskprobe
