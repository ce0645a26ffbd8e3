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

// Gaussian multitask mean estimation and the tracing attack against it.
//
// T task means are drawn from N(mu_bar, task_sd^2 I); each task contributes N
// rows from N(mu_i, sample_sd^2 I); the released statistic is the average of
// the per-task sample means. The adversary holds a challenge batch of k rows
// and scores it with z = <mu_hat - mu_bar, mean(batch) - mu_bar>.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskprobe/error.hpp"
#include "taskprobe/game.hpp"
#include "taskprobe/numerics.hpp"
#include "taskprobe/parallel.hpp"

namespace taskprobe {

// Strong adversaries see actual training rows of an included task; weak
// adversaries see fresh rows from the same task distribution.
enum class Adversary { kStrong, kWeak };

inline std::string_view to_string(Adversary a) { return a == Adversary::kStrong ? "strong" : "weak"; }

inline Adversary parse_adversary(std::string_view text) {
  if (text == "strong") return Adversary::kStrong;
  if (text == "weak") return Adversary::kWeak;
  throw Error(ErrorKind::kParse, "unknown adversary '" + std::string(text) + "'");
}

struct TracingConfig {
  int tasks = 256;             // T
  int samples_per_task = 8;    // N
  int challenge_size = 4;      // k
  int dim = 256;               // d
  Vector true_mean;            // mu_bar; empty means the zero vector
  double task_sd = 1.0;        // sigma_bar
  double sample_sd = 1.0;      // sigma
  Adversary adversary = Adversary::kStrong;
  // Admits task_sd == 0 or sample_sd == 0. Test worlds only.
  bool allow_zero_noise = false;

  Vector mean_vector() const {
    return true_mean.size() == 0 ? Vector::Zero(dim) : true_mean;
  }

  void validate() const {
    using detail::require;
    require(tasks >= 1, ErrorKind::kConfig, "task count must be at least 1");
    require(dim >= 1, ErrorKind::kConfig, "dimension must be at least 1");
    require(samples_per_task >= 1, ErrorKind::kConfig, "samples per task must be at least 1");
    require(challenge_size >= 1 && challenge_size <= samples_per_task, ErrorKind::kConfig,
            "challenge size must satisfy 1 <= k <= N");
    require(true_mean.size() == 0 || true_mean.size() == dim, ErrorKind::kConfig,
            "true mean has the wrong dimension");
    require(true_mean.size() == 0 || true_mean.allFinite(), ErrorKind::kConfig,
            "true mean must be finite");
    require(std::isfinite(task_sd) && std::isfinite(sample_sd), ErrorKind::kConfig,
            "noise scales must be finite");
    if (allow_zero_noise) {
      require(task_sd >= 0.0 && sample_sd >= 0.0, ErrorKind::kConfig,
              "noise scales must be nonnegative");
    } else {
      require(task_sd > 0.0 && sample_sd > 0.0, ErrorKind::kConfig,
              "noise scales must be positive");
    }
  }
};

struct TracingWorld {
  std::vector<Vector> task_means;
  std::vector<Matrix> task_data;
  Vector multitask_mean;
};

struct TrialOutcome {
  double statistic = 0.0;
  Membership label = Membership::kOut;
};

struct TracingMoments {
  double e_in = 0.0;
  double e_out = 0.0;
  double var_out = 0.0;
  double var_in_upper = 0.0;
};

// (1/T) sum_i (1/N) sum_j X_ij.
inline Vector multitask_mean(std::span<const Matrix> tasks) {
  detail::require(!tasks.empty(), ErrorKind::kInsufficientData, "no tasks");
  const auto rows = tasks.front().rows();
  const auto cols = tasks.front().cols();
  detail::require(rows >= 1 && cols >= 1, ErrorKind::kDimension, "empty task matrix");
  Vector sum = Vector::Zero(cols);
  for (const auto& x : tasks) {
    detail::require(x.rows() == rows && x.cols() == cols, ErrorKind::kDimension,
                    "all tasks must share the same N x d shape");
    sum += x.colwise().mean().transpose();
  }
  return sum / static_cast<double>(tasks.size());
}

inline TracingWorld build_world(const TracingConfig& cfg, SeededRng& rng) {
  cfg.validate();
  const Vector mu_bar = cfg.mean_vector();
  TracingWorld world;
  world.task_means.reserve(static_cast<std::size_t>(cfg.tasks));
  world.task_data.reserve(static_cast<std::size_t>(cfg.tasks));
  for (int i = 0; i < cfg.tasks; ++i) {
    world.task_means.push_back(detail::gaussian_vector(mu_bar, cfg.task_sd, rng));
    world.task_data.push_back(detail::gaussian_rows(
        world.task_means.back(), cfg.sample_sd, static_cast<std::size_t>(cfg.samples_per_task),
        rng));
  }
  world.multitask_mean = multitask_mean(world.task_data);
  return world;
}

// Challenge batch for one round. In: a uniformly chosen included task, using
// k of its training rows (strong) or k fresh rows from its distribution
// (weak). Out: a freshly drawn task mean and k rows from it.
inline Matrix make_challenge(const TracingWorld& world, const TracingConfig& cfg,
                             Membership truth, SeededRng& rng) {
  cfg.validate();
  detail::require(world.task_data.size() == static_cast<std::size_t>(cfg.tasks),
                  ErrorKind::kDimension, "world does not match config");
  const auto k = static_cast<std::size_t>(cfg.challenge_size);
  if (truth == Membership::kOut) {
    const Vector mu_out = detail::gaussian_vector(cfg.mean_vector(), cfg.task_sd, rng);
    return detail::gaussian_rows(mu_out, cfg.sample_sd, k, rng);
  }
  const auto tau = static_cast<std::size_t>(rng.below(world.task_data.size()));
  if (cfg.adversary == Adversary::kWeak)
    return detail::gaussian_rows(world.task_means[tau], cfg.sample_sd, k, rng);

  const Matrix& source = world.task_data[tau];
  std::vector<Eigen::Index> order(static_cast<std::size_t>(source.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  Matrix batch(static_cast<Eigen::Index>(k), source.cols());
  for (std::size_t i = 0; i < k; ++i) batch.row(static_cast<Eigen::Index>(i)) = source.row(order[i]);
  return batch;
}

inline double tracing_statistic(const Vector& mu_hat, const Vector& mu_bar,
                                const Matrix& challenge) {
  detail::require(challenge.rows() >= 1, ErrorKind::kInsufficientData, "empty challenge batch");
  detail::require(mu_hat.size() == mu_bar.size() && challenge.cols() == mu_hat.size(),
                  ErrorKind::kDimension, "dimension mismatch in tracing statistic");
  return (mu_hat - mu_bar).dot(row_mean(challenge) - mu_bar);
}

// Closed-form first and second moments of z.
inline TracingMoments theoretical_moments(const TracingConfig& cfg) {
  cfg.validate();
  const double d = cfg.dim, t = cfg.tasks, n = cfg.samples_per_task, k = cfg.challenge_size;
  const double tv = cfg.task_sd * cfg.task_sd;
  const double sv = cfg.sample_sd * cfg.sample_sd;
  TracingMoments m;
  m.e_out = 0.0;
  m.e_in = cfg.adversary == Adversary::kStrong ? (d / t) * (tv + sv / n) : (d / t) * tv;
  m.var_out = (d / t) * (tv * tv + sv * sv / (k * n) + ((k + n) / (k * n)) * tv * sv);
  m.var_in_upper = 3.0 * m.var_out;
  return m;
}

// How a round's world is produced.
//   kExplicitWorld: build all T x N rows, release mu_hat, draw the batch.
//   kSufficientStatistic: draw only the per-coordinate Gaussian summaries
//     that z depends on (the other tasks' aggregate mean, the target task's
//     mean and the batch mean). Same joint law of (mu_hat, mean(batch)),
//     O(d) per round instead of O(T N d).
enum class TracingSampler { kExplicitWorld, kSufficientStatistic };

inline std::string_view to_string(TracingSampler s) {
  return s == TracingSampler::kExplicitWorld ? "explicit" : "sufficient";
}

inline TracingSampler parse_sampler(std::string_view text) {
  if (text == "explicit") return TracingSampler::kExplicitWorld;
  if (text == "sufficient") return TracingSampler::kSufficientStatistic;
  throw Error(ErrorKind::kParse, "unknown sampler '" + std::string(text) + "'");
}

namespace detail {

// z for one round drawn from the reduced representation. Everything is
// expressed as deviations from mu_bar, which z is invariant to.
inline double sufficient_statistic_round(const TracingConfig& cfg, Membership truth,
                                         SeededRng& rng) {
  const double t = cfg.tasks, n = cfg.samples_per_task, k = cfg.challenge_size;
  const double tv = cfg.task_sd * cfg.task_sd;
  const double sv = cfg.sample_sd * cfg.sample_sd;
  // Sum over the other T-1 tasks of (task sample mean - mu_bar).
  const double others_sd = std::sqrt((t - 1.0) * (tv + sv / n));
  const double batch_noise_sd = std::sqrt(sv / k);
  const double rest_noise_sd = cfg.challenge_size < cfg.samples_per_task
                                   ? std::sqrt(sv / (n - k))
                                   : 0.0;
  const double own_mean_noise_sd = std::sqrt(sv / n);

  double z = 0.0;
  for (int j = 0; j < cfg.dim; ++j) {
    const double others = others_sd * rng.normal();
    const double task_dev = cfg.task_sd * rng.normal();
    double released = 0.0;
    double batch = 0.0;
    if (truth == Membership::kOut) {
      // Target task is fresh; the released mean still averages T tasks.
      const double included = task_dev + own_mean_noise_sd * rng.normal();
      const double out_dev = cfg.task_sd * rng.normal();
      released = (others + included) / t;
      batch = out_dev + batch_noise_sd * rng.normal();
    } else if (cfg.adversary == Adversary::kWeak) {
      const double own_mean = task_dev + own_mean_noise_sd * rng.normal();
      released = (others + own_mean) / t;
      batch = task_dev + batch_noise_sd * rng.normal();
    } else {
      // Batch mean of k training rows and mean of the remaining N-k rows.
      batch = task_dev + batch_noise_sd * rng.normal();
      const double rest = rest_noise_sd > 0.0 ? task_dev + rest_noise_sd * rng.normal() : 0.0;
      const double own_mean = (k * batch + (n - k) * rest) / n;
      released = (others + own_mean) / t;
    }
    z += released * batch;
  }
  return z;
}

}  // namespace detail

inline double tracing_round(const TracingConfig& cfg, Membership truth, TracingSampler sampler,
                            SeededRng& rng) {
  if (sampler == TracingSampler::kSufficientStatistic)
    return detail::sufficient_statistic_round(cfg, truth, rng);
  const TracingWorld world = build_world(cfg, rng);
  const Matrix batch = make_challenge(world, cfg, truth, rng);
  return tracing_statistic(world.multitask_mean, cfg.mean_vector(), batch);
}

struct TracingRunOptions {
  TracingSampler sampler = TracingSampler::kSufficientStatistic;
  // Reuse one world for every round (qualitative ROC plots) instead of
  // resampling it per round. Always uses the explicit world.
  bool fixed_world = false;
  unsigned threads = worker_count();
};

inline constexpr std::uint64_t kFixedWorldStream = 1;

inline std::vector<TrialOutcome> run_tracing_experiment(const TracingConfig& cfg,
                                                        std::size_t trials, const SeededRng& rng,
                                                        const TracingRunOptions& options = {}) {
  cfg.validate();
  std::vector<TrialOutcome> outcomes(trials);
  const SeededRng rounds = rng.substream(kRoundStreams);
  if (options.fixed_world) {
    SeededRng world_rng = rng.substream(kFixedWorldStream);
    const TracingWorld world = build_world(cfg, world_rng);
    const Vector mu_bar = cfg.mean_vector();
    parallel_for(trials, [&](std::size_t i) {
      GameRound round = draw_round(rounds, i);
      const Matrix batch = make_challenge(world, cfg, round.truth, round.rng);
      outcomes[i] = {tracing_statistic(world.multitask_mean, mu_bar, batch), round.truth};
    }, options.threads);
    return outcomes;
  }
  parallel_for(trials, [&](std::size_t i) {
    GameRound round = draw_round(rounds, i);
    outcomes[i] = {tracing_round(cfg, round.truth, options.sampler, round.rng), round.truth};
  }, options.threads);
  return outcomes;
}

}  // namespace taskprobe
