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

// Per-command experiment configurations. Each record serializes to a flat
// JSON object whose keys match the command-line flags (with '-' spelled
// '_'), and parses back to an equal record.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskprobe/error.hpp"
#include "taskprobe/eval.hpp"
#include "taskprobe/io.hpp"
#include "taskprobe/synthmtl.hpp"
#include "taskprobe/tracing.hpp"

namespace taskprobe {

struct TraceSimConfig {
  int T = 256;
  int d = 256;
  int N = 8;
  int k = 4;
  double sigma_bar = 1.0;
  double sigma = 1.0;
  double mu_bar = 0.0;  // every coordinate of the true mean
  std::string adversary = "strong";
  long long trials = 10000;
  std::string sampler = "sufficient";
  bool fixed_world = false;
  double fpr = 0.01;
  std::vector<double> percentiles{50.0, 75.0, 90.0};
  std::uint64_t seed = 0;
  std::string out = "trace-sim-out";
  std::string format = "csv";

  bool operator==(const TraceSimConfig&) const = default;

  TracingConfig tracing() const {
    TracingConfig cfg;
    cfg.tasks = T;
    cfg.dim = d;
    cfg.samples_per_task = N;
    cfg.challenge_size = k;
    cfg.task_sd = sigma_bar;
    cfg.sample_sd = sigma;
    cfg.true_mean = Vector::Constant(std::max(d, 0), mu_bar);
    cfg.adversary = parse_adversary(adversary);
    return cfg;
  }

  void validate() const {
    tracing().validate();
    parse_sampler(sampler);
    parse_table_format(format);
    detail::require(trials >= 1, ErrorKind::kConfig, "trials must be at least 1");
    detail::require(fpr >= 0.0 && fpr <= 1.0, ErrorKind::kConfig, "fpr must lie in [0, 1]");
    for (double p : percentiles)
      detail::require(p > 0.0 && p < 100.0, ErrorKind::kConfig, "percentiles must lie in (0, 100)");
  }
};

struct AttackConfig {
  std::string input;
  std::string attack = "variance";
  double lambda = kDefaultWhiteningLambda;
  bool no_whiten = false;
  bool whiten_variance = false;
  std::string orientation = "higher-is-in";
  double fpr = 0.01;
  std::vector<double> percentiles{50.0, 75.0, 90.0};
  std::uint64_t seed = 0;
  std::string out = "attack-out";
  std::string format = "csv";

  bool operator==(const AttackConfig&) const = default;

  void validate() const {
    detail::require(!input.empty(), ErrorKind::kConfig, "an input embedding file is required");
    parse_attack(attack);
    parse_orientation(orientation);
    parse_table_format(format);
    detail::require(lambda >= 0.0, ErrorKind::kConfig, "lambda must be nonnegative");
    detail::require(fpr >= 0.0 && fpr <= 1.0, ErrorKind::kConfig, "fpr must lie in [0, 1]");
    for (double p : percentiles)
      detail::require(p > 0.0 && p < 100.0, ErrorKind::kConfig, "percentiles must lie in (0, 100)");
  }
};

struct SynthMtlConfig {
  int tasks = 16;  // In tasks; 2x this many are generated
  int samples_per_task = 64;
  int holdout_per_task = 64;
  int dim = 32;
  int embed_dim = 16;
  int hidden = 512;
  int epochs = 200;
  double step_size = 1e-3;
  double weight_decay_shared = 1e-4;
  double weight_decay_heads = 1e-3;
  double clip_norm = 1.0;
  double task_sigma = 1.0;
  double sample_sigma = 1.0;
  int runs = 4;
  int trials = 64;
  int per_task = 8;
  double lambda = kDefaultWhiteningLambda;
  std::string variance_orientation = "higher-is-in";
  std::string inner_orientation = "higher-is-in";
  // Ablation axis: one of samples-per-task, tasks, embed-dim, hidden,
  // epochs, per-task; empty for a single setting.
  std::string vary;
  std::vector<int> vary_values;
  bool save_models = false;
  bool export_embeddings = false;
  std::uint64_t seed = 0;
  std::string out = "synth-mtl-out";
  std::string format = "csv";

  bool operator==(const SynthMtlConfig&) const = default;

  SyntheticMtlSpec spec() const {
    SyntheticMtlSpec s;
    s.in_tasks = tasks;
    s.samples_per_task = samples_per_task;
    s.holdout_per_task = holdout_per_task;
    s.dim = dim;
    s.embed_dim = embed_dim;
    s.hidden = hidden;
    s.epochs = epochs;
    s.step_size = step_size;
    s.weight_decay_shared = weight_decay_shared;
    s.weight_decay_heads = weight_decay_heads;
    s.clip_norm = clip_norm;
    s.task_sd = task_sigma;
    s.sample_sd = sample_sigma;
    return s;
  }

  // Copy with the ablation axis set to `value`.
  SynthMtlConfig with_setting(int value) const {
    SynthMtlConfig c = *this;
    if (vary == "samples-per-task") c.samples_per_task = value;
    else if (vary == "tasks") c.tasks = value;
    else if (vary == "embed-dim") c.embed_dim = value;
    else if (vary == "hidden") c.hidden = value;
    else if (vary == "epochs") c.epochs = value;
    else if (vary == "per-task") c.per_task = value;
    else throw Error(ErrorKind::kConfig, "cannot vary '" + vary + "'");
    return c;
  }

  void validate() const {
    parse_orientation(variance_orientation);
    parse_orientation(inner_orientation);
    parse_table_format(format);
    detail::require(runs >= 1 && trials >= 1, ErrorKind::kConfig, "runs and trials must be at least 1");
    detail::require(per_task >= 2, ErrorKind::kConfig, "per_task must be at least 2");
    detail::require(lambda >= 0.0, ErrorKind::kConfig, "lambda must be nonnegative");
    if (vary.empty()) {
      detail::require(vary_values.empty(), ErrorKind::kConfig, "vary_values given without vary");
      spec().validate();
      return;
    }
    detail::require(!vary_values.empty(), ErrorKind::kConfig, "vary requires at least one value");
    for (int v : vary_values) {
      const SynthMtlConfig c = with_setting(v);
      c.spec().validate();
      detail::require(c.per_task >= 2, ErrorKind::kConfig, "per_task must be at least 2");
    }
  }
};

struct EvalConfig {
  std::string input;
  std::string orientation = "higher-is-in";
  double fpr = 0.01;
  std::vector<double> percentiles{50.0, 75.0, 90.0};
  std::uint64_t seed = 0;
  std::string out = "eval-out";
  std::string format = "csv";

  bool operator==(const EvalConfig&) const = default;

  void validate() const {
    detail::require(!input.empty(), ErrorKind::kConfig, "an input score file is required");
    parse_orientation(orientation);
    parse_table_format(format);
    detail::require(fpr >= 0.0 && fpr <= 1.0, ErrorKind::kConfig, "fpr must lie in [0, 1]");
    for (double p : percentiles)
      detail::require(p > 0.0 && p < 100.0, ErrorKind::kConfig, "percentiles must lie in (0, 100)");
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TraceSimConfig, T, d, N, k, sigma_bar, sigma, mu_bar,
                                                adversary, trials, sampler, fixed_world, fpr,
                                                percentiles, seed, out, format)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AttackConfig, input, attack, lambda, no_whiten,
                                                whiten_variance, orientation, fpr, percentiles,
                                                seed, out, format)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthMtlConfig, tasks, samples_per_task,
                                                holdout_per_task, dim, embed_dim, hidden, epochs,
                                                step_size, weight_decay_shared, weight_decay_heads,
                                                clip_norm, task_sigma, sample_sigma, runs, trials,
                                                per_task, lambda, variance_orientation,
                                                inner_orientation, vary, vary_values, save_models,
                                                export_embeddings, seed, out, format)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvalConfig, input, orientation, fpr, percentiles,
                                                seed, out, format)

// Reads a config record from a JSON file holding either the bare record or a
// result metadata document (whose "config" member is used).
template <typename Config>
Config load_config(const std::filesystem::path& path) {
  const nlohmann::json doc = read_json(path);
  try {
    const nlohmann::json& body = doc.contains("config") ? doc.at("config") : doc;
    return body.get<Config>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
}

}  // namespace taskprobe
