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

// taskprobe: task-inference attack experiments from the command line.
//
//   taskprobe trace-sim  --T 256 --d 256 --N 8 --k 4 --adversary strong ...
//   taskprobe attack     --input embeddings.csv --attack inner-product ...
//   taskprobe synth-mtl  --vary samples-per-task --vary-values 8,16,32,64 ...
//   taskprobe eval       --input scores.csv --orientation higher-is-in ...
//
// Every subcommand accepts --config FILE (JSON; a previous run's
// metadata.json works too); explicit flags override values from the file.

#include <cstring>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "taskprobe/commands.hpp"

namespace {

using namespace taskprobe;

// Value of --config for the given subcommand, if present on the command line.
std::string find_config_path(int argc, char** argv) {
  for (int i = 2; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
    if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
  }
  return {};
}

void add_common(CLI::App* cmd, std::uint64_t& seed, std::string& out, std::string& format) {
  cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", out, "Output directory")->capture_default_str();
  cmd->add_option("--format", format, "Data table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--config", "JSON config file (flags override it)");
}

void add_metrics(CLI::App* cmd, double& fpr, std::vector<double>& percentiles) {
  cmd->add_option("--fpr", fpr, "FPR at which to report TPR")->capture_default_str();
  cmd->add_option("--percentiles", percentiles, "Pooled percentile thresholds")
      ->delimiter(',')
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-inference attacks on shared representations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TASKPROBE_VERSION);

  const std::string sub = argc > 1 ? argv[1] : "";
  const std::string config_path = find_config_path(argc, argv);

  TraceSimConfig trace;
  AttackConfig attack;
  SynthMtlConfig synth;
  EvalConfig eval;
  try {
    if (!config_path.empty()) {
      if (sub == "trace-sim") trace = load_config<TraceSimConfig>(config_path);
      else if (sub == "attack") attack = load_config<AttackConfig>(config_path);
      else if (sub == "synth-mtl") synth = load_config<SynthMtlConfig>(config_path);
      else if (sub == "eval") eval = load_config<EvalConfig>(config_path);
    }
  } catch (const Error& e) {
    std::cerr << "taskprobe: " << e.what() << '\n';
    return 2;
  }

  auto* ts = app.add_subcommand("trace-sim", "Tracing attack on Gaussian multitask mean estimation");
  ts->add_option("--T", trace.T, "Number of tasks")->capture_default_str();
  ts->add_option("--d", trace.d, "Dimension")->capture_default_str();
  ts->add_option("--N", trace.N, "Samples per task")->capture_default_str();
  ts->add_option("--k", trace.k, "Challenge batch size")->capture_default_str();
  ts->add_option("--sigma-bar", trace.sigma_bar, "Task-level standard deviation")->capture_default_str();
  ts->add_option("--sigma", trace.sigma, "Within-task standard deviation")->capture_default_str();
  ts->add_option("--mu-bar", trace.mu_bar, "Value of every coordinate of the true mean")
      ->capture_default_str();
  ts->add_option("--adversary", trace.adversary, "strong or weak")
      ->check(CLI::IsMember({"strong", "weak"}))
      ->capture_default_str();
  ts->add_option("--trials", trace.trials, "Number of game rounds")->capture_default_str();
  ts->add_option("--sampler", trace.sampler, "explicit (full world per round) or sufficient")
      ->check(CLI::IsMember({"explicit", "sufficient"}))
      ->capture_default_str();
  ts->add_flag("--fixed-world", trace.fixed_world, "Reuse one world for all rounds");
  add_metrics(ts, trace.fpr, trace.percentiles);
  add_common(ts, trace.seed, trace.out, trace.format);

  auto* at = app.add_subcommand("attack", "Score the tasks of an embedding file");
  at->add_option("--input", attack.input, "Embedding CSV file");
  at->add_option("--attack", attack.attack, "variance, inner-product or cosine")
      ->check(CLI::IsMember({"variance", "inner-product", "cosine"}))
      ->capture_default_str();
  at->add_option("--lambda", attack.lambda, "Whitening regularization")->capture_default_str();
  at->add_flag("--no-whiten", attack.no_whiten, "Skip whitening for inner-product attacks");
  at->add_flag("--whiten-variance", attack.whiten_variance, "Whiten before the variance attack");
  at->add_option("--orientation", attack.orientation, "higher-is-in or lower-is-in")
      ->check(CLI::IsMember({"higher-is-in", "lower-is-in"}))
      ->capture_default_str();
  add_metrics(at, attack.fpr, attack.percentiles);
  add_common(at, attack.seed, attack.out, attack.format);

  auto* sm = app.add_subcommand("synth-mtl", "Train on synthetic multitask data and attack it");
  sm->add_option("--tasks", synth.tasks, "In tasks (twice as many are generated)")->capture_default_str();
  sm->add_option("--samples-per-task", synth.samples_per_task, "Training rows per task")
      ->capture_default_str();
  sm->add_option("--holdout-per-task", synth.holdout_per_task, "Fresh rows per task")
      ->capture_default_str();
  sm->add_option("--dim", synth.dim, "Input dimension")->capture_default_str();
  sm->add_option("--embed-dim", synth.embed_dim, "Embedding dimension")->capture_default_str();
  sm->add_option("--hidden", synth.hidden, "Hidden units")->capture_default_str();
  sm->add_option("--epochs", synth.epochs, "Training rounds")->capture_default_str();
  sm->add_option("--step-size", synth.step_size, "Optimizer step size")->capture_default_str();
  sm->add_option("--weight-decay-shared", synth.weight_decay_shared)->capture_default_str();
  sm->add_option("--weight-decay-heads", synth.weight_decay_heads)->capture_default_str();
  sm->add_option("--clip-norm", synth.clip_norm, "Global gradient norm bound")->capture_default_str();
  sm->add_option("--task-sigma", synth.task_sigma, "Task mean standard deviation")->capture_default_str();
  sm->add_option("--sample-sigma", synth.sample_sigma, "Within-task standard deviation")
      ->capture_default_str();
  sm->add_option("--runs", synth.runs, "Training runs per setting")->capture_default_str();
  sm->add_option("--trials", synth.trials, "Attack trials per run")->capture_default_str();
  sm->add_option("--per-task", synth.per_task, "Samples per task per attack trial")->capture_default_str();
  sm->add_option("--lambda", synth.lambda, "Whitening regularization")->capture_default_str();
  sm->add_option("--variance-orientation", synth.variance_orientation)
      ->check(CLI::IsMember({"higher-is-in", "lower-is-in"}))
      ->capture_default_str();
  sm->add_option("--inner-orientation", synth.inner_orientation)
      ->check(CLI::IsMember({"higher-is-in", "lower-is-in"}))
      ->capture_default_str();
  sm->add_option("--vary", synth.vary, "Ablation axis")
      ->check(CLI::IsMember({"samples-per-task", "tasks", "embed-dim", "hidden", "epochs", "per-task"}));
  sm->add_option("--vary-values", synth.vary_values, "Comma-separated axis values")->delimiter(',');
  sm->add_flag("--save-models", synth.save_models, "Write model and dataset checkpoints");
  sm->add_flag("--export-embeddings", synth.export_embeddings,
               "Write first-trial embedding files per run");
  add_common(sm, synth.seed, synth.out, synth.format);

  auto* ev = app.add_subcommand("eval", "ROC, AUC and operating points for a labeled score file");
  ev->add_option("--input", eval.input, "CSV with label (or split) and statistic columns");
  ev->add_option("--orientation", eval.orientation, "higher-is-in or lower-is-in")
      ->check(CLI::IsMember({"higher-is-in", "lower-is-in"}))
      ->capture_default_str();
  add_metrics(ev, eval.fpr, eval.percentiles);
  add_common(ev, eval.seed, eval.out, eval.format);

  // `--vary samples-per-task 8,16` reads naturally; accept it as shorthand.
  sm->add_option("values", synth.vary_values, "Axis values (same as --vary-values)")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json meta;
    if (ts->parsed()) meta = cmd_trace_sim(trace);
    else if (at->parsed()) meta = cmd_attack(attack);
    else if (sm->parsed()) meta = cmd_synth_mtl(synth);
    else if (ev->parsed()) meta = cmd_eval(eval);
    std::cout << meta.at("summary").dump(2) << '\n';
  } catch (const Error& e) {
    std::cerr << "taskprobe: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "taskprobe: unexpected failure: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
