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

// Command implementations behind the `taskprobe` executable. Each command
// validates its config, computes everything, then writes its result files
// into config.out: a metadata.json document (config echo, stream map,
// summary) plus data tables in the configured format. Failures throw
// taskprobe::Error; nothing is written for a config that fails validation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskprobe/attacks.hpp"
#include "taskprobe/config.hpp"
#include "taskprobe/eval.hpp"
#include "taskprobe/io.hpp"
#include "taskprobe/synth_study.hpp"
#include "taskprobe/tracing.hpp"

#ifndef TASKPROBE_VERSION
#define TASKPROBE_VERSION "0.0.0"
#endif

namespace taskprobe {

namespace detail {

inline nlohmann::json metadata(const std::string& command, const nlohmann::json& config) {
  return {{"tool", "taskprobe"}, {"version", TASKPROBE_VERSION}, {"command", command},
          {"config", config}};
}

inline std::filesystem::path prepare_output_dir(const std::string& out) {
  detail::require(!out.empty(), ErrorKind::kConfig, "output directory is required");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + out + "': " + ec.message());
  return out;
}

inline Table roc_table(const RocResult& curve) {
  Table t{{"fpr", "tpr"}, {}};
  for (const auto& p : curve.points) t.add({p.fpr, p.tpr});
  return t;
}

inline Table operating_point_table(const std::vector<OperatingPoint>& points) {
  Table t{{"percentile", "threshold", "tpr", "fpr", "balanced_accuracy"}, {}};
  for (const auto& p : points) t.add({p.percentile, p.threshold, p.tpr, p.fpr, p.balanced_accuracy});
  return t;
}

// ROC, TPR at the configured FPR and percentile operating points for a
// labeled population. Adds the tables to `tables` and returns the summary.
inline nlohmann::json evaluate_population(const ScoredPopulation& pop, double fpr,
                                          const std::vector<double>& percentiles,
                                          std::vector<std::pair<std::string, Table>>& tables,
                                          std::ostream& log) {
  nlohmann::json summary = {{"in_count", pop.in_scores.size()},
                            {"out_count", pop.out_scores.size()},
                            {"orientation", to_string(pop.orientation)}};
  if (pop.in_scores.empty() || pop.out_scores.empty()) {
    log << "warning: one population is empty; ROC metrics skipped\n";
    summary["warnings"] = {"one population is empty; ROC metrics skipped"};
    return summary;
  }
  const RocResult curve = roc(pop);
  const auto points = percentile_operating_points(pop, percentiles);
  summary["auc"] = curve.auc;
  summary["fpr_target"] = fpr;
  summary["tpr_at_fpr"] = tpr_at_fpr(curve, fpr);
  summary["warnings"] = nlohmann::json::array();
  if (curve.below_chance()) {
    const std::string msg = "AUC below 0.5 under orientation " +
                            std::string(to_string(pop.orientation)) +
                            "; the statistic may run the other way for this model";
    log << "warning: " << msg << '\n';
    summary["warnings"].push_back(msg);
  }
  tables.emplace_back("roc", roc_table(curve));
  tables.emplace_back("operating_points", operating_point_table(points));
  return summary;
}

inline nlohmann::json write_outputs(const std::filesystem::path& dir, nlohmann::json meta,
                                    const std::vector<std::pair<std::string, Table>>& tables,
                                    TableFormat format) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [stem, table] : tables)
    files.push_back(write_table(dir, stem, table, format).filename().string());
  files.push_back("metadata.json");
  meta["outputs"] = files;
  write_json(dir / "metadata.json", meta);
  return meta;
}

}  // namespace detail

// trace-sim: tracing experiment on the Gaussian mean estimator.
inline nlohmann::json cmd_trace_sim(const TraceSimConfig& config, std::ostream& log = std::clog) {
  config.validate();
  const TracingConfig cfg = config.tracing();
  TracingRunOptions options;
  options.sampler = parse_sampler(config.sampler);
  options.fixed_world = config.fixed_world;
  const auto outcomes = run_tracing_experiment(cfg, static_cast<std::size_t>(config.trials),
                                               SeededRng(config.seed), options);

  std::vector<std::pair<std::string, Table>> tables;
  Table trials{{"trial_index", "label", "statistic"}, {}};
  ScoredPopulation pop;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    trials.add({static_cast<long long>(i), std::string(to_string(outcomes[i].label)),
                outcomes[i].statistic});
    pop.add(outcomes[i].label, outcomes[i].statistic);
  }
  tables.emplace_back("trials", std::move(trials));

  const TracingMoments theory = theoretical_moments(cfg);
  const MomentSummary in = summarize(pop.in_scores);
  const MomentSummary out = summarize(pop.out_scores);
  Table moments{{"quantity", "theoretical", "empirical", "standard_error", "count"}, {}};
  moments.add({std::string("mean_in"), theory.e_in, in.mean, in.standard_error,
               static_cast<long long>(in.count)});
  moments.add({std::string("mean_out"), theory.e_out, out.mean, out.standard_error,
               static_cast<long long>(out.count)});
  moments.add({std::string("var_out"), theory.var_out, out.variance, 0.0,
               static_cast<long long>(out.count)});
  moments.add({std::string("var_in_upper_bound"), theory.var_in_upper, in.variance, 0.0,
               static_cast<long long>(in.count)});
  tables.emplace_back("moments", std::move(moments));

  nlohmann::json summary =
      detail::evaluate_population(pop, config.fpr, config.percentiles, tables, log);
  summary["theoretical"] = {{"e_in", theory.e_in}, {"e_out", theory.e_out},
                            {"var_out", theory.var_out}, {"var_in_upper", theory.var_in_upper}};
  summary["empirical"] = {{"mean_in", in.mean}, {"mean_out", out.mean},
                          {"var_in", in.variance}, {"var_out", out.variance}};
  summary["noise_scales"] = {{"sigma_bar", config.sigma_bar}, {"sigma", config.sigma}};

  nlohmann::json meta = detail::metadata("trace-sim", config);
  meta["streams"] = {{"round_i", "seed / substream(0) / substream(i)"},
                     {"fixed_world", "seed / substream(1)"}};
  meta["summary"] = summary;
  const auto dir = detail::prepare_output_dir(config.out);
  return detail::write_outputs(dir, meta, tables, parse_table_format(config.format));
}

// attack: score every task of an embedding file; evaluate when labeled.
inline nlohmann::json cmd_attack(const AttackConfig& config, std::ostream& log = std::clog) {
  config.validate();
  const EmbeddingFile file = load_embedding_file(config.input);
  AttackStudyOptions options;
  options.attack = parse_attack(config.attack);
  options.lambda = config.lambda;
  options.whiten_inner_product = !config.no_whiten;
  options.whiten_variance = config.whiten_variance;
  options.threads = worker_count();
  const auto scores = run_attack_study(file.sets, options);

  std::vector<std::pair<std::string, Table>> tables;
  Table score_table{{"task_id", "split", "attack", "statistic"}, {}};
  ScoredPopulation pop;
  pop.orientation = parse_orientation(config.orientation);
  for (const auto& s : scores) {
    score_table.add({s.task_id, s.label ? std::string(to_string(*s.label)) : std::string(),
                     std::string(to_string(s.attack)), s.statistic});
    if (s.label) pop.add(*s.label, s.statistic);
  }
  tables.emplace_back("scores", std::move(score_table));

  nlohmann::json summary = {{"tasks", scores.size()}, {"dim", file.dim},
                            {"labeled", file.has_labels}};
  if (file.has_labels)
    summary["evaluation"] =
        detail::evaluate_population(pop, config.fpr, config.percentiles, tables, log);

  nlohmann::json meta = detail::metadata("attack", config);
  meta["summary"] = summary;
  const auto dir = detail::prepare_output_dir(config.out);
  return detail::write_outputs(dir, meta, tables, parse_table_format(config.format));
}

// synth-mtl: synthetic multitask study, optionally swept along one axis.
inline nlohmann::json cmd_synth_mtl(const SynthMtlConfig& config, std::ostream& log = std::clog) {
  config.validate();
  const auto format = parse_table_format(config.format);
  std::vector<std::pair<std::string, SynthMtlConfig>> settings;
  if (config.vary.empty()) settings.emplace_back("", config);
  else
    for (int v : config.vary_values) settings.emplace_back(std::to_string(v), config.with_setting(v));

  const std::string axis = config.vary.empty() ? "default" : config.vary;
  Table summary_table{{"setting", "value", "attack", "adversary", "mean_auc", "runs"}, {}};
  Table run_table{{"setting", "value", "attack", "adversary", "run", "auc"}, {}};
  Table accuracy_table{{"setting", "value", "run", "final_train_accuracy"}, {}};
  Table trace_table{{"setting", "value", "run", "epoch", "train_loss", "holdout_loss_in_tasks",
                     "zero_shot_loss_out_tasks"}, {}};
  auto add_trace = [&](const std::string& value, int run, const TrainingTrace& trace) {
    for (const auto& e : trace.epochs)
      trace_table.add({axis, value, static_cast<long long>(run), static_cast<long long>(e.epoch),
                       e.mean_train_loss, e.mean_holdout_loss_in_tasks, e.zero_shot_loss_out_tasks});
  };

  const auto dir = detail::prepare_output_dir(config.out);
  nlohmann::json rows = nlohmann::json::array();
  // Every setting replays the same seed so sweeps differ only in the axis.
  const SeededRng rng(config.seed);
  for (const auto& [value, setting] : settings) {
    SyntheticStudyOptions options;
    options.runs = setting.runs;
    options.trials = setting.trials;
    options.per_task = setting.per_task;
    options.lambda = setting.lambda;
    options.variance_orientation = parse_orientation(setting.variance_orientation);
    options.inner_product_orientation = parse_orientation(setting.inner_orientation);
    options.keep_artifacts = setting.save_models || setting.export_embeddings;
    log << "synth-mtl: " << axis << (value.empty() ? "" : " = " + value) << '\n';
    SyntheticStudyResult result;
    try {
      result = run_synthetic_study(setting.spec(), options, rng);
    } catch (const DivergenceError& e) {
      add_trace(value, -1, e.trace());
      write_table(dir, "trace_divergence", trace_table, format);
      throw;
    }
    for (const auto& cell : result.cells) {
      const std::string attack(to_string(cell.attack));
      const std::string adversary(to_string(cell.adversary));
      summary_table.add({axis, value, attack, adversary, cell.mean_auc(),
                         static_cast<long long>(cell.run_auc.size())});
      for (std::size_t r = 0; r < cell.run_auc.size(); ++r)
        run_table.add({axis, value, attack, adversary, static_cast<long long>(r), cell.run_auc[r]});
      rows.push_back({{"setting", axis}, {"value", value}, {"attack", attack},
                      {"adversary", adversary}, {"mean_auc", cell.mean_auc()},
                      {"run_auc", cell.run_auc}});
    }
    for (const auto& run : result.runs) {
      accuracy_table.add({axis, value, static_cast<long long>(run.run), run.final_train_accuracy});
      add_trace(value, run.run, run.trace);
      const std::string tag = (value.empty() ? "" : axis + "_" + value + "_") + "run" +
                              std::to_string(run.run);
      if (setting.save_models && run.model && run.dataset) {
        write_json(dir / ("model_" + tag + ".json"), model_to_json(*run.model));
        write_json(dir / ("dataset_" + tag + ".json"), dataset_to_json(*run.dataset));
      }
      if (setting.export_embeddings) {
        save_embedding_file(dir / ("embeddings_strong_" + tag + ".csv"), run.strong_example);
        save_embedding_file(dir / ("embeddings_weak_" + tag + ".csv"), run.weak_example);
      }
    }
  }

  std::vector<std::pair<std::string, Table>> tables;
  tables.emplace_back("summary", std::move(summary_table));
  tables.emplace_back("auc_runs", std::move(run_table));
  tables.emplace_back("accuracy", std::move(accuracy_table));
  tables.emplace_back("trace", std::move(trace_table));
  nlohmann::json meta = detail::metadata("synth-mtl", config);
  meta["streams"] = {{"run_r", "seed / substream(r)"},
                     {"dataset", "run / substream(0)"},
                     {"training", "run / substream(1)"},
                     {"attack_trial_t", "run / substream(2 + adversary) / substream(t)"}};
  meta["summary"] = rows;
  return detail::write_outputs(dir, meta, tables, format);
}

// Labeled scores from a CSV with a `label` or `split` column (in/out) and a
// `statistic` column; other columns are ignored.
inline ScoredPopulation read_score_file(const std::filesystem::path& path, Orientation orientation) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw detail::parse_error(1, "missing header");
  detail::strip_cr(line);
  const auto header = detail::split_fields(line);
  std::ptrdiff_t label_col = -1, stat_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (header[i] == header[j])
        throw detail::parse_error(1, "duplicate column '" + std::string(header[i]) + "'");
    if (header[i] == "label" || header[i] == "split") {
      if (label_col >= 0) throw detail::parse_error(1, "both 'label' and 'split' columns present");
      label_col = static_cast<std::ptrdiff_t>(i);
    }
    if (header[i] == "statistic") stat_col = static_cast<std::ptrdiff_t>(i);
  }
  if (label_col < 0 || stat_col < 0)
    throw detail::parse_error(1, "score file needs 'label' (or 'split') and 'statistic' columns");
  ScoredPopulation pop;
  pop.orientation = orientation;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != header.size())
      throw detail::parse_error(line_no, "expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(fields.size()));
    Membership label;
    try {
      label = parse_membership(fields[static_cast<std::size_t>(label_col)]);
    } catch (const Error&) {
      throw detail::parse_error(line_no, "unknown label '" +
                                             std::string(fields[static_cast<std::size_t>(label_col)]) + "'");
    }
    pop.add(label, detail::parse_number(fields[static_cast<std::size_t>(stat_col)], line_no));
  }
  return pop;
}

// eval: metrics for an existing labeled score file.
inline nlohmann::json cmd_eval(const EvalConfig& config, std::ostream& log = std::clog) {
  config.validate();
  const ScoredPopulation pop = read_score_file(config.input, parse_orientation(config.orientation));
  detail::require(!pop.in_scores.empty() && !pop.out_scores.empty(), ErrorKind::kInsufficientData,
                  "score file needs both in and out rows");
  std::vector<std::pair<std::string, Table>> tables;
  nlohmann::json meta = detail::metadata("eval", config);
  meta["summary"] = detail::evaluate_population(pop, config.fpr, config.percentiles, tables, log);
  const auto dir = detail::prepare_output_dir(config.out);
  return detail::write_outputs(dir, meta, tables, parse_table_format(config.format));
}

}  // namespace taskprobe
