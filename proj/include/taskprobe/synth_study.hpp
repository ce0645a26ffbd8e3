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

// End-to-end synthetic study: generate, train, then attack the trained
// representation repeatedly as a strong and as a weak adversary.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taskprobe/attacks.hpp"
#include "taskprobe/eval.hpp"
#include "taskprobe/synthmtl.hpp"
#include "taskprobe/tracing.hpp"

namespace taskprobe {

inline EmbeddingSource embedding_source(Adversary adversary) {
  return adversary == Adversary::kStrong ? EmbeddingSource::kTrainSplit
                                         : EmbeddingSource::kHoldoutSplit;
}

struct SyntheticStudyOptions {
  int runs = 4;
  int trials = 64;
  int per_task = 8;
  double lambda = kDefaultWhiteningLambda;
  Orientation variance_orientation = Orientation::kHigherIsIn;
  Orientation inner_product_orientation = Orientation::kHigherIsIn;
  // Keep each run's dataset, trained model and first-trial embeddings.
  bool keep_artifacts = false;
  unsigned threads = worker_count();
};

struct StudyCell {
  AttackKind attack = AttackKind::kVariance;
  Adversary adversary = Adversary::kStrong;
  std::vector<double> run_auc;

  double mean_auc() const {
    double s = 0.0;
    for (double a : run_auc) s += a;
    return run_auc.empty() ? 0.0 : s / static_cast<double>(run_auc.size());
  }
};

struct RunSummary {
  int run = 0;
  double final_train_accuracy = 0.0;
  TrainingTrace trace;
  std::optional<SyntheticDataset> dataset;
  std::optional<MtlModel> model;
  std::vector<EmbeddingSet> strong_example;  // first trial, strong adversary
  std::vector<EmbeddingSet> weak_example;
};

struct SyntheticStudyResult {
  // Order: (variance, strong), (variance, weak), (inner-product, strong),
  // (inner-product, weak).
  std::vector<StudyCell> cells;
  std::vector<RunSummary> runs;

  const StudyCell& cell(AttackKind attack, Adversary adversary) const {
    for (const auto& c : cells)
      if (c.attack == attack && c.adversary == adversary) return c;
    throw Error(ErrorKind::kParameter, "no such study cell");
  }
};

inline constexpr AttackKind kStudyAttacks[] = {AttackKind::kVariance, AttackKind::kInnerProduct};
inline constexpr Adversary kStudyAdversaries[] = {Adversary::kStrong, Adversary::kWeak};

// Stream ids under a run's stream.
inline constexpr std::uint64_t kDatasetStream = 0;
inline constexpr std::uint64_t kTrainStream = 1;
inline constexpr std::uint64_t kAttackStreamBase = 2;  // + adversary index

inline SyntheticStudyResult run_synthetic_study(const SyntheticMtlSpec& spec,
                                                const SyntheticStudyOptions& options,
                                                const SeededRng& rng) {
  spec.validate();
  detail::require(options.runs >= 1 && options.trials >= 1, ErrorKind::kConfig,
                  "runs and trials must be at least 1");
  detail::require(options.per_task >= 2, ErrorKind::kConfig, "per_task must be at least 2");

  constexpr std::size_t kCells = 4;
  std::vector<std::vector<double>> auc(options.runs, std::vector<double>(kCells));
  SyntheticStudyResult result;
  result.runs.resize(static_cast<std::size_t>(options.runs));

  parallel_for(static_cast<std::size_t>(options.runs), [&](std::size_t r) {
    const SeededRng run_rng = rng.substream(r);
    const SyntheticDataset data = generate_dataset(spec, run_rng.substream(kDatasetStream));
    const TrainedModel trained = train(spec, data, run_rng.substream(kTrainStream));
    RunSummary& summary = result.runs[r];
    summary.run = static_cast<int>(r);
    summary.final_train_accuracy = train_accuracy(trained.model, data.in_tasks());
    summary.trace = trained.trace;
    if (options.keep_artifacts) {
      summary.dataset = data;
      summary.model = trained.model;
    }

    for (std::size_t a = 0; a < 2; ++a) {
      const Adversary adversary = kStudyAdversaries[a];
      const SeededRng attack_rng = run_rng.substream(kAttackStreamBase + a);
      ScoredPopulation var_pop, ip_pop;
      var_pop.orientation = options.variance_orientation;
      ip_pop.orientation = options.inner_product_orientation;
      for (int t = 0; t < options.trials; ++t) {
        const auto sets = emit_embeddings(trained.model, data, options.per_task,
                                          embedding_source(adversary),
                                          attack_rng.substream(static_cast<std::uint64_t>(t)));
        if (options.keep_artifacts && t == 0)
          (adversary == Adversary::kStrong ? summary.strong_example : summary.weak_example) = sets;
        AttackStudyOptions var_opts;
        var_opts.attack = AttackKind::kVariance;
        for (const auto& s : run_attack_study(sets, var_opts)) var_pop.add(*s.label, s.statistic);
        AttackStudyOptions ip_opts;
        ip_opts.attack = AttackKind::kInnerProduct;
        ip_opts.lambda = options.lambda;
        for (const auto& s : run_attack_study(sets, ip_opts)) ip_pop.add(*s.label, s.statistic);
      }
      auc[r][a] = roc(var_pop).auc;
      auc[r][2 + a] = roc(ip_pop).auc;
    }
  }, options.threads);

  for (std::size_t c = 0; c < kCells; ++c) {
    StudyCell cell;
    cell.attack = kStudyAttacks[c / 2];
    cell.adversary = kStudyAdversaries[c % 2];
    for (int r = 0; r < options.runs; ++r) cell.run_auc.push_back(auc[r][c]);
    result.cells.push_back(cell);
  }
  return result;
}

}  // namespace taskprobe
