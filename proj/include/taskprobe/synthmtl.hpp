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

// Synthetic multitask learning: a generator whose tasks share a linear
// projection but have their own labeling heads, a one-hidden-layer shared
// representation with per-task linear heads, and the multitask training loop
// (per-task logistic losses averaged over tasks, global-norm clipping,
// adaptive-moment updates with decoupled weight decay).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "taskprobe/attacks.hpp"
#include "taskprobe/error.hpp"
#include "taskprobe/game.hpp"
#include "taskprobe/numerics.hpp"

namespace taskprobe {

struct SyntheticMtlSpec {
  int in_tasks = 16;            // T; 2T tasks are generated
  int samples_per_task = 64;    // N training rows per task
  int holdout_per_task = 64;    // fresh rows per task for the weak adversary
  int dim = 32;                 // d
  int embed_dim = 16;           // k
  int hidden = 512;
  int epochs = 200;
  double step_size = 1e-3;
  double weight_decay_shared = 1e-4;
  double weight_decay_heads = 1e-3;
  double clip_norm = 1.0;
  double task_sd = 1.0;
  double sample_sd = 1.0;

  int total_tasks() const { return 2 * in_tasks; }

  void validate() const {
    using detail::require;
    require(in_tasks >= 1, ErrorKind::kConfig, "in_tasks must be at least 1");
    require(samples_per_task >= 1, ErrorKind::kConfig, "samples_per_task must be at least 1");
    require(holdout_per_task >= 1, ErrorKind::kConfig, "holdout_per_task must be at least 1");
    require(dim >= 1, ErrorKind::kConfig, "dim must be at least 1");
    require(embed_dim >= 1 && embed_dim <= dim, ErrorKind::kConfig,
            "embed_dim must satisfy 1 <= k <= d");
    require(hidden >= 1, ErrorKind::kConfig, "hidden must be at least 1");
    require(epochs >= 0, ErrorKind::kConfig, "epochs must be nonnegative");
    require(step_size >= 0.0 && std::isfinite(step_size), ErrorKind::kConfig,
            "step_size must be nonnegative");
    require(weight_decay_shared >= 0.0 && weight_decay_heads >= 0.0, ErrorKind::kConfig,
            "weight decay must be nonnegative");
    require(clip_norm > 0.0, ErrorKind::kConfig, "clip_norm must be positive");
    require(task_sd > 0.0 && sample_sd > 0.0, ErrorKind::kConfig, "noise scales must be positive");
  }
};

struct SyntheticTaskData {
  std::string task_id;
  Membership membership = Membership::kIn;
  Matrix train_inputs;     // N x d
  Matrix holdout_inputs;   // N_holdout x d
  Vector train_labels;     // entries in {-1, +1}
  Vector holdout_labels;
  Vector true_head;        // g_i, length k
  Vector task_mean;        // mu_i, length d
};

struct SyntheticDataset {
  Matrix projection;  // H, k x d
  std::vector<SyntheticTaskData> tasks;  // first T are In, the rest Out

  std::span<const SyntheticTaskData> in_tasks() const {
    const auto it = std::find_if(tasks.begin(), tasks.end(),
                                 [](const auto& t) { return t.membership == Membership::kOut; });
    return {tasks.data(), static_cast<std::size_t>(it - tasks.begin())};
  }
};

inline constexpr int kMaxHeadResamples = 100;

namespace detail {

inline double label_margin(const Vector& head, const Matrix& projection, const Eigen::VectorXd& x) {
  return head.dot(projection * x);
}

// Draws rows from N(mean, sd^2 I) and labels them by sign(<head, H x>),
// redrawing any row that lands exactly on the decision boundary.
inline void draw_labeled_rows(const Vector& mean, double sd, int n, const Vector& head,
                              const Matrix& projection, SeededRng& rng, Matrix& rows,
                              Vector& labels) {
  rows.resize(n, mean.size());
  labels.resize(n);
  for (int i = 0; i < n; ++i) {
    for (;;) {
      const Vector x = gaussian_vector(mean, sd, rng);
      const double margin = label_margin(head, projection, x);
      if (margin == 0.0) continue;
      rows.row(i) = x.transpose();
      labels[i] = margin > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
}

inline Vector relabel(const Vector& head, const Matrix& projection, const Matrix& rows) {
  const Vector margins = rows * (projection.transpose() * head);
  return margins.unaryExpr([](double m) { return m > 0.0 ? 1.0 : -1.0; });
}

inline bool single_class(const Vector& labels) {
  return labels.size() == 0 || labels.cwiseAbs().sum() == std::abs(labels.sum());
}

}  // namespace detail

// 2T tasks: mu_i ~ N(0, task_sd^2 I), rows ~ N(mu_i, sample_sd^2 I), one
// shared H with N(0, 1/d) entries, heads g_i ~ N(0, I_k) and labels
// sign(<g_i, H x>). A head whose training labels come out single-class is
// redrawn (up to kMaxHeadResamples times).
inline SyntheticDataset generate_dataset(const SyntheticMtlSpec& spec, const SeededRng& rng) {
  spec.validate();
  SyntheticDataset data;
  SeededRng projection_rng = rng.substream(0);
  data.projection =
      detail::gaussian_rows(Vector::Zero(spec.dim), 1.0 / std::sqrt(static_cast<double>(spec.dim)),
                            static_cast<std::size_t>(spec.embed_dim), projection_rng);
  const int total = spec.total_tasks();
  data.tasks.resize(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    SeededRng task_rng = rng.substream(1 + static_cast<std::uint64_t>(i));
    SyntheticTaskData& task = data.tasks[static_cast<std::size_t>(i)];
    task.task_id = "task_" + std::to_string(i);
    task.membership = i < spec.in_tasks ? Membership::kIn : Membership::kOut;
    task.task_mean = detail::gaussian_vector(Vector::Zero(spec.dim), spec.task_sd, task_rng);
    for (int attempt = 0; attempt < kMaxHeadResamples; ++attempt) {
      task.true_head = detail::gaussian_vector(Vector::Zero(spec.embed_dim), 1.0, task_rng);
      detail::draw_labeled_rows(task.task_mean, spec.sample_sd, spec.samples_per_task,
                                task.true_head, data.projection, task_rng, task.train_inputs,
                                task.train_labels);
      if (!detail::single_class(task.train_labels)) break;
    }
    detail::draw_labeled_rows(task.task_mean, spec.sample_sd, spec.holdout_per_task,
                              task.true_head, data.projection, task_rng, task.holdout_inputs,
                              task.holdout_labels);
  }
  return data;
}

// Recomputes labels from (H, g_i, x); used to audit stored datasets.
inline bool labels_consistent(const SyntheticDataset& data) {
  for (const auto& t : data.tasks) {
    if (detail::relabel(t.true_head, data.projection, t.train_inputs) != t.train_labels) return false;
    if (detail::relabel(t.true_head, data.projection, t.holdout_inputs) != t.holdout_labels)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Model

struct MtlParameters {
  Matrix layer1_weights;  // hidden x d
  Vector layer1_bias;     // hidden
  Matrix projection;      // k x hidden
  Matrix heads;           // T x k, row j is task j's head

  static MtlParameters zeros_like(const MtlParameters& p) {
    return {Matrix::Zero(p.layer1_weights.rows(), p.layer1_weights.cols()),
            Vector::Zero(p.layer1_bias.size()),
            Matrix::Zero(p.projection.rows(), p.projection.cols()),
            Matrix::Zero(p.heads.rows(), p.heads.cols())};
  }

  static MtlParameters zeros(int dim, int hidden, int embed_dim, int tasks) {
    return {Matrix::Zero(hidden, dim), Vector::Zero(hidden), Matrix::Zero(embed_dim, hidden),
            Matrix::Zero(tasks, embed_dim)};
  }

  double squared_norm() const {
    return layer1_weights.squaredNorm() + layer1_bias.squaredNorm() + projection.squaredNorm() +
           heads.squaredNorm();
  }

  bool all_finite() const {
    return layer1_weights.allFinite() && layer1_bias.allFinite() && projection.allFinite() &&
           heads.allFinite();
  }

  int dim() const { return static_cast<int>(layer1_weights.cols()); }
  int hidden() const { return static_cast<int>(layer1_weights.rows()); }
  int embed_dim() const { return static_cast<int>(projection.rows()); }
  int task_count() const { return static_cast<int>(heads.rows()); }
};

// First/second moment estimates with the same layout as the parameters.
struct AdamState {
  MtlParameters first;
  MtlParameters second;
  long step = 0;
};

struct MtlModel {
  MtlParameters params;
  AdamState optimizer;
};

inline MtlModel make_model(MtlParameters params) {
  MtlModel model;
  model.optimizer.first = MtlParameters::zeros_like(params);
  model.optimizer.second = MtlParameters::zeros_like(params);
  model.params = std::move(params);
  return model;
}

// He-scaled first layer, zero bias, 1/fan-in scaled projection and heads.
inline MtlModel init_model(const SyntheticMtlSpec& spec, const SeededRng& rng) {
  spec.validate();
  SeededRng r = rng;
  MtlParameters p;
  p.layer1_weights = detail::gaussian_rows(Vector::Zero(spec.dim), std::sqrt(2.0 / spec.dim),
                                           static_cast<std::size_t>(spec.hidden), r);
  p.layer1_bias = Vector::Zero(spec.hidden);
  p.projection = detail::gaussian_rows(Vector::Zero(spec.hidden), std::sqrt(1.0 / spec.hidden),
                                       static_cast<std::size_t>(spec.embed_dim), r);
  p.heads = detail::gaussian_rows(Vector::Zero(spec.embed_dim), std::sqrt(1.0 / spec.embed_dim),
                                  static_cast<std::size_t>(spec.in_tasks), r);
  return make_model(std::move(p));
}

struct ForwardResult {
  Vector embedding;
  double logit = 0.0;
};

// Shared representation h(x) = P relu(W1 x + b1) for a batch (rows).
inline Matrix embed(const MtlParameters& p, const Matrix& inputs) {
  detail::require(inputs.cols() == p.dim(), ErrorKind::kDimension,
                  "input dimension does not match the model");
  const Matrix hidden =
      ((inputs * p.layer1_weights.transpose()).rowwise() + p.layer1_bias.transpose()).cwiseMax(0.0);
  return hidden * p.projection.transpose();
}

inline ForwardResult forward(const MtlModel& model, const Vector& x, int task) {
  const auto& p = model.params;
  detail::require(task >= 0 && task < p.task_count(), ErrorKind::kParameter,
                  "task index " + std::to_string(task) + " out of range");
  detail::require(x.size() == p.dim(), ErrorKind::kDimension, "input dimension does not match");
  const Vector hidden = (p.layer1_weights * x + p.layer1_bias).cwiseMax(0.0);
  ForwardResult out;
  out.embedding = p.projection * hidden;
  out.logit = p.heads.row(task).dot(out.embedding);
  return out;
}

// log(1 + exp(-m)), stable for large |m|.
inline double logistic_loss(double margin) {
  return std::max(-margin, 0.0) + std::log1p(std::exp(-std::abs(margin)));
}

// Training rows and labels for one head.
struct TaskBatch {
  const Matrix* inputs = nullptr;
  const Vector* labels = nullptr;
};

struct LossAndGradient {
  double loss = 0.0;
  MtlParameters gradient;
};

// Multitask loss (1/T) sum_j mean_i logistic(y_ij * logit_ij) and its
// gradient. Head j only receives gradient from batch j; the shared layers
// receive gradient from every batch.
inline LossAndGradient multitask_loss_and_gradient(const MtlParameters& p,
                                                   std::span<const TaskBatch> batches) {
  detail::require(static_cast<int>(batches.size()) == p.task_count(), ErrorKind::kDimension,
                  "one batch per head required");
  LossAndGradient out{0.0, MtlParameters::zeros_like(p)};
  const double task_weight = 1.0 / static_cast<double>(batches.size());
  for (std::size_t j = 0; j < batches.size(); ++j) {
    const Matrix& x = *batches[j].inputs;
    const Vector& y = *batches[j].labels;
    detail::require(x.cols() == p.dim() && x.rows() == y.size() && x.rows() >= 1,
                    ErrorKind::kDimension, "batch shape does not match the model");
    const auto head = static_cast<Eigen::Index>(j);
    const Matrix pre = (x * p.layer1_weights.transpose()).rowwise() + p.layer1_bias.transpose();
    const Matrix act = pre.cwiseMax(0.0);
    const Matrix emb = act * p.projection.transpose();
    const Vector logits = emb * p.heads.row(head).transpose();

    const double w = task_weight / static_cast<double>(x.rows());
    Vector d_logit(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double m = y[i] * logits[i];
      out.loss += w * logistic_loss(m);
      // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
      const double s = m >= 0.0 ? std::exp(-m) / (1.0 + std::exp(-m)) : 1.0 / (1.0 + std::exp(m));
      d_logit[i] = -w * y[i] * s;
    }
    out.gradient.heads.row(head) = (emb.transpose() * d_logit).transpose();
    const Matrix d_emb = d_logit * p.heads.row(head);
    out.gradient.projection.noalias() += d_emb.transpose() * act;
    const Matrix d_pre = (d_emb * p.projection).cwiseProduct(
        (pre.array() > 0.0).cast<double>().matrix());
    out.gradient.layer1_weights.noalias() += d_pre.transpose() * x;
    out.gradient.layer1_bias += d_pre.colwise().sum().transpose();
  }
  return out;
}

// Scales the gradient so its global L2 norm is at most max_norm. Returns the
// pre-clip norm.
inline double clip_global_norm(MtlParameters& g, double max_norm) {
  const double norm = std::sqrt(g.squared_norm());
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    g.layer1_weights *= scale;
    g.layer1_bias *= scale;
    g.projection *= scale;
    g.heads *= scale;
  }
  return norm;
}

struct AdamHyper {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay_shared = 0.0;
  double weight_decay_heads = 0.0;
};

namespace detail {

template <typename Param>
void adamw_update(Param& param, const Param& grad, Param& m, Param& v, double decay,
                  double bias1, double bias2, const AdamHyper& h) {
  m = h.beta1 * m + (1.0 - h.beta1) * grad;
  v = h.beta2 * v + (1.0 - h.beta2) * grad.cwiseProduct(grad);
  const auto step = (m.array() / bias1) / ((v.array() / bias2).sqrt() + h.epsilon);
  // Decay uses the pre-update value and is not scaled by the step size.
  param = (param.array() - h.step_size * step - decay * param.array()).matrix();
}

}  // namespace detail

// theta <- theta - step * m_hat / (sqrt(v_hat) + eps) - decay * theta, with
// separate decay coefficients for the shared layers and the heads.
inline void adamw_step(MtlModel& model, const MtlParameters& grad, const AdamHyper& h) {
  auto& s = model.optimizer;
  ++s.step;
  const double bias1 = 1.0 - std::pow(h.beta1, static_cast<double>(s.step));
  const double bias2 = 1.0 - std::pow(h.beta2, static_cast<double>(s.step));
  auto& p = model.params;
  detail::adamw_update(p.layer1_weights, grad.layer1_weights, s.first.layer1_weights,
                       s.second.layer1_weights, h.weight_decay_shared, bias1, bias2, h);
  detail::adamw_update(p.layer1_bias, grad.layer1_bias, s.first.layer1_bias,
                       s.second.layer1_bias, h.weight_decay_shared, bias1, bias2, h);
  detail::adamw_update(p.projection, grad.projection, s.first.projection, s.second.projection,
                       h.weight_decay_shared, bias1, bias2, h);
  detail::adamw_update(p.heads, grad.heads, s.first.heads, s.second.heads, h.weight_decay_heads,
                       bias1, bias2, h);
}

inline AdamHyper adam_hyper(const SyntheticMtlSpec& spec) {
  AdamHyper h;
  h.step_size = spec.step_size;
  h.weight_decay_shared = spec.weight_decay_shared;
  h.weight_decay_heads = spec.weight_decay_heads;
  return h;
}

struct EpochRecord {
  int epoch = 0;
  double mean_train_loss = 0.0;
  double mean_holdout_loss_in_tasks = 0.0;
  double zero_shot_loss_out_tasks = 0.0;
};

struct TrainingTrace {
  std::vector<EpochRecord> epochs;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, TrainingTrace trace)
      : Error(ErrorKind::kDivergence, what), trace_(std::move(trace)) {}
  const TrainingTrace& trace() const noexcept { return trace_; }

 private:
  TrainingTrace trace_;
};

inline std::vector<TaskBatch> training_batches(std::span<const SyntheticTaskData> in_tasks) {
  std::vector<TaskBatch> batches;
  batches.reserve(in_tasks.size());
  for (const auto& t : in_tasks) batches.push_back({&t.train_inputs, &t.train_labels});
  return batches;
}

struct StepResult {
  double loss = 0.0;
  double gradient_norm = 0.0;
};

// One full-batch round over the In tasks: loss, gradient, clip, update.
inline StepResult mtl_train_epoch(MtlModel& model, std::span<const SyntheticTaskData> in_tasks,
                                  const SyntheticMtlSpec& spec) {
  const auto batches = training_batches(in_tasks);
  LossAndGradient lg = multitask_loss_and_gradient(model.params, batches);
  if (!std::isfinite(lg.loss) || !lg.gradient.all_finite())
    throw Error(ErrorKind::kDivergence, "non-finite multitask loss");
  StepResult result{lg.loss, clip_global_norm(lg.gradient, spec.clip_norm)};
  adamw_step(model, lg.gradient, adam_hyper(spec));
  if (!model.params.all_finite()) throw Error(ErrorKind::kDivergence, "non-finite parameters");
  return result;
}

// Mean logistic loss of head `task` on (inputs, labels).
inline double task_loss(const MtlParameters& p, int task, const Matrix& inputs,
                        const Vector& labels) {
  const Vector logits = embed(p, inputs) * p.heads.row(task).transpose();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += logistic_loss(labels[i] * logits[i]);
  return sum / static_cast<double>(logits.size());
}

inline constexpr int kZeroShotHeads = 16;

// Loss on an excluded task when predicting with the average logit of a fixed
// set of trained heads.
inline double zero_shot_loss(const MtlParameters& p, std::span<const int> heads,
                             const Matrix& inputs, const Vector& labels) {
  Vector mean_head = Vector::Zero(p.embed_dim());
  for (int h : heads) mean_head += p.heads.row(h).transpose();
  mean_head /= static_cast<double>(heads.size());
  const Vector logits = embed(p, inputs) * mean_head;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) sum += logistic_loss(labels[i] * logits[i]);
  return sum / static_cast<double>(logits.size());
}

// Fraction of rows whose predicted sign matches the label, averaged over
// the In tasks' training splits.
inline double train_accuracy(const MtlModel& model, std::span<const SyntheticTaskData> in_tasks) {
  double acc = 0.0;
  for (std::size_t j = 0; j < in_tasks.size(); ++j) {
    const auto& t = in_tasks[j];
    const Vector logits =
        embed(model.params, t.train_inputs) * model.params.heads.row(static_cast<Eigen::Index>(j)).transpose();
    int correct = 0;
    for (Eigen::Index i = 0; i < logits.size(); ++i)
      correct += (logits[i] > 0.0 ? 1.0 : -1.0) == t.train_labels[i] ? 1 : 0;
    acc += static_cast<double>(correct) / static_cast<double>(logits.size());
  }
  return acc / static_cast<double>(in_tasks.size());
}

struct TrainedModel {
  MtlModel model;
  TrainingTrace trace;
};

// Stream ids under a training run's stream.
inline constexpr std::uint64_t kInitStream = 0;
inline constexpr std::uint64_t kZeroShotStream = 1;

// Runs spec.epochs rounds of multitask training on the dataset's In tasks.
// Each epoch record holds the training loss of that round and the post-update
// holdout and zero-shot losses.
inline TrainedModel train(const SyntheticMtlSpec& spec, const SyntheticDataset& data,
                          const SeededRng& rng) {
  spec.validate();
  const auto in_tasks = data.in_tasks();
  detail::require(static_cast<int>(in_tasks.size()) == spec.in_tasks, ErrorKind::kDimension,
                  "dataset In task count does not match the training setup");
  TrainedModel out{init_model(spec, rng.substream(kInitStream)), {}};

  std::vector<int> zero_shot_heads(in_tasks.size());
  std::iota(zero_shot_heads.begin(), zero_shot_heads.end(), 0);
  SeededRng pick = rng.substream(kZeroShotStream);
  std::shuffle(zero_shot_heads.begin(), zero_shot_heads.end(), pick.engine());
  zero_shot_heads.resize(std::min<std::size_t>(zero_shot_heads.size(), kZeroShotHeads));

  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    StepResult step;
    try {
      step = mtl_train_epoch(out.model, in_tasks, spec);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDivergence) throw;
      throw DivergenceError("epoch " + std::to_string(epoch) + ": " + e.what(), out.trace);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_train_loss = step.loss;
    double holdout = 0.0;
    for (std::size_t j = 0; j < in_tasks.size(); ++j)
      holdout += task_loss(out.model.params, static_cast<int>(j), in_tasks[j].holdout_inputs,
                           in_tasks[j].holdout_labels);
    rec.mean_holdout_loss_in_tasks = holdout / static_cast<double>(in_tasks.size());
    double zero_shot = 0.0;
    int out_count = 0;
    for (const auto& t : data.tasks) {
      if (t.membership != Membership::kOut) continue;
      zero_shot += zero_shot_loss(out.model.params, zero_shot_heads, t.holdout_inputs,
                                  t.holdout_labels);
      ++out_count;
    }
    rec.zero_shot_loss_out_tasks = out_count > 0 ? zero_shot / out_count : 0.0;
    out.trace.epochs.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embedding emission

enum class EmbeddingSource { kTrainSplit, kHoldoutSplit };

// Embeds `per_task` rows, chosen without replacement from the given split, of
// every task in the dataset. Out tasks were never trained on, so either split
// is fresh for them.
inline std::vector<EmbeddingSet> emit_embeddings(const MtlModel& model, const SyntheticDataset& data,
                                                 int per_task, EmbeddingSource source,
                                                 const SeededRng& rng) {
  std::vector<EmbeddingSet> sets;
  sets.reserve(data.tasks.size());
  for (std::size_t i = 0; i < data.tasks.size(); ++i) {
    const auto& t = data.tasks[i];
    const Matrix& rows = source == EmbeddingSource::kTrainSplit ? t.train_inputs : t.holdout_inputs;
    detail::require(per_task >= 1 && per_task <= rows.rows(), ErrorKind::kParameter,
                    "per_task " + std::to_string(per_task) + " exceeds the " +
                        std::to_string(rows.rows()) + " rows available in task '" + t.task_id + "'");
    SeededRng pick = rng.substream(i);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(rows.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (int s = 0; s < per_task; ++s) {
      const auto j = static_cast<std::size_t>(s) +
                     static_cast<std::size_t>(pick.below(order.size() - static_cast<std::size_t>(s)));
      std::swap(order[static_cast<std::size_t>(s)], order[j]);
    }
    Matrix chosen(per_task, rows.cols());
    for (int s = 0; s < per_task; ++s) chosen.row(s) = rows.row(order[static_cast<std::size_t>(s)]);
    sets.push_back({t.task_id, embed(model.params, chosen), t.membership});
  }
  return sets;
}

}  // namespace taskprobe
