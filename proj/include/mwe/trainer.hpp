#pragma once

// Joint SGD over the feature extractor, tag classifier and language
// discriminator. One backward pass of L_y + L_lg through the gradient
// reversal node yields, per parameter group,
//   classifier:    dL_y/dθ
//   discriminator: dL_lg/dθ
//   extractor:     dL_y/dθ - λ dL_lg/dθ
// and every parameter then moves by -α times its gradient.

#include "mwe/corpus.hpp"
#include "mwe/evaluation.hpp"
#include "mwe/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mwe {

enum class LambdaSchedule { Constant, DannRamp };

const char* to_string(LambdaSchedule s);
LambdaSchedule lambda_schedule_from(const std::string& name);

struct TrainerConfig {
  double learning_rate = 0.1;
  double lambda = 1.0;
  LambdaSchedule schedule = LambdaSchedule::Constant;
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 1;
  bool shuffle = true;
  double clip_norm = 0.0;  // global gradient norm cap; 0 disables

  void validate() const;
};

/// constant: λ_max. dann_ramp: λ_max (2 / (1 + exp(-10 p)) - 1).
double lambda_at(LambdaSchedule schedule, double progress, double lambda_max);

struct StepResult {
  double tag_loss = 0.0;       // L_y, mean over the batch's tokens
  double language_loss = 0.0;  // L_lg, mean over the batch's sentences; 0 without LG
  std::size_t language_correct = 0;
  std::size_t language_total = 0;
};

struct StepOptions {
  bool reverse_gradient = true;
  bool include_tag_loss = true;
  bool include_language_loss = true;
  bool apply_update = true;  // false leaves gradients in the accumulators
};

/// Gradients are zeroed first. With apply_update, parameters are updated
/// and the gradients stay readable until the next step.
StepResult train_step(Model& model, std::span<const Sentence> batch, const TrainerConfig& config, double lambda,
                      const StepOptions& options = {});

struct EpochRecord {
  int epoch = 0;
  double lambda = 0.0;
  double tag_loss = 0.0;
  double language_loss = 0.0;
  double language_accuracy = 0.0;
  std::optional<EvalResult> dev;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  std::optional<int> best_epoch;  // by dev global F1, earliest on ties
};

struct TrainingResult {
  TrainingReport report;
  std::optional<Model> best_model;  // snapshot at best_epoch
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainingResult train(Model& model, const Corpus& train_corpus, const Corpus* dev_corpus, const TrainerConfig& config,
                     const EpochCallback& on_epoch = {});

/// Predicts every sentence and rewrites its MWE column.
Corpus tag_corpus(const Model& model, const Corpus& corpus);

/// Fraction of sentences (tokens with token pooling) whose language the
/// discriminator gets right. 0 for a model without one.
double language_accuracy(const Model& model, const Corpus& corpus);

/// One JSON object per line, one line per epoch.
std::string report_to_jsonl(const TrainingReport& report);
std::string report_summary_json(const TrainingReport& report, const TrainerConfig& config);

}  // namespace mwe
