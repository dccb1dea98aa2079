#include "mwe/trainer.hpp"

#include "mwe/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mwe {

const char* to_string(LambdaSchedule s) { return s == LambdaSchedule::Constant ? "constant" : "dann_ramp"; }

LambdaSchedule lambda_schedule_from(const std::string& name) {
  if (name == "constant") return LambdaSchedule::Constant;
  if (name == "dann_ramp") return LambdaSchedule::DannRamp;
  throw std::invalid_argument("unknown lambda schedule '" + name + "'");
}

void TrainerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (clip_norm < 0.0) throw std::invalid_argument("clip norm must be >= 0");
}

double lambda_at(LambdaSchedule schedule, double progress, double lambda_max) {
  if (!(progress >= 0.0 && progress <= 1.0)) throw std::invalid_argument("progress must lie in [0, 1]");
  if (schedule == LambdaSchedule::Constant) return lambda_max;
  return lambda_max * (2.0 / (1.0 + std::exp(-10.0 * progress)) - 1.0);
}

StepResult train_step(Model& model, std::span<const Sentence> batch, const TrainerConfig& config, double lambda,
                      const StepOptions& options) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const bool adversarial = model.config().use_adversarial;
  for (auto* p : model.parameters()) p->zero_grad();

  ad::Tape tape;
  const auto bound = model.bind(tape);
  const ForwardOptions fwd{lambda, options.reverse_gradient};

  StepResult result;
  std::size_t total_tokens = 0;
  std::optional<ad::Var> tag_sum;
  std::optional<ad::Var> lang_sum;
  for (const auto& s : batch) {
    const auto labels = model.gold_tag_ids(s);
    const int lang = adversarial ? model.language_id(s.language) : 0;
    const auto out = model.forward(bound, s, fwd);

    const auto n = static_cast<double>(s.tokens.size());
    total_tokens += s.tokens.size();
    const auto tag_term = ad::scale(ad::softmax_cross_entropy(out.tag_logits, labels), n);
    tag_sum = tag_sum ? ad::add(*tag_sum, tag_term) : tag_term;

    if (out.has_language) {
      const std::vector<int> lang_labels(static_cast<std::size_t>(out.language_logits.rows()), lang);
      const auto lang_term = ad::softmax_cross_entropy(out.language_logits, lang_labels);
      lang_sum = lang_sum ? ad::add(*lang_sum, lang_term) : lang_term;
      for (int guess : argmax_rows(out.language_logits.value())) result.language_correct += guess == lang ? 1 : 0;
      result.language_total += lang_labels.size();
    }
  }

  const auto tag_loss = ad::scale(*tag_sum, 1.0 / static_cast<double>(total_tokens));
  result.tag_loss = tag_loss.scalar();
  std::optional<ad::Var> objective;
  if (options.include_tag_loss) objective = tag_loss;
  if (lang_sum) {
    const auto lang_loss = ad::scale(*lang_sum, 1.0 / static_cast<double>(batch.size()));
    result.language_loss = lang_loss.scalar();
    if (options.include_language_loss) objective = objective ? ad::add(*objective, lang_loss) : lang_loss;
  }
  if (!objective) return result;
  tape.backward(*objective);

  if (config.clip_norm > 0.0) {
    double sq = 0.0;
    for (auto* p : model.parameters()) sq += p->grad().squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > config.clip_norm) {
      for (auto* p : model.parameters()) p->grad() *= config.clip_norm / norm;
    }
  }
  if (options.apply_update) {
    for (auto* p : model.parameters()) p->value() -= config.learning_rate * p->grad();
  }
  return result;
}

Corpus tag_corpus(const Model& model, const Corpus& corpus) {
  Corpus out;
  out.source_files = corpus.source_files;
  out.sentences.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    const auto tags = model.predict_tags(s);
    const auto instances = decode_tags(tags);
    out.sentences.push_back(with_mwes(s, instances));
  }
  return out;
}

double language_accuracy(const Model& model, const Corpus& corpus) {
  if (!model.config().use_adversarial) return 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& s : corpus.sentences) {
    ad::Tape tape;
    const auto out = model.forward(model.bind_frozen(tape), s, {});
    const int lang = model.language_id(s.language);
    for (int guess : argmax_rows(out.language_logits.value())) {
      correct += guess == lang ? 1 : 0;
      ++total;
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

TrainingResult train(Model& model, const Corpus& train_corpus, const Corpus* dev_corpus, const TrainerConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate();
  if (train_corpus.sentences.empty()) throw std::invalid_argument("empty training corpus");

  Rng rng(config.seed);
  std::vector<std::size_t> order(train_corpus.sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  const std::size_t batches_per_epoch = (order.size() + batch_size - 1) / batch_size;
  const std::size_t total_steps = batches_per_epoch * static_cast<std::size_t>(config.epochs);
  const auto seen = dev_corpus ? unseen_keys(train_corpus) : std::set<LemmaKey>{};

  TrainingResult result;
  double best_f1 = -1.0;
  std::size_t step = 0;
  std::vector<Sentence> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    EpochRecord record;
    record.epoch = epoch;
    std::size_t tokens = 0;
    std::size_t sentences = 0;
    std::size_t correct = 0;
    std::size_t judged = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      std::size_t batch_tokens = 0;
      for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
        batch.push_back(train_corpus.sentences[order[i]]);
        batch_tokens += batch.back().tokens.size();
      }
      const double progress = total_steps > 1 ? static_cast<double>(step) / static_cast<double>(total_steps - 1) : 1.0;
      const double lambda = lambda_at(config.schedule, progress, config.lambda);
      const auto r = train_step(model, batch, config, lambda);
      record.lambda = lambda;
      record.tag_loss += r.tag_loss * static_cast<double>(batch_tokens);
      record.language_loss += r.language_loss * static_cast<double>(batch.size());
      tokens += batch_tokens;
      sentences += batch.size();
      correct += r.language_correct;
      judged += r.language_total;
      ++step;
    }
    record.tag_loss /= static_cast<double>(tokens);
    record.language_loss /= static_cast<double>(sentences);
    record.language_accuracy = judged ? static_cast<double>(correct) / static_cast<double>(judged) : 0.0;

    if (dev_corpus) {
      record.dev = evaluate(*dev_corpus, tag_corpus(model, *dev_corpus), seen);
      if (record.dev->global.f1 > best_f1) {
        best_f1 = record.dev->global.f1;
        result.report.best_epoch = epoch;
        result.best_model = model;
      }
    }
    if (on_epoch) on_epoch(record);
    result.report.epochs.push_back(std::move(record));
  }
  return result;
}

namespace {

nlohmann::json scores_json(const MatchCounts& c, const Scores& s) {
  return {{"gold", c.gold}, {"predicted", c.predicted}, {"true_positive", c.true_positive},
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::json epoch_json(const EpochRecord& r) {
  nlohmann::json j{{"epoch", r.epoch},
                   {"lambda", r.lambda},
                   {"tag_loss", r.tag_loss},
                   {"language_loss", r.language_loss},
                   {"language_accuracy", r.language_accuracy}};
  if (r.dev) {
    j["dev"] = {{"global", scores_json(r.dev->global_counts, r.dev->global)},
                {"unseen", scores_json(r.dev->unseen_counts, r.dev->unseen)}};
  }
  return j;
}

}  // namespace

std::string report_to_jsonl(const TrainingReport& report) {
  std::string out;
  for (const auto& r : report.epochs) out += epoch_json(r).dump() + "\n";
  return out;
}

std::string report_summary_json(const TrainingReport& report, const TrainerConfig& config) {
  nlohmann::json j{{"epochs", report.epochs.size()},
                   {"learning_rate", config.learning_rate},
                   {"lambda", config.lambda},
                   {"lambda_schedule", to_string(config.schedule)},
                   {"seed", config.seed}};
  if (!report.epochs.empty()) j["final"] = epoch_json(report.epochs.back());
  j["best_epoch"] = report.best_epoch ? nlohmann::json(*report.best_epoch) : nlohmann::json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace mwe
