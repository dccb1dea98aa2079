#pragma once

// MWE-based scoring: a predicted expression is correct only when its token
// set equals a gold expression's token set. "Unseen" scores restrict both
// sides to expressions whose lemma key never occurs annotated in training.

#include "mwe/corpus.hpp"

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mwe {

enum class CategoryMode { Insensitive, Sensitive };

struct MatchCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t true_positive = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    gold += o.gold;
    predicted += o.predicted;
    true_positive += o.true_positive;
    return *this;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

/// Percentages, full precision.
struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 2PR / (P + R), or 0 when P + R = 0.
double f1_score(double precision, double recall);
Scores scores_from_counts(const MatchCounts& counts);

/// Half-up rounding for presentation.
double round_half_up(double value, int decimals = 2);
std::string format_percent(double value);

struct EvalResult {
  MatchCounts global_counts;
  MatchCounts unseen_counts;
  Scores global;
  Scores unseen;
};

class EvaluationError : public std::runtime_error {
 public:
  enum class Kind { AlignmentMismatch, TokenizationMismatch };
  EvaluationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SentenceMatch {
  std::vector<MweInstance> gold;
  std::vector<MweInstance> predicted;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gold index, predicted index)
};

SentenceMatch match_mwes(const Sentence& gold, const Sentence& pred, CategoryMode mode = CategoryMode::Insensitive);

EvalResult evaluate(const Corpus& gold, const Corpus& pred, const std::set<LemmaKey>& seen_keys,
                    CategoryMode mode = CategoryMode::Insensitive);
EvalResult evaluate(const Corpus& gold, const Corpus& pred, const Corpus& train,
                    CategoryMode mode = CategoryMode::Insensitive);

/// Two-row table in the Global MWE / Unseen MWE layout.
std::string format_result_table(const std::string& system, const EvalResult& result);

}  // namespace mwe
