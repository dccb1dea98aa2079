#include "mwe/evaluation.hpp"

#include <cmath>
#include <cstdio>

namespace mwe {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Scores scores_from_counts(const MatchCounts& c) {
  Scores s;
  s.precision = c.predicted ? 100.0 * static_cast<double>(c.true_positive) / static_cast<double>(c.predicted) : 0.0;
  s.recall = c.gold ? 100.0 * static_cast<double>(c.true_positive) / static_cast<double>(c.gold) : 0.0;
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

double round_half_up(double value, int decimals) {
  // The small nudge makes decimal ties such as 2.675, stored just below
  // the tie in binary, round up as written.
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5 + 1e-9) / scale + 0.0;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_up(value, 2));
  return buf;
}

SentenceMatch match_mwes(const Sentence& gold, const Sentence& pred, CategoryMode mode) {
  if (gold.tokens.size() != pred.tokens.size()) {
    throw EvaluationError(EvaluationError::Kind::TokenizationMismatch,
                          "sentence '" + gold.sent_id + "': " + std::to_string(gold.tokens.size()) + " gold tokens vs " +
                              std::to_string(pred.tokens.size()) + " predicted");
  }
  for (std::size_t i = 0; i < gold.tokens.size(); ++i) {
    if (gold.tokens[i].form != pred.tokens[i].form) {
      throw EvaluationError(EvaluationError::Kind::TokenizationMismatch,
                            "sentence '" + gold.sent_id + "': token " + std::to_string(i + 1) + " is '" +
                                gold.tokens[i].form + "' in gold but '" + pred.tokens[i].form + "' in prediction");
    }
  }

  SentenceMatch m{extract_mwes(gold), extract_mwes(pred), {}};
  std::vector<bool> gold_used(m.gold.size(), false);
  for (std::size_t p = 0; p < m.predicted.size(); ++p) {
    for (std::size_t g = 0; g < m.gold.size(); ++g) {
      if (gold_used[g] || m.gold[g].token_indices != m.predicted[p].token_indices) continue;
      if (mode == CategoryMode::Sensitive && !(m.gold[g].category == m.predicted[p].category)) continue;
      gold_used[g] = true;
      m.pairs.emplace_back(g, p);
      break;
    }
  }
  return m;
}

EvalResult evaluate(const Corpus& gold, const Corpus& pred, const std::set<LemmaKey>& seen_keys, CategoryMode mode) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw EvaluationError(EvaluationError::Kind::AlignmentMismatch,
                          std::to_string(gold.sentences.size()) + " gold sentences vs " +
                              std::to_string(pred.sentences.size()) + " predicted");
  }
  EvalResult r;
  auto unseen = [&](const MweInstance& inst) { return seen_keys.count(inst.lemma_key) == 0; };
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto m = match_mwes(gold.sentences[i], pred.sentences[i], mode);
    r.global_counts += MatchCounts{m.gold.size(), m.predicted.size(), m.pairs.size()};
    MatchCounts u;
    for (const auto& g : m.gold) u.gold += unseen(g) ? 1 : 0;
    for (const auto& p : m.predicted) u.predicted += unseen(p) ? 1 : 0;
    for (const auto& [g, p] : m.pairs) u.true_positive += (unseen(m.gold[g]) && unseen(m.predicted[p])) ? 1 : 0;
    r.unseen_counts += u;
  }
  r.global = scores_from_counts(r.global_counts);
  r.unseen = scores_from_counts(r.unseen_counts);
  return r;
}

EvalResult evaluate(const Corpus& gold, const Corpus& pred, const Corpus& train, CategoryMode mode) {
  return evaluate(gold, pred, unseen_keys(train), mode);
}

std::string format_result_table(const std::string& system, const EvalResult& r) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "| %-20s | %-22s | %-22s |\n", "Model", "Global MWE", "Unseen MWE");
  out += line;
  std::snprintf(line, sizeof line, "| %-20s | %6s %6s %6s    | %6s %6s %6s    |\n", "", "P", "R", "F1", "P", "R", "F1");
  out += line;
  std::snprintf(line, sizeof line, "| %-20s | %6s %6s %6s    | %6s %6s %6s    |\n", system.c_str(),
                format_percent(r.global.precision).c_str(), format_percent(r.global.recall).c_str(),
                format_percent(r.global.f1).c_str(), format_percent(r.unseen.precision).c_str(),
                format_percent(r.unseen.recall).c_str(), format_percent(r.unseen.f1).c_str());
  out += line;
  return out;
}

}  // namespace mwe
