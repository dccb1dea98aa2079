#pragma once

// Hand-built gold/prediction pairs with hand-counted results, plus a
// brute-force counter that reads the MWE columns directly and shares no
// code with the evaluation module.

#include "mwe/evaluation.hpp"
#include "support/fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace mwe::testing {

struct EvalSentence {
  std::vector<std::string> forms;
  std::vector<std::string> lemmas;  // empty: lemmas = forms
  std::vector<std::string> gold;    // MWE column values
  std::vector<std::string> pred;
};

struct EvalCase {
  std::string name;
  std::vector<EvalSentence> sentences;
  std::vector<std::vector<std::string>> train_keys;  // lemma lists annotated in training
  CategoryMode mode = CategoryMode::Insensitive;
  MatchCounts global;  // hand count
  MatchCounts unseen;
};

inline std::vector<EvalCase> evaluation_cases() {
  using C = CategoryMode;
  const std::vector<std::string> s5{"a", "b", "c", "d", "e"};
  const std::vector<std::string> none5(5, "*");
  return {
      {"identical", {{s5, {}, {"1:VID", "1", "*", "*", "*"}, {"1:VID", "1", "*", "*", "*"}}}, {}, C::Insensitive,
       {1, 1, 1}, {1, 1, 1}},
      {"subset is not a match", {{s5, {}, {"1:VID", "1", "1", "*", "*"}, {"1:VID", "1", "*", "*", "*"}}}, {},
       C::Insensitive, {1, 1, 0}, {1, 1, 0}},
      {"empty prediction", {{s5, {}, {"1:VID", "1", "2:IRV", "2", "*"}, none5}}, {}, C::Insensitive, {2, 0, 0},
       {2, 0, 0}},
      {"spurious prediction only", {{s5, {}, none5, {"*", "1:LVC.full", "1", "*", "*"}}}, {}, C::Insensitive,
       {0, 1, 0}, {0, 1, 0}},
      {"both empty", {{s5, {}, none5, none5}}, {}, C::Insensitive, {0, 0, 0}, {0, 0, 0}},
      {"category ignored by default", {{s5, {}, {"1:IRV", "1", "*", "*", "*"}, {"1:VID", "1", "*", "*", "*"}}}, {},
       C::Insensitive, {1, 1, 1}, {1, 1, 1}},
      {"category-sensitive mismatch", {{s5, {}, {"1:IRV", "1", "*", "*", "*"}, {"1:VID", "1", "*", "*", "*"}}}, {},
       C::Sensitive, {1, 1, 0}, {1, 1, 0}},
      {"three gold two predicted one match",
       {{{"a", "b", "c", "d", "e", "f", "g"},
         {},
         {"1:VID", "1", "2:IRV", "2", "3:LVC.full", "3", "*"},
         {"1:VID", "1", "*", "2:IRV", "*", "*", "*"}}},
       {},
       C::Insensitive,
       {3, 2, 1},
       {3, 2, 1}},
      {"seen expression matched", {{s5, {}, {"1:VID", "1", "*", "*", "*"}, {"1:VID", "1", "*", "*", "*"}}},
       {{"a", "b"}}, C::Insensitive, {1, 1, 1}, {0, 0, 0}},
      {"seen and unseen both found",
       {{s5, {}, {"1:VID", "1", "2:IRV", "2", "*"}, {"1:VID", "1", "2:IRV", "2", "*"}}},
       {{"c", "d"}},
       C::Insensitive,
       {2, 2, 2},
       {1, 1, 1}},
      {"unseen spurious next to seen gold",
       {{s5, {}, {"1:VID", "1", "*", "*", "*"}, {"1:VID", "1", "*", "2:VID", "2"}}},
       {{"a", "b"}},
       C::Insensitive,
       {1, 2, 1},
       {0, 1, 0}},
      {"seen keys are case-folded",
       {{{"Ion", "fura", "somnul"}, {"Ion", "Fura", "SOMN"}, {"*", "1:VID", "1"}, {"*", "1:VID", "1"}}},
       {{"fura", "somn"}},
       C::Insensitive,
       {1, 1, 1},
       {0, 0, 0}},
      {"seen keys ignore lemma order",
       {{{"x", "dau", "citire"}, {}, {"*", "1:LVC.full", "1"}, {"*", "1:LVC.full", "1"}}},
       {{"citire", "dau"}},
       C::Insensitive,
       {1, 1, 1},
       {0, 0, 0}},
      {"gapped match and gapped miss",
       {{s5, {}, {"1:IRV", "*", "1", "*", "*"}, {"1:IRV", "*", "1", "*", "*"}},
        {s5, {}, {"1:IRV", "*", "1", "*", "*"}, {"1:IRV", "1", "1", "*", "*"}}},
       {},
       C::Insensitive,
       {2, 2, 1},
       {2, 2, 1}},
      {"counts add over sentences",
       {{s5, {}, {"1:VID", "1", "*", "*", "*"}, none5},
        {s5, {}, none5, {"*", "*", "1:VID", "1", "*"}},
        {s5, {}, {"*", "*", "*", "1:IRV", "1"}, {"*", "*", "*", "1:IRV", "1"}}},
       {},
       C::Insensitive,
       {2, 2, 1},
       {2, 2, 1}},
      {"overlapping gold expressions",
       {{s5, {}, {"1:VID", "1;2:LVC.full", "2", "*", "*"}, {"*", "1:LVC.full", "1", "*", "*"}}},
       {},
       C::Insensitive,
       {2, 1, 1},
       {2, 1, 1}},
      {"duplicate prediction matches once",
       {{s5, {}, {"1:VID", "1", "*", "*", "*"}, {"1:VID;2:IRV", "1;2", "*", "*", "*"}}},
       {},
       C::Insensitive,
       {1, 2, 1},
       {1, 2, 1}},
      {"seen under another category",
       {{{"x", "dau", "citire"}, {}, {"*", "1:VID", "1"}, {"*", "1:VID", "1"}}},
       {{"dau", "citire"}},
       C::Insensitive,
       {1, 1, 1},
       {0, 0, 0}},
      {"category-sensitive partial",
       {{s5, {}, {"1:VID", "1", "*", "2:IRV", "2"}, {"1:VID", "1", "*", "2:VID", "2"}}},
       {},
       C::Sensitive,
       {2, 2, 1},
       {2, 2, 1}},
      {"everything seen, nothing predicted",
       {{s5, {}, {"1:VID", "1", "2:IRV", "2", "*"}, none5}},
       {{"a", "b"}, {"c", "d"}},
       C::Insensitive,
       {2, 0, 0},
       {0, 0, 0}},
  };
}

/// Brute force: each column is read token by token, every expression is a
/// sorted index list, and every (gold, predicted) pair is tried.
struct BruteExpression {
  std::vector<int> tokens;
  std::string category;
  std::vector<std::string> key;
};

inline std::vector<BruteExpression> brute_expressions(const std::vector<std::string>& column,
                                                      const std::vector<std::string>& lemmas) {
  std::map<int, BruteExpression> by_id;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column[i] == "*") continue;
    std::stringstream items(column[i]);
    std::string item;
    while (std::getline(items, item, ';')) {
      const auto colon = item.find(':');
      const int id = std::stoi(item.substr(0, colon));
      auto& e = by_id[id];
      e.tokens.push_back(static_cast<int>(i));
      if (colon != std::string::npos) e.category = item.substr(colon + 1);
      std::string lower = lemmas[i];
      for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      e.key.push_back(lower);
    }
  }
  std::vector<BruteExpression> out;
  for (auto& [id, e] : by_id) {
    std::sort(e.key.begin(), e.key.end());
    out.push_back(e);
  }
  return out;
}

struct BruteCounts {
  MatchCounts global;
  MatchCounts unseen;
};

inline BruteCounts brute_force_counts(const EvalCase& c) {
  std::set<std::vector<std::string>> seen;
  for (auto key : c.train_keys) {
    for (auto& k : key) {
      for (auto& ch : k) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    std::sort(key.begin(), key.end());
    seen.insert(key);
  }
  BruteCounts out;
  for (const auto& s : c.sentences) {
    const auto lemmas = s.lemmas.empty() ? s.forms : s.lemmas;
    const auto gold = brute_expressions(s.gold, lemmas);
    const auto pred = brute_expressions(s.pred, lemmas);
    std::vector<bool> taken(gold.size(), false);
    out.global.gold += gold.size();
    out.global.predicted += pred.size();
    for (const auto& g : gold) out.unseen.gold += seen.count(g.key) ? 0 : 1;
    for (const auto& p : pred) out.unseen.predicted += seen.count(p.key) ? 0 : 1;
    for (const auto& p : pred) {
      for (std::size_t gi = 0; gi < gold.size(); ++gi) {
        const auto& g = gold[gi];
        if (taken[gi] || g.tokens != p.tokens) continue;
        if (c.mode == CategoryMode::Sensitive && g.category != p.category) continue;
        taken[gi] = true;
        ++out.global.true_positive;
        if (!seen.count(g.key) && !seen.count(p.key)) ++out.unseen.true_positive;
        break;
      }
    }
  }
  return out;
}

/// Percentages straight from the definitions.
inline Scores brute_scores(const MatchCounts& c) {
  Scores s;
  s.precision = c.predicted ? 100.0 * static_cast<double>(c.true_positive) / static_cast<double>(c.predicted) : 0.0;
  s.recall = c.gold ? 100.0 * static_cast<double>(c.true_positive) / static_cast<double>(c.gold) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline std::pair<Corpus, Corpus> build_case_corpora(const EvalCase& c) {
  Corpus gold;
  Corpus pred;
  for (const auto& s : c.sentences) {
    gold.sentences.push_back(make_sentence(s.forms, s.gold, "RO", s.lemmas));
    pred.sentences.push_back(make_sentence(s.forms, s.pred, "RO", s.lemmas));
  }
  return {gold, pred};
}

inline std::set<LemmaKey> case_seen_keys(const EvalCase& c) {
  std::set<LemmaKey> out;
  for (const auto& k : c.train_keys) out.insert(make_lemma_key(k));
  return out;
}

}  // namespace mwe::testing
