#pragma once

#include "mwe/corpus.hpp"
#include "mwe/rng.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#ifndef MWE_DATA_DIR
#error "MWE_DATA_DIR must point at the bundled data directory"
#endif

namespace mwe::testing {

inline std::string data_path(const std::string& name) { return std::string(MWE_DATA_DIR) + "/" + name; }

/// One CUPT sentence from forms and MWE column values; lemmas default to
/// the forms.
inline std::string cupt_block(const std::vector<std::string>& forms, const std::vector<std::string>& mwe,
                              std::vector<std::string> lemmas = {}, const std::string& sent_id = "s") {
  if (lemmas.empty()) lemmas = forms;
  std::string out = "# source_sent_id = " + sent_id + "\n";
  for (std::size_t i = 0; i < forms.size(); ++i) {
    out += std::to_string(i + 1) + "\t" + forms[i] + "\t" + lemmas[i] + "\tX\t_\t_\t0\troot\t_\t_\t" + mwe[i] + "\n";
  }
  return out + "\n";
}

inline Sentence make_sentence(const std::vector<std::string>& forms, const std::vector<std::string>& mwe,
                              const std::string& language = "RO", std::vector<std::string> lemmas = {}) {
  return parse_cupt(cupt_block(forms, mwe, std::move(lemmas)), language).sentences.at(0);
}

inline Corpus bilingual_fixture() {
  return merge_corpora({{read_cupt_file(data_path("fixtures/train_ro.cupt"), "RO"), "RO"},
                        {read_cupt_file(data_path("fixtures/train_fr.cupt"), "FR"), "FR"}});
}

using SpanSet = std::set<std::pair<std::string, std::vector<int>>>;

inline SpanSet span_set(const std::vector<MweInstance>& instances) {
  SpanSet out;
  for (const auto& i : instances) out.emplace(i.category.code(), i.token_indices);
  return out;
}

/// Random sentence whose MWEs are all representable in flat IOB2: no shared
/// tokens, and same-category expressions never interleave. Gaps and
/// cross-category interleaving are allowed.
inline Sentence random_representable_sentence(Rng& rng, const std::string& language = "RO") {
  static const std::vector<std::string> cats{"VID", "LVC.full", "LVC.cause", "IRV", "VPC.full"};
  const int n = 1 + static_cast<int>(rng.below(12));
  std::vector<std::vector<std::string>> column(static_cast<std::size_t>(n));
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<std::tuple<std::string, int, int>> spans;  // category, first, last
  int next_id = 1;
  const int wanted = static_cast<int>(rng.below(4));
  for (int attempt = 0; attempt < 20 && next_id <= wanted; ++attempt) {
    const auto& cat = cats[rng.below(cats.size())];
    const int size = 1 + static_cast<int>(rng.below(3));
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      if (!used[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    if (static_cast<int>(free.size()) < size) break;
    for (std::size_t i = free.size(); i > 1; --i) std::swap(free[i - 1], free[rng.below(i)]);
    std::vector<int> members(free.begin(), free.begin() + size);
    std::sort(members.begin(), members.end());
    const bool clash = std::any_of(spans.begin(), spans.end(), [&](const auto& s) {
      return std::get<0>(s) == cat && std::get<2>(s) >= members.front() && members.back() >= std::get<1>(s);
    });
    if (clash) continue;
    spans.emplace_back(cat, members.front(), members.back());
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto idx = static_cast<std::size_t>(members[k]);
      used[idx] = true;
      column[idx].push_back(k == 0 ? std::to_string(next_id) + ":" + cat : std::to_string(next_id));
    }
    ++next_id;
  }
  std::vector<std::string> forms;
  std::vector<std::string> mwe;
  for (int i = 0; i < n; ++i) {
    forms.push_back("w" + std::to_string(rng.below(30)));
    const auto& c = column[static_cast<std::size_t>(i)];
    mwe.push_back(c.empty() ? "*" : c.front());
  }
  return make_sentence(forms, mwe, language);
}

}  // namespace mwe::testing
