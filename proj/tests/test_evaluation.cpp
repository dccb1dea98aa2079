#include "doctest.h"

#include "mwe/evaluation.hpp"
#include "support/eval_cases.hpp"
#include "support/fixtures.hpp"

#include <cmath>

using namespace mwe;
using namespace mwe::testing;

TEST_CASE("F1 identity and rounding") {
  CHECK(round_half_up(f1_score(90.73, 93.74)) == 92.21);
  CHECK(round_half_up(f1_score(52.97, 70.69)) == 60.56);
  CHECK(f1_score(0.0, 0.0) == 0.0);
  CHECK(f1_score(100.0, 0.0) == 0.0);
  CHECK(format_percent(33.333333) == "33.33");
  CHECK(format_percent(66.666666) == "66.67");
  CHECK(format_percent(40.0) == "40.00");
  CHECK(format_percent(0.125 * 100) == "12.50");
  CHECK(round_half_up(2.675) == 2.68);
  CHECK(round_half_up(-0.0) == 0.0);
}

TEST_CASE("hand-built pairs against hand counts and brute force") {
  const auto cases = evaluation_cases();
  REQUIRE(cases.size() == 20);
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const auto brute = brute_force_counts(c);
    CHECK(brute.global == c.global);
    CHECK(brute.unseen == c.unseen);

    const auto [gold, pred] = build_case_corpora(c);
    const auto r = evaluate(gold, pred, case_seen_keys(c), c.mode);
    CHECK(r.global_counts == c.global);
    CHECK(r.unseen_counts == c.unseen);
    for (const auto& [got, want] : {std::pair{r.global, brute_scores(c.global)}, std::pair{r.unseen, brute_scores(c.unseen)}}) {
      CHECK(std::isfinite(got.f1));
      CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
      CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
      CHECK(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));
    }
  }
}

TEST_CASE("three gold, two predicted, one match") {
  const auto train = read_cupt_file(data_path("fixtures/train_ro.cupt"), "RO");
  const auto gold = read_cupt_file(data_path("fixtures/eval_gold.cupt"), "RO");
  const auto pred = read_cupt_file(data_path("fixtures/eval_pred.cupt"), "RO");
  const auto r = evaluate(gold, pred, train);
  CHECK(r.global_counts == MatchCounts{3, 2, 1});
  CHECK(format_percent(r.global.precision) == "50.00");
  CHECK(format_percent(r.global.recall) == "33.33");
  CHECK(format_percent(r.global.f1) == "40.00");
  CHECK(r.unseen_counts == MatchCounts{1, 1, 0});

  const auto table = format_result_table("fixture", r);
  CHECK(table.find("Global MWE") != std::string::npos);
  CHECK(table.find("50.00  33.33  40.00") != std::string::npos);
}

TEST_CASE("category-sensitive matching") {
  const auto gold = make_sentence({"a", "b"}, {"1:IRV", "1"});
  const auto pred = make_sentence({"a", "b"}, {"1:VID", "1"});
  CHECK(match_mwes(gold, pred).pairs.size() == 1);
  CHECK(match_mwes(gold, pred, CategoryMode::Sensitive).pairs.empty());
}

TEST_CASE("errors") {
  const auto a = make_sentence({"a", "b"}, {"*", "*"});
  const auto b = make_sentence({"a", "b", "c"}, {"*", "*", "*"});
  const auto c = make_sentence({"a", "x"}, {"*", "*"});
  for (const auto& other : {b, c}) {
    try {
      match_mwes(a, other);
      FAIL("expected TokenizationMismatch");
    } catch (const EvaluationError& e) {
      CHECK(e.kind() == EvaluationError::Kind::TokenizationMismatch);
    }
  }
  Corpus one;
  one.sentences = {a};
  Corpus two;
  two.sentences = {a, a};
  try {
    evaluate(one, two, std::set<LemmaKey>{});
    FAIL("expected AlignmentMismatch");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::AlignmentMismatch);
  }
}

TEST_CASE("invariants on random corpora") {
  Rng rng(31);
  const auto train = bilingual_fixture();
  const auto seen = unseen_keys(train);
  for (int trial = 0; trial < 200; ++trial) {
    Corpus gold;
    Corpus pred;
    for (int i = 0; i < 4; ++i) {
      const auto g = random_representable_sentence(rng);
      gold.sentences.push_back(g);
      // Prediction: keep each gold expression with probability 1/2 and
      // add an extra random one now and then.
      auto kept = extract_mwes(g);
      std::erase_if(kept, [&](const MweInstance&) { return rng.below(2) == 0; });
      if (rng.below(3) == 0 && !g.tokens.empty()) {
        MweInstance extra;
        extra.category = VmweCategory::parse("VID");
        extra.token_indices = {1 + static_cast<int>(rng.below(g.tokens.size()))};
        kept.push_back(extra);
      }
      pred.sentences.push_back(with_mwes(g, kept));
    }
    const auto perfect = evaluate(gold, gold, seen);
    if (perfect.global_counts.gold > 0) {
      CHECK(perfect.global.precision == 100.0);
      CHECK(perfect.global.recall == 100.0);
      CHECK(perfect.global.f1 == 100.0);
    }
    const auto r = evaluate(gold, pred, seen);
    CHECK(r.unseen_counts.true_positive <= r.global_counts.true_positive);
    CHECK(r.unseen_counts.gold <= r.global_counts.gold);
    CHECK(r.global_counts.true_positive <= std::min(r.global_counts.gold, r.global_counts.predicted));
    for (const auto& s : {r.global, r.unseen}) {
      if (s.precision + s.recall > 0) {
        CHECK(round_half_up(s.f1) == round_half_up(2 * s.precision * s.recall / (s.precision + s.recall)));
      }
    }
  }
}

TEST_CASE("monotonicity") {
  const auto g = make_sentence({"a", "b", "c", "d", "e"}, {"1:VID", "1", "2:IRV", "2", "*"});
  Corpus gold;
  gold.sentences = {g};
  const std::set<LemmaKey> seen;

  auto pred_with = [&](std::vector<MweInstance> instances) {
    Corpus c;
    c.sentences = {with_mwes(g, instances)};
    return evaluate(gold, c, seen);
  };
  const auto all = extract_mwes(g);
  const auto base = pred_with({all[0]});

  MweInstance spurious;
  spurious.category = VmweCategory::parse("VID");
  spurious.token_indices = {5};
  const auto more = pred_with({all[0], spurious});
  CHECK(more.global.precision <= base.global.precision);

  const auto fewer = pred_with({});
  CHECK(fewer.global.recall <= base.global.recall);
}
