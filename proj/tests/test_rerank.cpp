#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "refbias/rerank.hpp"
#include "refbias/token.hpp"

using namespace refbias;

namespace {

TokenSequence seq(const std::string& text) { return tokenize(text); }

KBestList kbest(const std::string& source, const std::vector<std::string>& candidates) {
  KBestList kb;
  kb.source = seq(source);
  for (const std::string& c : candidates) kb.candidates.push_back(seq(c));
  return kb;
}

ReferenceSet refset(const std::string& source, const std::vector<std::string>& refs) {
  ReferenceSet rs;
  rs.source = seq(source);
  for (const std::string& r : refs) rs.references.push_back(seq(r));
  return rs;
}

TypedEdits typed(const std::vector<std::pair<std::string, int>>& type_counts) {
  TypedEdits sent;
  for (const auto& [type, count] : type_counts) {
    for (int i = 0; i < count; ++i) {
      EditSpan e;
      e.start = e.end = static_cast<std::size_t>(i);
      e.type_label = type;
      sent.edits.push_back(e);
    }
  }
  return sent;
}

}  // namespace

TEST_CASE("oracle picks the candidate matching a reference") {
  KBestList kb = kbest("the cat sit", {"the cat sit", "the cat sits", "a cat sits"});
  ReferenceSet rs = refset("the cat sit", {"the cat sits"});
  RerankChoice choice = oracle_rerank(kb, rs, "max-sari");
  CHECK(choice.rank == 1);
  CHECK(choice.score == doctest::Approx(1.0));
  CHECK(choice.candidate.joined() == "the cat sits");
}

TEST_CASE("oracle ties keep the best original rank") {
  KBestList kb = kbest("s", {"x", "x", "x"});
  ReferenceSet rs = refset("s", {"y"});
  CHECK(oracle_rerank(kb, rs, "acc").rank == 0);
}

TEST_CASE("oracle gleu choice is the argmax of per-candidate scores") {
  KBestList kb = kbest("he go home", {"he go home", "he goes home", "she went home"});
  ReferenceSet rs = refset("he go home", {"he went home", "he goes home"});
  RerankChoice choice = oracle_rerank(kb, rs, "gleu");
  double best = -1;
  std::size_t best_rank = 0;
  for (std::size_t r = 0; r < kb.k(); ++r) {
    double s = score_sentence("gleu", kb.source, kb.candidates[r], rs.references);
    if (s > best) {
      best = s;
      best_rank = r;
    }
  }
  CHECK(choice.rank == best_rank);
  CHECK(choice.score == doctest::Approx(best));
}

TEST_CASE("oracle rejects unknown measures and empty lists") {
  KBestList kb = kbest("s", {"a"});
  ReferenceSet rs = refset("s", {"a"});
  CHECK_THROWS(oracle_rerank(kb, rs, "bleu"));
  KBestList empty;
  empty.source = seq("s");
  CHECK_THROWS(oracle_rerank(empty, rs, "acc"));
}

TEST_CASE("oracle score is monotone in the reference set") {
  KBestList kb = kbest("a b c", {"a b d", "a e c", "f b c"});
  ReferenceSet small = refset("a b c", {"a x c"});
  ReferenceSet large = small;
  large.references.push_back(seq("a e c"));
  for (const std::string& measure : {"acc", "eim", "gleu", "max-sari"}) {
    CHECK(oracle_rerank(kb, large, measure).score >=
          oracle_rerank(kb, small, measure).score - 1e-12);
  }
}

TEST_CASE("rerank_sweep M equal to pool size has zero sampling variance") {
  std::vector<KBestList> kbs = {kbest("a b", {"a b", "a c"}),
                                kbest("x y", {"x y", "x z"})};
  std::vector<ReferenceSet> pool = {refset("a b", {"a c", "a d"}),
                                    refset("x y", {"x z", "x w"})};
  RerankSweepConfig config;
  config.m_values = {2};
  config.resamples = 5;
  std::vector<RerankSweepPoint> points = rerank_sweep(kbs, pool, config);
  REQUIRE(points.size() == 2);  // M=2 and the "all" condition
  const RerankSweepPoint& m2 = points[0];
  const RerankSweepPoint& all = points[1];
  REQUIRE(m2.m.has_value());
  CHECK(*m2.m == 2);
  CHECK(!all.m.has_value());
  CHECK(m2.mean_word_change == doctest::Approx(all.mean_word_change));
  for (const auto& [wc, count] : all.profile.word_change_counts)
    CHECK(m2.profile.word_change_counts.at(wc) == doctest::Approx(count));
}

TEST_CASE("rerank_sweep with a single candidate is independent of M") {
  std::vector<KBestList> kbs = {kbest("a b c", {"a x c"})};
  std::vector<ReferenceSet> pool = {refset("a b c", {"a x c", "a y c", "a b z"})};
  RerankSweepConfig config;
  config.m_values = {1, 2, 3};
  config.resamples = 20;
  std::vector<RerankSweepPoint> points = rerank_sweep(kbs, pool, config);
  for (const RerankSweepPoint& p : points) {
    CHECK(p.mean_word_change == doctest::Approx(points[0].mean_word_change));
    for (const auto& [wc, delta] : p.word_change_delta)
      CHECK(delta == doctest::Approx(0.0));
  }
}

TEST_CASE("expected word change rises with M when the fix is rarely sampled") {
  // candidate A keeps the source; candidate B applies the unique valid fix.
  // The oracle picks B only when the sampled reference subset contains the
  // fix: probability M/5 for a 5-reference pool holding one copy.
  std::vector<KBestList> kbs = {kbest("a b c", {"a b c", "a x c"})};
  std::vector<ReferenceSet> pool = {
      refset("a b c", {"a x c", "q r s", "t u v", "w y z", "m n o"})};
  RerankSweepConfig config;
  config.m_values = {1, 2, 4};
  config.resamples = 4000;
  config.measure = "acc";
  std::vector<RerankSweepPoint> points = rerank_sweep(kbs, pool, config);
  std::map<int, double> mean_wc;
  for (const RerankSweepPoint& p : points)
    if (p.m) mean_wc[*p.m] = p.mean_word_change;
  // closed form: E[wc] = P(fix sampled) * 1 = M/5
  CHECK(mean_wc[1] == doctest::Approx(0.2).epsilon(0.15));
  CHECK(mean_wc[2] == doctest::Approx(0.4).epsilon(0.1));
  CHECK(mean_wc[4] == doctest::Approx(0.8).epsilon(0.05));
  CHECK(mean_wc[1] < mean_wc[2]);
  CHECK(mean_wc[2] < mean_wc[4]);
}

TEST_CASE("rerank_sweep validates M against the pool") {
  std::vector<KBestList> kbs = {kbest("s", {"a"})};
  std::vector<ReferenceSet> pool = {refset("s", {"a", "b"})};
  RerankSweepConfig config;
  config.m_values = {3};
  CHECK_THROWS(rerank_sweep(kbs, pool, config));
}

TEST_CASE("type_under_correction ratio arithmetic") {
  // one system proposing exactly the reference edits
  std::vector<TypedEdits> refs = {typed({{"DET", 2}, {"VERB", 3}})};
  std::vector<std::vector<TypedEdits>> systems = {refs};
  std::map<std::string, double> ratios = type_under_correction(systems, refs);
  CHECK(ratios.at("DET") == doctest::Approx(1.0));
  CHECK(ratios.at("VERB") == doctest::Approx(1.0));

  // no system edits at all
  std::vector<std::vector<TypedEdits>> silent = {{typed({})}};
  ratios = type_under_correction(silent, refs);
  CHECK(ratios.at("DET") == doctest::Approx(0.0));
  CHECK(ratios.at("VERB") == doctest::Approx(0.0));

  // two systems averaged: (4 + 2)/2 = 3 DET edits vs 2 in the references
  std::vector<std::vector<TypedEdits>> two = {{typed({{"DET", 4}})},
                                              {typed({{"DET", 2}})}};
  ratios = type_under_correction(two, refs);
  CHECK(ratios.at("DET") == doctest::Approx(1.5));
  CHECK(ratios.at("VERB") == doctest::Approx(0.0));
  CHECK(ratios.count("NOUN") == 0);  // absent from the references
}

TEST_CASE("type_frequency_correlation canonical orders") {
  std::map<std::string, double> ratios = {{"a", 0.1}, {"b", 0.2}, {"c", 0.3}, {"d", 0.4}};
  std::map<std::string, double> same = {{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}};
  std::map<std::string, double> reversed = {{"a", 4}, {"b", 3}, {"c", 2}, {"d", 1}};
  CHECK(type_frequency_correlation(ratios, same).rho == doctest::Approx(1.0));
  CHECK(type_frequency_correlation(ratios, reversed).rho == doctest::Approx(-1.0));
  std::map<std::string, double> two = {{"a", 1}, {"b", 2}};
  CHECK_THROWS(type_frequency_correlation(ratios, two));
}

TEST_CASE("type_frequency_correlation matches the hand-ranked formula") {
  // five types; ranks of ratios vs frequencies: d^2 sum = 4 -> rho = 0.8
  std::map<std::string, double> ratios = {
      {"t1", 0.1}, {"t2", 0.2}, {"t3", 0.3}, {"t4", 0.4}, {"t5", 0.5}};
  std::map<std::string, double> freqs = {
      {"t1", 20}, {"t2", 10}, {"t3", 40}, {"t4", 30}, {"t5", 50}};
  CorrelationResult r = type_frequency_correlation(ratios, freqs);
  CHECK(r.rho == doctest::Approx(1.0 - 6.0 * 4.0 / (5.0 * 24.0)));
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
}

TEST_CASE("exact permutation p-value for a perfect small correlation") {
  std::map<std::string, double> ratios = {{"a", 1}, {"b", 2}, {"c", 3}};
  std::map<std::string, double> freqs = {{"a", 10}, {"b", 20}, {"c", 30}};
  CorrelationResult r = type_frequency_correlation(ratios, freqs);
  CHECK(r.rho == doctest::Approx(1.0));
  // of 6 permutations of 3 items, two reach |rho| = 1
  CHECK(r.p_value == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("load_typed_edits parses the JSONL format") {
  const std::string path = "/tmp/refbias_test_typed.jsonl";
  {
    std::ofstream out(path);
    out << R"({"edits": [{"start": 0, "end": 1, "replacement": ["the"], "type": "DET"}]})"
        << "\n"
        << R"({"edits": []})" << "\n";
  }
  std::vector<TypedEdits> sents = load_typed_edits(path);
  REQUIRE(sents.size() == 2);
  REQUIRE(sents[0].edits.size() == 1);
  CHECK(sents[0].edits[0].type_label == "DET");
  CHECK(sents[0].edits[0].replacement == std::vector<std::string>{"the"});
  CHECK(sents[1].edits.empty());
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_typed_edits("/nonexistent.jsonl"), CorpusError);
}
