#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "refbias/corpus.hpp"

using namespace refbias;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/refbias_test_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_corpus aligns parallel files") {
  TempFile src("src.txt", "he go home\nthe cat sat .\n");
  TempFile r1("r1.txt", "he goes home\nthe cat sat .\n");
  TempFile r2("r2.txt", "he went home\nthe cat sat .\n");
  ParallelCorpus corpus = load_corpus(src.path, {r1.path, r2.path});
  CHECK(corpus.n() == 2);
  CHECK(corpus.entries[0].m() == 2);
  CHECK(corpus.entries[1].m() == 2);
  CHECK(corpus.entries[0].references[1].joined() == "he went home");
  CHECK(corpus.n_cor() == 1);  // second source equals both its references
}

TEST_CASE("load_corpus reports line-count mismatches with the file name") {
  TempFile src("src3.txt", "a\nb\nc\n");
  TempFile ref("ref2.txt", "a\nb\n");
  try {
    load_corpus(src.path, {ref.path});
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ref2.txt") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
}

TEST_CASE("load_corpus rejects unreadable files") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/path.txt", {}), CorpusError);
}

TEST_CASE("multi-reference round trip preserves the corpus") {
  TempFile in("mr.jsonl",
              R"({"source": "he go home", "references": ["he goes home", "he went home"]})"
              "\n"
              R"({"source": "fine .", "references": ["fine ."]})"
              "\n");
  ParallelCorpus corpus = load_multi_reference(in.path);
  CHECK(corpus.n() == 2);
  CHECK(corpus.n_cor() == 1);

  TempFile out("mr_out.jsonl", "");
  save_multi_reference(corpus, out.path);
  ParallelCorpus reloaded = load_multi_reference(out.path);
  REQUIRE(reloaded.n() == corpus.n());
  for (std::size_t i = 0; i < corpus.n(); ++i) {
    CHECK(reloaded.entries[i].source == corpus.entries[i].source);
    REQUIRE(reloaded.entries[i].m() == corpus.entries[i].m());
    for (std::size_t j = 0; j < corpus.entries[i].m(); ++j)
      CHECK(reloaded.entries[i].references[j] == corpus.entries[i].references[j]);
  }
}

TEST_CASE("duplicate references are kept as a multiset") {
  TempFile in("dup.jsonl",
              R"({"source": "a", "references": ["b", "b", "c"]})"
              "\n");
  ParallelCorpus corpus = load_multi_reference(in.path);
  CHECK(corpus.entries[0].m() == 3);
}

TEST_CASE("n_cor uses the normalization policy") {
  TempFile in("ncor.jsonl",
              R"({"source": "fine .", "references": ["fine"]})"
              "\n");
  CHECK(load_multi_reference(in.path).n_cor() == 0);
  NormalizationPolicy strip{false, true};
  CHECK(load_multi_reference(in.path, strip).n_cor() == 1);
}

TEST_CASE("removing a reference never increases n_cor") {
  TempFile in("shrink.jsonl",
              R"({"source": "a b", "references": ["a b", "a c"]})"
              "\n"
              R"({"source": "x", "references": ["y", "x"]})"
              "\n");
  ParallelCorpus corpus = load_multi_reference(in.path);
  const std::size_t before = corpus.n_cor();
  CHECK(before == 2);
  for (auto& entry : corpus.entries) entry.references.pop_back();
  CHECK(corpus.n_cor() <= before);
  CHECK(corpus.n_cor() <= corpus.n());
}

TEST_CASE("load_kbest preserves rank order") {
  TempFile in("kb.jsonl",
              R"({"source": "s", "candidates": ["first", "second", "third"]})"
              "\n");
  std::vector<KBestList> lists = load_kbest(in.path);
  REQUIRE(lists.size() == 1);
  CHECK(lists[0].k() == 3);
  CHECK(lists[0].candidates[0].joined() == "first");
  CHECK(lists[0].candidates[2].joined() == "third");
}

TEST_CASE("load_sentences reads one sequence per line") {
  TempFile in("lines.txt", "a b\n\nc\n");
  std::vector<TokenSequence> lines = load_sentences(in.path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].size() == 2);
  CHECK(lines[1].empty());
  CHECK(lines[2].joined() == "c");
}

TEST_CASE("file_content_hash changes with content") {
  TempFile a("hash_a.txt", "alpha\n");
  TempFile b("hash_b.txt", "beta\n");
  TempFile a2("hash_a2.txt", "alpha\n");
  CHECK(file_content_hash(a.path) == file_content_hash(a2.path));
  CHECK(file_content_hash(a.path) != file_content_hash(b.path));
}
