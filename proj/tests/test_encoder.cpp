#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sem/encoder.hpp"

using namespace sem;

namespace {

EmbeddingTable three_word_line() {
  return testutil::make_table(
      {{"a", {0.0f}}, {"b", {0.3f}}, {"c", {0.6f}}}, {3, 2, 1});
}

}  // namespace

TEST_CASE("hand-traced encoder on the 3-word line", "[encoder]") {
  EmbeddingTable table = three_word_line();
  SynonymEncoder enc =
      build_encoder(table, 0.5, 10, TraverseOrder::frequency());
  // visit a: no coded synonym, self-code, propagate to b;
  // visit c: closest coded synonym is b (0.3), adopt its code a.
  CHECK(enc.mapping().at("a") == "a");
  CHECK(enc.mapping().at("b") == "a");
  CHECK(enc.mapping().at("c") == "a");

  CHECK(enc.encode("c") == "a");
  CHECK(enc.encode("a") == "a");
  CHECK(enc.encode("zzz-unseen") == "zzz-unseen");

  CHECK(enc.encode_text({"c", "b", "a"}) ==
        std::vector<std::string>{"a", "a", "a"});
  CHECK(enc.encode_text({}).empty());
}

TEST_CASE("tiny delta yields the identity encoder", "[encoder]") {
  EmbeddingTable table = three_word_line();
  SynonymEncoder enc =
      build_encoder(table, 0.05, 10, TraverseOrder::frequency());
  CHECK(enc.is_identity());
  for (const auto& [word, code] : enc.mapping()) CHECK(word == code);
}

TEST_CASE("encoder equals the literal transcription oracle", "[encoder]") {
  std::mt19937_64 meta(404);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> words(10, 60), dims(1, 4);
    std::uniform_real_distribution<double> deltas(0.1, 1.0);
    std::uniform_int_distribution<int> ks(1, 8);
    EmbeddingTable table =
        testutil::random_table(meta, words(meta), dims(meta));
    const double delta = deltas(meta);
    const int k = ks(meta);
    SynonymEncoder enc =
        build_encoder(table, delta, k, TraverseOrder::frequency());
    const auto expected = oracle::encode_transcription(table, delta, k);
    REQUIRE(enc.mapping().size() == expected.size());
    for (const auto& [word, code] : expected)
      CHECK(enc.mapping().at(word) == code);
  }
}

TEST_CASE("encoder mapping is idempotent and frequency dominated",
          "[encoder]") {
  std::mt19937_64 rng(77);
  EmbeddingTable table = testutil::random_table(rng, 120, 3);
  const SynonymIndex index = build_synonym_index(table, 0.5, 6);
  SynonymEncoder enc =
      build_encoder(table, 0.5, 6, TraverseOrder::frequency(), &index);
  const auto report = check_encoder_invariants(enc, table, index);
  CHECK(report.idempotence_violations == 0);
  CHECK(report.linkage_violations == 0);
  CHECK(report.frequency_violations == 0);
}

TEST_CASE("traverse order variants", "[encoder]") {
  std::mt19937_64 rng(15);
  EmbeddingTable table = testutil::random_table(rng, 100, 2);
  const SynonymIndex index = build_synonym_index(table, 0.5, 6);

  SECTION("prefix covering the vocabulary equals frequency order") {
    SynonymEncoder freq =
        build_encoder(table, 0.5, 6, TraverseOrder::frequency(), &index);
    SynonymEncoder full = build_encoder(
        table, 0.5, 6, TraverseOrder::fixed_prefix(1000, 42), &index);
    CHECK(freq.mapping() == full.mapping());
  }
  SECTION("random order equals prefix zero with the same seed") {
    SynonymEncoder rnd =
        build_encoder(table, 0.5, 6, TraverseOrder::random(9), &index);
    SynonymEncoder pre = build_encoder(table, 0.5, 6,
                                       TraverseOrder::fixed_prefix(0, 9),
                                       &index);
    CHECK(rnd.mapping() == pre.mapping());
  }
  SECTION("every random order satisfies idempotence and linkage") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
      SynonymEncoder enc =
          build_encoder(table, 0.5, 6, TraverseOrder::random(seed), &index);
      const auto report = check_encoder_invariants(enc, table, index);
      CHECK(report.idempotence_violations == 0);
      CHECK(report.linkage_violations == 0);
    }
  }
}

TEST_CASE("deterministic rebuilds serialize identically", "[encoder]") {
  std::mt19937_64 rng(55);
  EmbeddingTable table = testutil::random_table(rng, 150, 3);
  testutil::TempDir dir;
  SynonymEncoder a = build_encoder(table, 0.5, 10, TraverseOrder::frequency());
  SynonymEncoder b = build_encoder(table, 0.5, 10, TraverseOrder::frequency());
  save_encoder(a, dir.file("a.tsv"));
  save_encoder(b, dir.file("b.tsv"));
  CHECK(testutil::read_file(dir.file("a.tsv")) ==
        testutil::read_file(dir.file("b.tsv")));
}

TEST_CASE("encoder file round trip and failure modes", "[encoder]") {
  EmbeddingTable table = three_word_line();
  SynonymEncoder enc = build_encoder(
      table, 0.5, 10, TraverseOrder::fixed_prefix(2, 123));
  testutil::TempDir dir;
  const std::string path = dir.file("enc.tsv");
  save_encoder(enc, path);

  SECTION("round trip preserves mapping and metadata") {
    SynonymEncoder back = load_encoder(path);
    CHECK(back == enc);
    CHECK(back.delta() == 0.5);
    CHECK(back.k() == 10);
    CHECK(back.order() == TraverseOrder::fixed_prefix(2, 123));
    CHECK(back.vocab_digest() == table.vocab.digest());
  }
  SECTION("truncated file") {
    std::string content = testutil::read_file(path);
    testutil::write_file(dir.file("cut.tsv"),
                         content.substr(0, content.size() - 5));
    CHECK_THROWS_AS(load_encoder(dir.file("cut.tsv")), ParseError);
  }
  SECTION("wrong version line") {
    testutil::write_file(dir.file("v9.tsv"), "sem-encoder v9\n");
    CHECK_THROWS_AS(load_encoder(dir.file("v9.tsv")), ParseError);
  }
  SECTION("digest mismatch is reported when expectations are given") {
    CHECK_THROWS_WITH(load_encoder(path, "deadbeefdeadbeef"),
                      Catch::Matchers::ContainsSubstring("digest mismatch"));
    CHECK_NOTHROW(load_encoder(path, table.vocab.digest()));
  }
}

TEST_CASE("encode_text is idempotent", "[encoder]") {
  std::mt19937_64 rng(8);
  EmbeddingTable table = testutil::random_table(rng, 60, 2);
  SynonymEncoder enc = build_encoder(table, 0.6, 5, TraverseOrder::frequency());
  std::uniform_int_distribution<int> pick(0, 59), len(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> text;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) text.push_back(table.vocab.word(pick(rng)));
    const auto once = enc.encode_text(text);
    CHECK(enc.encode_text(once) == once);
  }
}
