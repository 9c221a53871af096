#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sem/attacks.hpp"
#include "sem/synthetic.hpp"

using namespace sem;

namespace {

// Two spaced word groups of three variants each: s/s1/s2 at 0, .1, .2 and
// t/t1/t2 at 10, 10.1, 10.2. With delta=0.25 every word's synonym set is
// exactly its two group mates, so a 2-token text has 3x3=9 patterns.
std::shared_ptr<const EmbeddingTable> two_group_table() {
  return std::make_shared<const EmbeddingTable>(testutil::make_table(
      {{"s", {0.0f}},
       {"s1", {0.1f}},
       {"s2", {0.2f}},
       {"t", {10.0f}},
       {"t1", {10.1f}},
       {"t2", {10.2f}}}));
}

// Binary model whose class-0 logit rises with the mean coordinate:
// label flips to 1 once the mean exceeds `boundary`.
LinearTextModel boundary_model(std::shared_ptr<const EmbeddingTable> table,
                               double boundary, double gain = 60.0) {
  LinearTextModel model(std::move(table), 2, std::nullopt);
  model.weights() = {-gain, gain};  // class 0 row, class 1 row (dim 1)
  model.bias() = {gain * boundary, -gain * boundary};
  return model;
}

struct CountingModel : TextClassifier {
  const TextClassifier& inner;
  mutable std::size_t calls = 0;
  explicit CountingModel(const TextClassifier& m) : inner(m) {}
  std::vector<double> confidences(
      const std::vector<std::string>& tokens) const override {
    ++calls;
    return inner.confidences(tokens);
  }
  int num_classes() const override { return inner.num_classes(); }
};

void check_substitution_validity(const AttackResult& result,
                                 const std::vector<std::string>& original,
                                 const SynonymMap& syn) {
  REQUIRE(result.adversarial_tokens.size() == original.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    const bool substituted =
        std::find(result.substituted_indices.begin(),
                  result.substituted_indices.end(),
                  i) != result.substituted_indices.end();
    if (!substituted) {
      CHECK(result.adversarial_tokens[i] == original[i]);
      continue;
    }
    CHECK(result.adversarial_tokens[i] != original[i]);
    const auto& members = syn.at(original[i]).members;
    CHECK(std::any_of(members.begin(), members.end(),
                      [&](const SynonymMember& m) {
                        return m.token == result.adversarial_tokens[i];
                      }));
  }
}

std::vector<std::vector<std::string>> options_from_syn(
    const std::vector<std::string>& tokens, const SynonymMap& syn) {
  std::vector<std::vector<std::string>> options(tokens.size());
  for (std::size_t p = 0; p < tokens.size(); ++p)
    for (const auto& m : syn.at(tokens[p]).members)
      options[p].push_back(m.token);
  return options;
}

}  // namespace

TEST_CASE("gsa finds the flip exactly when exhaustive search does",
          "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  const std::vector<std::string> text = {"s", "t"};
  AttackBudget budget;

  SECTION("flippable at boundary 5.1") {
    LinearTextModel model = boundary_model(table, 5.1);
    REQUIRE(model.predict(text) == 0);
    const auto oracle_result = oracle::exhaustive_search(
        model, text, 0, options_from_syn(text, syn));
    REQUIRE(oracle_result.patterns == 9);
    REQUIRE(oracle_result.flippable);

    const AttackResult result = gsa_attack(model, text, 0, syn, budget);
    CHECK(result.success);
    CHECK(model.predict(result.adversarial_tokens) != 0);  // re-verify
    check_substitution_validity(result, text, syn);
  }
  SECTION("unflippable at boundary 5.3: confidence falls but never flips") {
    LinearTextModel model = boundary_model(table, 5.3);
    const auto oracle_result = oracle::exhaustive_search(
        model, text, 0, options_from_syn(text, syn));
    REQUIRE_FALSE(oracle_result.flippable);

    const AttackResult result = gsa_attack(model, text, 0, syn, budget);
    CHECK_FALSE(result.success);
    CHECK(result.final_label == 0);
    // greedy still walks to the global confidence minimum here
    CHECK(model.confidence(result.adversarial_tokens, 0) ==
          oracle_result.min_confidence);
  }
}

TEST_CASE("gsa accepts only strict decreases", "[attacks]") {
  // synonyms differ along a coordinate the model ignores
  auto table = std::make_shared<const EmbeddingTable>(testutil::make_table(
      {{"u", {1.0f, 0.0f}}, {"u1", {1.0f, 0.1f}}, {"u2", {1.0f, 0.2f}}}));
  LinearTextModel model(table, 2, std::nullopt);
  model.weights() = {1.0, 0.0, -1.0, 0.0};  // only dim 0 matters
  const SynonymMap syn = all_pairs_synonyms(*table, 0.5, 10);
  const std::vector<std::string> text = {"u", "u"};
  REQUIRE(model.predict(text) == 0);

  const AttackResult result = gsa_attack(model, text, 0, syn, AttackBudget{});
  CHECK_FALSE(result.success);
  CHECK(result.substituted_indices.empty());
  CHECK(result.adversarial_tokens == text);
}

TEST_CASE("gsa confidence trace decreases strictly", "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  LinearTextModel model = boundary_model(table, 5.3);  // long descent
  std::ostringstream trace;
  const AttackResult result =
      gsa_attack(model, {"s", "t"}, 0, syn, AttackBudget{}, &trace);
  CHECK(result.queries_used > 0);

  std::istringstream lines(trace.str());
  std::string line;
  double last = 1.0;
  std::size_t steps = 0;
  while (std::getline(lines, line)) {
    const double conf = std::stod(line.substr(line.rfind('\t') + 1));
    CHECK(conf < last);
    last = conf;
    ++steps;
  }
  CHECK(steps == result.substituted_indices.size());
}

TEST_CASE("gsa respects the query budget", "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  LinearTextModel model = boundary_model(table, 5.1);
  AttackBudget tiny;
  tiny.max_queries = 3;
  const AttackResult result = gsa_attack(model, {"s", "t"}, 0, syn, tiny);
  CHECK_FALSE(result.success);
  CHECK(result.queries_used <= 3);
}

TEST_CASE("word saliency", "[attacks]") {
  auto table = two_group_table();

  SECTION("zero for a model that ignores everything") {
    LinearTextModel flat(table, 2, std::nullopt);
    CHECK(word_saliency(flat, {"s", "t"}, 0, 0) == 0.0);
    CHECK(word_saliency(flat, {"s", "t"}, 0, 1) == 0.0);
  }
  SECTION("matches the closed-form unknown-token computation") {
    LinearTextModel model = boundary_model(table, 5.1);
    const std::vector<std::string> text = {"s", "t", "s2"};
    for (std::size_t i = 0; i < text.size(); ++i) {
      std::vector<std::string> blanked = text;
      blanked[i] = std::string(kUnknownToken);
      const double expected =
          oracle::linear_confidences(model, text)[0] -
          oracle::linear_confidences(model, blanked)[0];
      CHECK_THAT(word_saliency(model, text, 0, i),
                 Catch::Matchers::WithinAbs(expected, 1e-12));
    }
  }
}

TEST_CASE("pwws substitutes in descending score order", "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  LinearTextModel model = boundary_model(table, 5.4);  // nothing flips
  const std::vector<std::string> text = {"s", "t", "s1"};
  REQUIRE(model.predict(text) == 0);

  // independent recomputation of H = softmax(saliency) * best drop
  const double base = model.confidence(text, 0);
  std::vector<double> saliency(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto blanked = text;
    blanked[i] = std::string(kUnknownToken);
    saliency[i] = base - model.confidence(blanked, 0);
  }
  const double smax = *std::max_element(saliency.begin(), saliency.end());
  double denom = 0.0;
  std::vector<double> weight(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    weight[i] = std::exp(saliency[i] - smax);
    denom += weight[i];
  }
  std::vector<std::pair<double, std::size_t>> expected_order;
  for (std::size_t i = 0; i < text.size(); ++i) {
    double best_drop = 0.0;
    for (const auto& m : syn.at(text[i]).members) {
      auto swapped = text;
      swapped[i] = m.token;
      best_drop = std::max(best_drop, base - model.confidence(swapped, 0));
    }
    if (best_drop > 0.0)
      expected_order.emplace_back(-(weight[i] / denom) * best_drop, i);
  }
  std::stable_sort(expected_order.begin(), expected_order.end());

  std::ostringstream trace;
  const AttackResult result =
      pwws_attack(model, text, 0, syn, AttackBudget{}, &trace);
  CHECK_FALSE(result.success);

  std::vector<std::size_t> applied;
  std::istringstream lines(trace.str());
  std::string line;
  while (std::getline(lines, line))
    applied.push_back(std::stoull(line.substr(0, line.find('\t'))));
  REQUIRE(applied.size() == expected_order.size());
  for (std::size_t i = 0; i < applied.size(); ++i)
    CHECK(applied[i] == expected_order[i].second);
  check_substitution_validity(result, text, syn);
}

TEST_CASE("pwws substitutes the single improving position first",
          "[attacks]") {
  // dim 2: position words differ so only "v" has a confidence-reducing
  // synonym under weights that read dim 0 only
  auto table = std::make_shared<const EmbeddingTable>(testutil::make_table(
      {{"v", {1.0f, 0.0f}},
       {"v1", {0.2f, 0.1f}},   // lowers the mean on dim 0: improving
       {"w", {1.0f, 5.0f}},
       {"w1", {1.6f, 5.1f}}}));  // raises dim 0: harmful
  LinearTextModel model(table, 2, std::nullopt);
  model.weights() = {3.0, 0.0, -3.0, 0.0};
  const SynonymMap syn = all_pairs_synonyms(*table, 1.0, 10);
  const std::vector<std::string> text = {"v", "w"};
  REQUIRE(model.predict(text) == 0);

  const AttackResult result = pwws_attack(model, text, 0, syn, AttackBudget{});
  CHECK(result.substituted_indices == std::vector<std::size_t>{0});
  CHECK(result.adversarial_tokens[0] == "v1");
  CHECK(result.adversarial_tokens[1] == "w");
}

TEST_CASE("pwws matches exhaustive search on the 9-pattern text",
          "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  const std::vector<std::string> text = {"s", "t"};
  for (double boundary : {5.1, 5.3}) {
    LinearTextModel model = boundary_model(table, boundary);
    const auto oracle_result = oracle::exhaustive_search(
        model, text, 0, options_from_syn(text, syn));
    const AttackResult result = pwws_attack(model, text, 0, syn, AttackBudget{});
    CHECK(result.success == oracle_result.flippable);
    if (result.success)
      CHECK(model.predict(result.adversarial_tokens) != 0);
    check_substitution_validity(result, text, syn);
  }
}

TEST_CASE("ga crossover", "[attacks]") {
  std::mt19937_64 rng(12);
  const std::vector<std::string> x1 = {"a", "b", "c", "d"};
  const std::vector<std::string> x2 = {"w", "x", "y", "z"};

  SECTION("identical parents produce the same child") {
    CHECK(ga_crossover(x1, x1, rng) == x1);
  }
  SECTION("every position comes from one of the parents") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto child = ga_crossover(x1, x2, rng);
      REQUIRE(child.size() == x1.size());
      for (std::size_t i = 0; i < child.size(); ++i)
        CHECK((child[i] == x1[i] || child[i] == x2[i]));
    }
  }
  SECTION("seeded determinism") {
    std::mt19937_64 r1(77), r2(77);
    CHECK(ga_crossover(x1, x2, r1) == ga_crossover(x1, x2, r2));
  }
  SECTION("length mismatch") {
    std::vector<std::string> shorter = {"a"};
    CHECK_THROWS_AS(ga_crossover(x1, shorter, rng), PreconditionError);
  }
}

TEST_CASE("ga mutate", "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  // gentle slope so nearby pool words map to distinct confidences
  LinearTextModel model = boundary_model(table, 0.15, 2.0);

  SECTION("single token with synonyms gets its best replacement") {
    const std::vector<std::string> text = {"s"};
    const auto pools = make_position_pools(text, syn);
    std::mt19937_64 rng(5);
    const auto mutated = ga_mutate(model, text, pools, 0, rng);
    CHECK(mutated == std::vector<std::string>{"s2"});  // max mean coordinate
  }
  SECTION("empty pool leaves the candidate unchanged") {
    const std::vector<std::string> lonely = {"s"};
    std::vector<std::vector<std::string>> pools = {{}};
    std::mt19937_64 rng(5);
    CHECK(ga_mutate(model, lonely, pools, 0, rng) == lonely);
  }
  SECTION("seeded mutation sequence is reproducible") {
    const std::vector<std::string> text = {"s", "t"};
    const auto pools = make_position_pools(text, syn);
    std::mt19937_64 r1(9), r2(9);
    for (int step = 0; step < 10; ++step)
      CHECK(ga_mutate(model, text, pools, 0, r1) ==
            ga_mutate(model, text, pools, 0, r2));
  }
}

TEST_CASE("ga attack", "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  const std::vector<std::string> text = {"s", "t"};

  SECTION("constant model never flips") {
    LinearTextModel flat(table, 2, std::nullopt);
    AttackBudget budget;
    budget.ga_population = 6;
    budget.ga_generations = 4;
    const AttackResult result = ga_attack(flat, text, 0, syn, budget, 3);
    CHECK_FALSE(result.success);
    CHECK(result.final_label == 0);
  }
  SECTION("finds an existing flip for at least 95 of 100 seeds") {
    LinearTextModel model = boundary_model(table, 5.1);
    REQUIRE(oracle::exhaustive_search(model, text, 0,
                                      options_from_syn(text, syn))
                .flippable);
    AttackBudget budget;
    budget.ga_population = 10;
    budget.ga_generations = 10;
    int found = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const AttackResult result = ga_attack(model, text, 0, syn, budget, seed);
      if (result.success) {
        ++found;
        CHECK(model.predict(result.adversarial_tokens) != 0);
        check_substitution_validity(result, text, syn);
      }
    }
    CHECK(found >= 95);
  }
  SECTION("seeded run is reproducible end to end") {
    LinearTextModel model = boundary_model(table, 5.1);
    AttackBudget budget;
    budget.ga_population = 8;
    budget.ga_generations = 6;
    const AttackResult a = ga_attack(model, text, 0, syn, budget, 21);
    const AttackResult b = ga_attack(model, text, 0, syn, budget, 21);
    CHECK(a.success == b.success);
    CHECK(a.adversarial_tokens == b.adversarial_tokens);
    CHECK(a.queries_used == b.queries_used);
    CHECK(a.substituted_indices == b.substituted_indices);
  }
}

TEST_CASE("attack query accounting is exact", "[attacks]") {
  auto table = two_group_table();
  const SynonymMap syn = all_pairs_synonyms(*table, 0.25, 10);
  LinearTextModel inner = boundary_model(table, 5.1);
  const std::vector<std::string> text = {"s", "t"};

  for (int which = 0; which < 3; ++which) {
    CountingModel counter(inner);
    AttackBudget budget;
    budget.ga_population = 5;
    budget.ga_generations = 3;
    AttackResult result;
    if (which == 0) result = gsa_attack(counter, text, 0, syn, budget);
    if (which == 1) result = pwws_attack(counter, text, 0, syn, budget);
    if (which == 2) result = ga_attack(counter, text, 0, syn, budget, 4);
    CHECK(result.queries_used == counter.calls);
  }
}

TEST_CASE("random perturbation", "[attacks]") {
  Vocabulary vocab;
  for (const char* w : {"one", "two", "three", "four", "five"})
    vocab.add_word(w);
  const std::vector<std::string> text = {"one", "two", "three", "one"};

  SECTION("fraction zero is the identity") {
    std::mt19937_64 rng(1);
    CHECK(random_perturbation(text, 0.0, vocab, rng) == text);
  }
  SECTION("fraction one replaces every position") {
    std::mt19937_64 rng(2);
    const auto out = random_perturbation(text, 1.0, vocab, rng);
    REQUIRE(out.size() == text.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] != text[i]);
  }
  SECTION("replacement count is ceil(fraction * n)") {
    std::mt19937_64 rng(3);
    for (std::size_t n : {1u, 4u, 9u, 10u, 23u}) {
      std::vector<std::string> tokens(n, "one");
      const auto out = random_perturbation(tokens, 0.1, vocab, rng);
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n; ++i) changed += out[i] != tokens[i];
      CHECK(changed == (n + 9) / 10);  // ceil(0.1 n)
    }
  }
  SECTION("fraction outside [0,1] is rejected") {
    std::mt19937_64 rng(4);
    CHECK_THROWS_AS(random_perturbation(text, 1.5, vocab, rng),
                    PreconditionError);
  }
}

TEST_CASE("attacks cannot touch a cluster-encoding model", "[attacks]") {
  SyntheticConfig cfg;
  cfg.num_classes = 2;
  cfg.clusters_per_class = 6;
  cfg.doc_len = 10;
  cfg.signal_words_per_doc = 5;
  cfg.neutral_clusters = 4;
  cfg.neutral_singletons = 16;
  cfg.train_per_class = 120;
  cfg.test_per_class = 40;
  cfg.seed = 77;
  SyntheticData data = make_synthetic(cfg);
  auto table = std::make_shared<const EmbeddingTable>(std::move(data.table));
  const SynonymMap syn = all_pairs_synonyms(*table, 0.5, 10);
  SynonymEncoder enc =
      build_encoder(*table, 0.5, 10, TraverseOrder::frequency());
  TrainConfig config;
  config.seed = 5;
  LinearTextModel model = train(data.train, table, config, enc);

  AttackBudget budget;
  budget.ga_population = 8;
  budget.ga_generations = 5;
  int attacked = 0;
  for (const auto& ex : data.test.examples) {
    if (model.predict(ex.tokens) != ex.label) continue;
    if (++attacked > 10) break;
    CHECK_FALSE(gsa_attack(model, ex.tokens, ex.label, syn, budget).success);
    CHECK_FALSE(pwws_attack(model, ex.tokens, ex.label, syn, budget).success);
    CHECK_FALSE(
        ga_attack(model, ex.tokens, ex.label, syn, budget, 11).success);
  }
  CHECK(attacked > 10);
}
