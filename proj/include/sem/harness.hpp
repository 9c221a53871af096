#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sem/attacks.hpp"
#include "sem/common.hpp"
#include "sem/dataset.hpp"
#include "sem/embedding.hpp"
#include "sem/encoder.hpp"
#include "sem/model.hpp"
#include "sem/parallel.hpp"
#include "sem/rng.hpp"

namespace sem {

enum class DefenseKind { NT, AT, SEM };
enum class AttackKind { None, GSA, PWWS, GA, Random };

inline std::string to_string(DefenseKind d) {
  switch (d) {
    case DefenseKind::NT: return "NT";
    case DefenseKind::AT: return "AT";
    case DefenseKind::SEM: return "SEM";
  }
  return "NT";
}

inline std::string to_string(AttackKind a) {
  switch (a) {
    case AttackKind::None: return "none";
    case AttackKind::GSA: return "GSA";
    case AttackKind::PWWS: return "PWWS";
    case AttackKind::GA: return "GA";
    case AttackKind::Random: return "random";
  }
  return "none";
}

inline DefenseKind parse_defense(const std::string& text) {
  if (text == "NT") return DefenseKind::NT;
  if (text == "AT") return DefenseKind::AT;
  if (text == "SEM") return DefenseKind::SEM;
  throw PreconditionError("unknown defense '" + text + "' (NT, AT, SEM)");
}

inline AttackKind parse_attack(const std::string& text) {
  if (text == "none") return AttackKind::None;
  if (text == "GSA") return AttackKind::GSA;
  if (text == "PWWS") return AttackKind::PWWS;
  if (text == "GA") return AttackKind::GA;
  if (text == "random") return AttackKind::Random;
  throw PreconditionError("unknown attack '" + text +
                          "' (none, GSA, PWWS, GA, random)");
}

// ---------------------------------------------------------------------------
// Reports: one tabular container whose cells are pre-formatted strings, so
// the CSV and JSON emissions carry byte-identical content.

struct Report {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& out) const {
    for (const auto& [key, value] : metadata)
      out << "# " << key << '=' << value << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        out << (c ? "," : "") << row[c];
      out << '\n';
    }
  }

  void write_json(std::ostream& out) const {
    nlohmann::ordered_json j;
    for (const auto& [key, value] : metadata) j["metadata"][key] = value;
    j["columns"] = columns;
    j["rows"] = rows;
    out << j.dump(2) << '\n';
  }

  std::string csv_string() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }
  std::string json_string() const {
    std::ostringstream os;
    write_json(os);
    return os.str();
  }

  void save(const std::string& csv_path, const std::string& json_path) const {
    if (!csv_path.empty()) {
      std::ofstream out(csv_path, std::ios::binary);
      if (!out) throw IoError("cannot write report: " + csv_path);
      write_csv(out);
    }
    if (!json_path.empty()) {
      std::ofstream out(json_path, std::ios::binary);
      if (!out) throw IoError("cannot write report: " + json_path);
      write_json(out);
    }
  }
};

namespace detail {

inline std::string format_fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment spec (declarative JSON config).

struct ExperimentSpec {
  std::string train_path;
  std::string test_path;
  std::string embedding_path;
  std::size_t embedding_limit = 0;
  DefenseKind defense = DefenseKind::NT;
  AttackKind attack = AttackKind::None;
  std::size_t sample_size = 200;
  std::uint64_t seed = 7;
  double delta = 0.5;
  int k = 10;
  TraverseOrder order = TraverseOrder::frequency();
  double at_ratio = 0.1;
  double random_fraction = 0.1;
  TrainConfig model;
  bool model_seed_explicit = false;
  AttackBudget budget;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool timing = false;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["train"] = train_path;
    j["test"] = test_path;
    j["embeddings"] = embedding_path;
    if (embedding_limit) j["embedding_limit"] = embedding_limit;
    j["defense"] = to_string(defense);
    j["attack"] = to_string(attack);
    j["sample_size"] = sample_size;
    j["seed"] = seed;
    j["encoder"] = {{"delta", delta}, {"k", k}};
    switch (order.kind) {
      case TraverseKind::Frequency:
        j["encoder"]["order"] = "frequency";
        break;
      case TraverseKind::FixedPrefix:
        j["encoder"]["order"] = {{"kind", "prefix"},
                                 {"count", order.count},
                                 {"seed", order.seed}};
        break;
      case TraverseKind::Random:
        j["encoder"]["order"] = {{"kind", "random"}, {"seed", order.seed}};
        break;
    }
    j["at_ratio"] = at_ratio;
    j["random_fraction"] = random_fraction;
    j["model"] = {{"epochs", model.epochs},
                  {"lr", model.lr},
                  {"l2", model.l2},
                  {"batch", model.batch_size}};
    if (model_seed_explicit) j["model"]["seed"] = model.seed;
    j["budget"] = {{"max_queries", budget.max_queries},
                   {"max_substitution_fraction",
                    budget.max_substitution_fraction},
                   {"ga_population", budget.ga_population},
                   {"ga_generations", budget.ga_generations}};
    j["threads"] = threads;
    j["timing"] = timing;
    return j;
  }

  static ExperimentSpec from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    spec.train_path = j.value("train", std::string());
    spec.test_path = j.value("test", std::string());
    spec.embedding_path = j.value("embeddings", std::string());
    spec.embedding_limit = j.value("embedding_limit", std::size_t{0});
    spec.defense = parse_defense(j.value("defense", std::string("NT")));
    spec.attack = parse_attack(j.value("attack", std::string("none")));
    spec.sample_size = j.value("sample_size", std::size_t{200});
    if (spec.sample_size < 1)
      throw PreconditionError("sample_size must be >= 1");
    spec.seed = j.value("seed", std::uint64_t{7});
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      spec.delta = e.value("delta", 0.5);
      spec.k = e.value("k", 10);
      if (e.contains("order")) {
        const auto& o = e.at("order");
        if (o.is_string()) {
          if (o.get<std::string>() != "frequency")
            throw PreconditionError("unknown traverse order '" +
                                    o.get<std::string>() + "'");
          spec.order = TraverseOrder::frequency();
        } else {
          const std::string kind = o.value("kind", std::string("frequency"));
          if (kind == "frequency") {
            spec.order = TraverseOrder::frequency();
          } else if (kind == "prefix") {
            spec.order = TraverseOrder::fixed_prefix(
                o.value("count", std::size_t{0}),
                o.value("seed", std::uint64_t{0}));
          } else if (kind == "random") {
            spec.order =
                TraverseOrder::random(o.value("seed", std::uint64_t{0}));
          } else {
            throw PreconditionError("unknown traverse order '" + kind + "'");
          }
        }
      }
    }
    spec.at_ratio = j.value("at_ratio", 0.1);
    spec.random_fraction = j.value("random_fraction", 0.1);
    if (j.contains("model")) {
      const auto& m = j.at("model");
      spec.model.epochs = m.value("epochs", spec.model.epochs);
      spec.model.lr = m.value("lr", spec.model.lr);
      spec.model.l2 = m.value("l2", spec.model.l2);
      spec.model.batch_size = m.value("batch", spec.model.batch_size);
      if (m.contains("seed")) {
        spec.model.seed = m.at("seed").get<std::uint64_t>();
        spec.model_seed_explicit = true;
      }
    }
    if (!spec.model_seed_explicit) spec.model.seed = derive_seed(spec.seed, 1);
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      spec.budget.max_queries =
          b.value("max_queries", spec.budget.max_queries);
      spec.budget.max_substitution_fraction = b.value(
          "max_substitution_fraction", spec.budget.max_substitution_fraction);
      spec.budget.ga_population =
          b.value("ga_population", spec.budget.ga_population);
      spec.budget.ga_generations =
          b.value("ga_generations", spec.budget.ga_generations);
    }
    spec.threads = j.value("threads", 0u);
    spec.timing = j.value("timing", false);
    return spec;
  }

  static ExperimentSpec load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open experiment spec: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": invalid json: " + e.what());
    }
    return from_json(j);
  }

  // Execution knobs (threads, timing) are excluded: they may not change
  // results, so they are not part of the experiment identity.
  std::string digest() const {
    nlohmann::json j = to_json();
    j.erase("threads");
    j.erase("timing");
    return detail::hex64(detail::fnv1a64(j.dump()));
  }
};

// ---------------------------------------------------------------------------
// Attack dispatch.

inline AttackResult run_attack(AttackKind kind, const TextClassifier& model,
                               const std::vector<std::string>& tokens,
                               int true_label, const SynonymMap& syn,
                               const AttackBudget& budget,
                               double random_fraction, const Vocabulary& vocab,
                               std::uint64_t seed,
                               std::ostream* trace = nullptr) {
  switch (kind) {
    case AttackKind::GSA:
      return gsa_attack(model, tokens, true_label, syn, budget, trace);
    case AttackKind::PWWS:
      return pwws_attack(model, tokens, true_label, syn, budget, trace);
    case AttackKind::GA:
      return ga_attack(model, tokens, true_label, syn, budget, seed, trace);
    case AttackKind::Random: {
      AttackResult result;
      result.original_label = true_label;
      auto rng = make_rng(seed);
      result.adversarial_tokens =
          random_perturbation(tokens, random_fraction, vocab, rng);
      result.substituted_indices =
          detail::diff_indices(tokens, result.adversarial_tokens);
      result.final_label = model.predict(result.adversarial_tokens);
      result.queries_used = 1;
      result.success = result.final_label != true_label;
      return result;
    }
    case AttackKind::None:
      break;
  }
  throw PreconditionError("run_attack: 'none' is not an attack");
}

// Shared base order per (dataset, seed): models pick the first sample_size
// examples they classify correctly along one seeded shuffle, so defenses
// are compared on maximally overlapping samples.
inline std::vector<std::size_t> sample_correctly_classified(
    const TextClassifier& model, const LabeledDataset& test,
    std::size_t sample_size, std::uint64_t seed) {
  std::vector<std::size_t> order(test.examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rng = make_rng(derive_seed(seed, 0x5a3f));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> chosen;
  chosen.reserve(sample_size);
  for (std::size_t idx : order) {
    if (chosen.size() == sample_size) break;
    const Example& ex = test.examples[idx];
    if (model.predict(ex.tokens) == ex.label) chosen.push_back(idx);
  }
  if (chosen.size() < sample_size)
    throw PreconditionError(
        "not enough correctly classified examples: need " +
        std::to_string(sample_size) + ", found " +
        std::to_string(chosen.size()));
  return chosen;
}

struct AttackEvalRow {
  double accuracy = 0.0;
  std::size_t n = 0;
  double mean_queries = 0.0;
  double mean_substitutions = 0.0;
  double wall_ms = 0.0;
};

// Post-attack accuracy over a seeded sample of correctly classified
// examples; a failed attack leaves the example correctly classified and so
// counts as defended. attack=None instead reports benign accuracy over the
// whole split.
inline AttackEvalRow evaluate_under_attack(
    const TextClassifier& model, AttackKind attack, const LabeledDataset& test,
    std::size_t sample_size, std::uint64_t seed, const SynonymMap& syn,
    const AttackBudget& budget, double random_fraction,
    const Vocabulary& vocab, unsigned threads = 1, bool timing = false) {
  const auto start = std::chrono::steady_clock::now();
  AttackEvalRow row;
  if (attack == AttackKind::None) {
    row.accuracy = accuracy(model, test);
    row.n = test.examples.size();
  } else {
    const auto sample =
        sample_correctly_classified(model, test, sample_size, seed);
    std::vector<AttackResult> results(sample.size());
    parallel_for(sample.size(), threads, [&](std::size_t i) {
      const Example& ex = test.examples[sample[i]];
      results[i] = run_attack(attack, model, ex.tokens, ex.label, syn, budget,
                              random_fraction, vocab,
                              derive_seed(seed, sample[i]));
    });
    std::size_t defended = 0;
    double queries = 0.0, subs = 0.0;
    for (const auto& r : results) {
      if (!r.success) ++defended;
      queries += static_cast<double>(r.queries_used);
      subs += static_cast<double>(r.substituted_indices.size());
    }
    row.accuracy = static_cast<double>(defended) / sample.size();
    row.n = sample.size();
    row.mean_queries = queries / sample.size();
    row.mean_substitutions = subs / sample.size();
  }
  if (timing)
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return row;
}

// ---------------------------------------------------------------------------
// Transferability.

struct TransferRow {
  AttackKind attack = AttackKind::None;
  std::string source;
  std::string target;
  bool self = false;
  double baseline_accuracy = 0.0;  // target on the original sampled inputs
  double accuracy = 0.0;           // target on the transferred adversaries
  std::size_t n = 0;
};

// Adversaries are generated on each source model and evaluated on every
// model; source-side failures stay in the evaluation set (they are still
// perturbed inputs).
inline std::vector<TransferRow> transferability_matrix(
    const std::vector<std::pair<std::string, const TextClassifier*>>& models,
    const std::vector<AttackKind>& attacks, const LabeledDataset& test,
    std::size_t sample_size, std::uint64_t seed, const SynonymMap& syn,
    const AttackBudget& budget, unsigned threads = 1) {
  if (models.size() < 2)
    throw PreconditionError("transferability needs at least 2 models");
  std::vector<TransferRow> rows;
  for (const auto& [source_id, source] : models) {
    const auto sample =
        sample_correctly_classified(*source, test, sample_size, seed);
    for (AttackKind attack : attacks) {
      if (attack == AttackKind::None)
        throw PreconditionError("transferability needs a real attack");
      std::vector<AttackResult> results(sample.size());
      parallel_for(sample.size(), threads, [&](std::size_t i) {
        const Example& ex = test.examples[sample[i]];
        results[i] = run_attack(attack, *source, ex.tokens, ex.label, syn,
                                budget, 0.0, Vocabulary{},
                                derive_seed(seed, sample[i]));
      });
      for (const auto& [target_id, target] : models) {
        TransferRow row;
        row.attack = attack;
        row.source = source_id;
        row.target = target_id;
        row.self = target == source;
        row.n = sample.size();
        std::size_t base_ok = 0, adv_ok = 0;
        for (std::size_t i = 0; i < sample.size(); ++i) {
          const Example& ex = test.examples[sample[i]];
          if (target->predict(ex.tokens) == ex.label) ++base_ok;
          if (target->predict(results[i].adversarial_tokens) == ex.label)
            ++adv_ok;
        }
        row.baseline_accuracy = static_cast<double>(base_ok) / sample.size();
        row.accuracy = static_cast<double>(adv_ok) / sample.size();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Sweeps. The attacker's synonym map stays fixed while the defense encoder
// is rebuilt per point.

struct SweepPointResult {
  double value = 0.0;
  double benign_accuracy = 0.0;
  std::vector<std::pair<AttackKind, double>> attacked;
};

namespace detail {

inline SweepPointResult evaluate_defended_point(
    double value, std::shared_ptr<const EmbeddingTable> table,
    const LabeledDataset& train_set, const LabeledDataset& test,
    const TrainConfig& config, const SynonymEncoder& encoder,
    const std::vector<AttackKind>& attacks, const SynonymMap& attack_syn,
    const AttackBudget& budget, std::size_t sample_size, std::uint64_t seed,
    unsigned threads) {
  LinearTextModel model = sem::train(train_set, table, config, encoder);
  SweepPointResult point;
  point.value = value;
  point.benign_accuracy = accuracy(model, test);
  for (AttackKind attack : attacks) {
    const auto row =
        evaluate_under_attack(model, attack, test, sample_size, seed,
                              attack_syn, budget, 0.1,
                              table->vocab, threads, false);
    point.attacked.emplace_back(attack, row.accuracy);
  }
  return point;
}

}  // namespace detail

inline std::vector<SweepPointResult> sweep_delta(
    std::shared_ptr<const EmbeddingTable> table, const LabeledDataset& train,
    const LabeledDataset& test, const TrainConfig& config, int k,
    TraverseOrder order, const std::vector<AttackKind>& attacks,
    const SynonymMap& attack_syn, const AttackBudget& budget,
    const std::vector<double>& deltas, std::size_t sample_size,
    std::uint64_t seed, unsigned threads = 1) {
  std::vector<SweepPointResult> points;
  for (double delta : deltas) {
    if (delta < 0) throw PreconditionError("sweep delta must be >= 0");
    SynonymEncoder encoder =
        build_encoder(*table, delta, k, order, nullptr, threads);
    points.push_back(detail::evaluate_defended_point(
        delta, table, train, test, config, encoder, attacks, attack_syn,
        budget, sample_size, seed, threads));
  }
  return points;
}

inline std::vector<SweepPointResult> sweep_k(
    std::shared_ptr<const EmbeddingTable> table, const LabeledDataset& train,
    const LabeledDataset& test, const TrainConfig& config, double delta,
    TraverseOrder order, const std::vector<AttackKind>& attacks,
    const SynonymMap& attack_syn, const AttackBudget& budget,
    const std::vector<int>& ks, std::size_t sample_size, std::uint64_t seed,
    unsigned threads = 1) {
  std::vector<SweepPointResult> points;
  for (int k : ks) {
    if (k < 1) throw PreconditionError("sweep k must be >= 1");
    SynonymEncoder encoder =
        build_encoder(*table, delta, k, order, nullptr, threads);
    points.push_back(detail::evaluate_defended_point(
        static_cast<double>(k), table, train, test, config, encoder, attacks,
        attack_syn, budget, sample_size, seed, threads));
  }
  return points;
}

// Per prefix count, averages benign and attacked accuracy over the order
// seeds.
inline std::vector<SweepPointResult> sweep_traverse_order(
    std::shared_ptr<const EmbeddingTable> table, const LabeledDataset& train,
    const LabeledDataset& test, const TrainConfig& config, double delta, int k,
    const std::vector<AttackKind>& attacks, const SynonymMap& attack_syn,
    const AttackBudget& budget, const std::vector<std::size_t>& counts,
    const std::vector<std::uint64_t>& order_seeds, std::size_t sample_size,
    std::uint64_t seed, unsigned threads = 1) {
  if (order_seeds.empty())
    throw PreconditionError("traverse-order sweep needs at least one seed");
  const SynonymIndex index = build_synonym_index(*table, delta, k, threads);
  std::vector<SweepPointResult> points;
  for (std::size_t count : counts) {
    SweepPointResult avg;
    avg.value = static_cast<double>(count);
    for (AttackKind attack : attacks) avg.attacked.emplace_back(attack, 0.0);
    for (std::uint64_t order_seed : order_seeds) {
      SynonymEncoder encoder =
          build_encoder(*table, delta, k,
                        TraverseOrder::fixed_prefix(count, order_seed),
                        &index, threads);
      const auto point = detail::evaluate_defended_point(
          avg.value, table, train, test, config, encoder, attacks, attack_syn,
          budget, sample_size, seed, threads);
      avg.benign_accuracy += point.benign_accuracy;
      for (std::size_t a = 0; a < attacks.size(); ++a)
        avg.attacked[a].second += point.attacked[a].second;
    }
    avg.benign_accuracy /= static_cast<double>(order_seeds.size());
    for (auto& [attack, acc] : avg.attacked)
      acc /= static_cast<double>(order_seeds.size());
    points.push_back(std::move(avg));
  }
  return points;
}

// ---------------------------------------------------------------------------
// Random-substitution sanity check.

struct RandomSubstitutionResult {
  double benign_accuracy = 0.0;
  double perturbed_accuracy = 0.0;
  double delta() const { return benign_accuracy - perturbed_accuracy; }
};

inline RandomSubstitutionResult random_substitution_test(
    const TextClassifier& model, const LabeledDataset& test, double fraction,
    std::uint64_t seed, const Vocabulary& vocab, unsigned threads = 1) {
  if (fraction < 0.0 || fraction > 1.0)
    throw PreconditionError("fraction must be in [0, 1]");
  RandomSubstitutionResult result;
  result.benign_accuracy = accuracy(model, test);
  std::vector<char> correct(test.examples.size(), 0);
  parallel_for(test.examples.size(), threads, [&](std::size_t i) {
    const Example& ex = test.examples[i];
    auto rng = make_rng(derive_seed(seed, i));
    const auto perturbed =
        random_perturbation(ex.tokens, fraction, vocab, rng);
    correct[i] = model.predict(perturbed) == ex.label ? 1 : 0;
  });
  std::size_t ok = 0;
  for (char c : correct) ok += c;
  result.perturbed_accuracy =
      static_cast<double>(ok) / test.examples.size();
  return result;
}

// ---------------------------------------------------------------------------
// Spec-driven experiment run (the CLI `evaluate` path).

inline LinearTextModel train_for_defense(
    const ExperimentSpec& spec, std::shared_ptr<const EmbeddingTable> table,
    const LabeledDataset& train_set, const SynonymMap& syn) {
  switch (spec.defense) {
    case DefenseKind::NT:
      return train(train_set, table, spec.model);
    case DefenseKind::SEM: {
      SynonymEncoder encoder = build_encoder(*table, spec.delta, spec.k,
                                             spec.order, nullptr,
                                             spec.threads);
      return train(train_set, table, spec.model, encoder);
    }
    case DefenseKind::AT: {
      const AttackBudget& budget = spec.budget;
      return adversarial_training(
          train_set, table, spec.model,
          [&](const TextClassifier& m, const std::vector<std::string>& tokens,
              int label, std::uint64_t) {
            return pwws_attack(m, tokens, label, syn, budget);
          },
          spec.at_ratio);
    }
  }
  throw PreconditionError("unknown defense");
}

inline Report make_experiment_report(const ExperimentSpec& spec,
                                     const std::vector<std::pair<
                                         AttackKind, AttackEvalRow>>& rows) {
  Report report;
  report.metadata = {{"toolkit_version", std::string(kVersion)},
                     {"spec_digest", spec.digest()},
                     {"seed", std::to_string(spec.seed)},
                     {"sample_sharing", "base-order per (dataset, seed)"}};
  report.columns = {"model",   "defense",      "attack",
                    "accuracy", "n",           "mean_queries",
                    "mean_substitutions",      "wall_time_ms"};
  for (const auto& [attack, row] : rows)
    report.rows.push_back({to_string(spec.defense), to_string(spec.defense),
                           to_string(attack),
                           detail::format_fixed(row.accuracy, 6),
                           std::to_string(row.n),
                           detail::format_fixed(row.mean_queries, 3),
                           detail::format_fixed(row.mean_substitutions, 3),
                           detail::format_fixed(row.wall_ms, 3)});
  return report;
}

// Loads data, trains the configured defense, reports benign accuracy plus
// the configured attack.
inline Report run_experiment(const ExperimentSpec& spec) {
  auto loaded = std::make_shared<EmbeddingTable>(
      load_embeddings(spec.embedding_path, spec.embedding_limit));
  LabeledDataset train_set = load_dataset(spec.train_path);
  LabeledDataset test_set = load_dataset(spec.test_path, train_set.num_classes);
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(train_set.examples.size());
  for (const auto& ex : train_set.examples) corpus.push_back(ex.tokens);
  loaded->vocab = frequency_from_corpus(std::move(loaded->vocab), corpus);
  std::shared_ptr<const EmbeddingTable> table = loaded;

  const SynonymMap syn =
      all_pairs_synonyms(*table, spec.delta, spec.k, spec.threads);
  LinearTextModel model = train_for_defense(spec, table, train_set, syn);

  std::vector<std::pair<AttackKind, AttackEvalRow>> rows;
  rows.emplace_back(AttackKind::None,
                    evaluate_under_attack(model, AttackKind::None, test_set,
                                          spec.sample_size, spec.seed, syn,
                                          spec.budget, spec.random_fraction,
                                          table->vocab, spec.threads,
                                          spec.timing));
  if (spec.attack != AttackKind::None)
    rows.emplace_back(
        spec.attack,
        evaluate_under_attack(model, spec.attack, test_set, spec.sample_size,
                              spec.seed, syn, spec.budget,
                              spec.random_fraction, table->vocab, spec.threads,
                              spec.timing));
  return make_experiment_report(spec, rows);
}

inline Report make_transfer_report(const std::string& spec_digest,
                                   std::uint64_t seed,
                                   const std::vector<TransferRow>& rows) {
  Report report;
  report.metadata = {{"toolkit_version", std::string(kVersion)},
                     {"spec_digest", spec_digest},
                     {"seed", std::to_string(seed)},
                     {"transferred_failures", "included"}};
  report.columns = {"attack", "source", "target",
                    "self",   "baseline_accuracy", "accuracy", "n"};
  for (const auto& row : rows)
    report.rows.push_back({to_string(row.attack), row.source, row.target,
                           row.self ? "*" : "",
                           detail::format_fixed(row.baseline_accuracy, 6),
                           detail::format_fixed(row.accuracy, 6),
                           std::to_string(row.n)});
  return report;
}

inline Report make_sweep_report(const std::string& param,
                                const std::string& spec_digest,
                                std::uint64_t seed,
                                const std::vector<AttackKind>& attacks,
                                const std::vector<SweepPointResult>& points) {
  Report report;
  report.metadata = {{"toolkit_version", std::string(kVersion)},
                     {"spec_digest", spec_digest},
                     {"seed", std::to_string(seed)},
                     {"sweep_param", param}};
  report.columns = {param, "benign_accuracy"};
  for (AttackKind attack : attacks)
    report.columns.push_back("accuracy_" + to_string(attack));
  for (const auto& point : points) {
    std::vector<std::string> row;
    row.push_back(detail::format_double(point.value));
    row.push_back(detail::format_fixed(point.benign_accuracy, 6));
    for (const auto& [attack, acc] : point.attacked)
      row.push_back(detail::format_fixed(acc, 6));
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace sem
