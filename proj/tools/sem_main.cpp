// Command-line front end: every pipeline stage as a subcommand.
//
// Exit codes: 0 success, 64 usage error, 65 bad data / violated
// precondition, 66 I/O error, 70 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sem/sem.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitIo = 66;
constexpr int kExitInternal = 70;

int g_verbosity = 1;

void status(const std::string& line) {
  if (g_verbosity > 0) std::cerr << line << '\n';
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

sem::TraverseOrder parse_order(const std::string& text, std::uint64_t seed) {
  if (text == "frequency") return sem::TraverseOrder::frequency();
  if (text == "random") return sem::TraverseOrder::random(seed);
  if (text.rfind("prefix:", 0) == 0)
    return sem::TraverseOrder::fixed_prefix(std::stoull(text.substr(7)), seed);
  throw sem::PreconditionError("unknown traverse order '" + text +
                               "' (frequency, random, prefix:N)");
}

std::shared_ptr<const sem::EmbeddingTable> load_table(
    const std::string& path, std::size_t limit,
    const std::string& freq_path = std::string(),
    const sem::LabeledDataset* corpus = nullptr) {
  auto table = std::make_shared<sem::EmbeddingTable>(
      sem::load_embeddings(path, limit));
  if (!freq_path.empty()) {
    sem::load_frequencies(table->vocab, freq_path);
  } else if (corpus != nullptr) {
    std::vector<std::vector<std::string>> seqs;
    seqs.reserve(corpus->examples.size());
    for (const auto& ex : corpus->examples) seqs.push_back(ex.tokens);
    table->vocab = sem::frequency_from_corpus(std::move(table->vocab), seqs);
  }
  status("loaded " + std::to_string(table->vocab.size()) +
         " embeddings (dim " + std::to_string(table->dim) + ") from " + path);
  return table;
}

struct BuildEncoderArgs {
  std::string embeddings, freq, corpus, out;
  std::size_t limit = 0;
  double delta = 0.5;
  int k = 10;
  std::string order = "frequency";
};

int run_build_encoder(const BuildEncoderArgs& args, std::uint64_t seed,
                      unsigned threads) {
  std::optional<sem::LabeledDataset> corpus;
  if (!args.corpus.empty()) corpus = sem::load_dataset(args.corpus);
  auto table = load_table(args.embeddings, args.limit, args.freq,
                          corpus ? &*corpus : nullptr);
  sem::SynonymEncoder encoder =
      sem::build_encoder(*table, args.delta, args.k,
                         parse_order(args.order, seed), nullptr, threads);
  std::size_t clusters = 0;
  for (const auto& [word, code] : encoder.mapping())
    if (word == code) ++clusters;
  sem::save_encoder(encoder, args.out);
  status("encoder: " + std::to_string(encoder.mapping().size()) + " words, " +
         std::to_string(clusters) + " codes -> " + args.out);
  return kExitOk;
}

struct EncodeArgs {
  std::string encoder, in, out, text;
};

int run_encode(const EncodeArgs& args) {
  sem::SynonymEncoder encoder = sem::load_encoder(args.encoder);
  if (!args.text.empty()) {
    auto tokens = sem::tokenize(args.text);
    std::cout << sem::join_tokens(encoder.encode_text(tokens)) << '\n';
    return kExitOk;
  }
  if (args.in.empty() || args.out.empty())
    throw sem::PreconditionError("encode needs --text or both --in and --out");
  sem::LabeledDataset ds = sem::load_dataset(args.in);
  for (auto& ex : ds.examples) ex.tokens = encoder.encode_text(ex.tokens);
  sem::save_dataset(ds, args.out);
  status("encoded " + std::to_string(ds.size()) + " examples -> " + args.out);
  return kExitOk;
}

struct TrainArgs {
  std::string train, embeddings, encoder, out;
  std::size_t limit = 0;
  std::string defense = "NT";
  double delta = 0.5;
  int k = 10;
  double at_ratio = 0.1;
  sem::TrainConfig config;
};

int run_train(const TrainArgs& args, std::uint64_t seed, unsigned threads) {
  sem::LabeledDataset train_set = sem::load_dataset(args.train);
  auto table = load_table(args.embeddings, args.limit, "", &train_set);
  sem::TrainConfig config = args.config;
  config.seed = sem::derive_seed(seed, 1);
  const sem::DefenseKind defense = sem::parse_defense(args.defense);

  sem::LinearTextModel model;
  if (defense == sem::DefenseKind::SEM) {
    if (args.encoder.empty())
      throw sem::PreconditionError("--defense SEM requires --encoder");
    sem::SynonymEncoder encoder =
        sem::load_encoder(args.encoder, table->vocab.digest());
    model = sem::train(train_set, table, config, encoder);
  } else if (defense == sem::DefenseKind::AT) {
    const sem::SynonymMap syn =
        sem::all_pairs_synonyms(*table, args.delta, args.k, threads);
    sem::AttackBudget budget;
    model = sem::adversarial_training(
        train_set, table, config,
        [&](const sem::TextClassifier& m,
            const std::vector<std::string>& tokens, int label,
            std::uint64_t) {
          return sem::pwws_attack(m, tokens, label, syn, budget);
        },
        args.at_ratio);
  } else {
    model = sem::train(train_set, table, config);
  }
  sem::save_model(model, args.out);
  status("trained " + args.defense + " model (train accuracy " +
         sem::detail::format_fixed(sem::accuracy(model, train_set), 4) +
         ") -> " + args.out);
  return kExitOk;
}

struct AttackArgs {
  std::string model, embeddings, dataset, attack = "PWWS";
  std::string out_csv, out_json, trace;
  std::size_t limit = 0;
  double delta = 0.5;
  int k = 10;
  std::size_t sample = 200;
  double fraction = 0.1;
  sem::AttackBudget budget;
};

int run_attack_cmd(const AttackArgs& args, std::uint64_t seed,
                   unsigned threads) {
  sem::LabeledDataset test_set = sem::load_dataset(args.dataset);
  auto table = load_table(args.embeddings, args.limit, "", &test_set);
  sem::LinearTextModel model = sem::load_model(args.model, table);
  const sem::AttackKind kind = sem::parse_attack(args.attack);
  if (kind == sem::AttackKind::None)
    throw sem::PreconditionError("attack subcommand needs a real attack");
  const sem::SynonymMap syn =
      sem::all_pairs_synonyms(*table, args.delta, args.k, threads);

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!args.trace.empty()) {
    trace_file.open(args.trace, std::ios::binary);
    if (!trace_file) throw sem::IoError("cannot write trace: " + args.trace);
    trace = &trace_file;
    threads = 1;  // keep trace lines ordered
  }

  sem::AttackEvalRow row;
  if (trace == nullptr) {
    row = sem::evaluate_under_attack(model, kind, test_set, args.sample, seed,
                                     syn, args.budget, args.fraction,
                                     table->vocab, threads, false);
  } else {
    const auto sample =
        sem::sample_correctly_classified(model, test_set, args.sample, seed);
    std::size_t defended = 0;
    double queries = 0.0, subs = 0.0;
    for (std::size_t idx : sample) {
      const sem::Example& ex = test_set.examples[idx];
      (*trace) << "# example " << idx << '\n';
      auto result =
          sem::run_attack(kind, model, ex.tokens, ex.label, syn, args.budget,
                          args.fraction, table->vocab,
                          sem::derive_seed(seed, idx), trace);
      if (!result.success) ++defended;
      queries += static_cast<double>(result.queries_used);
      subs += static_cast<double>(result.substituted_indices.size());
    }
    row.accuracy = static_cast<double>(defended) / sample.size();
    row.n = sample.size();
    row.mean_queries = queries / sample.size();
    row.mean_substitutions = subs / sample.size();
  }

  sem::Report report;
  report.metadata = {{"toolkit_version", std::string(sem::kVersion)},
                     {"seed", std::to_string(seed)},
                     {"model", args.model},
                     {"attack", args.attack}};
  report.columns = {"model", "attack", "accuracy", "n", "mean_queries",
                    "mean_substitutions"};
  report.rows.push_back({args.model, args.attack,
                         sem::detail::format_fixed(row.accuracy, 6),
                         std::to_string(row.n),
                         sem::detail::format_fixed(row.mean_queries, 3),
                         sem::detail::format_fixed(row.mean_substitutions, 3)});
  if (args.out_csv.empty() && args.out_json.empty())
    report.write_csv(std::cout);
  else
    report.save(args.out_csv, args.out_json);
  status("post-attack accuracy " +
         sem::detail::format_fixed(row.accuracy, 4) + " over " +
         std::to_string(row.n) + " samples");
  return kExitOk;
}

struct EvaluateArgs {
  std::string spec, out_csv, out_json;
};

int run_evaluate(const EvaluateArgs& args, bool seed_set, std::uint64_t seed,
                 bool threads_set, unsigned threads) {
  sem::ExperimentSpec spec = sem::ExperimentSpec::load(args.spec);
  if (seed_set) {
    spec.seed = seed;
    if (!spec.model_seed_explicit) spec.model.seed = sem::derive_seed(seed, 1);
  }
  if (threads_set) spec.threads = threads;
  sem::Report report = sem::run_experiment(spec);
  if (args.out_csv.empty() && args.out_json.empty())
    report.write_csv(std::cout);
  else
    report.save(args.out_csv, args.out_json);
  return kExitOk;
}

struct TransferArgs {
  std::string train, test, embeddings, out_csv, out_json;
  std::size_t limit = 0;
  std::string attacks = "GSA,PWWS,GA";
  double delta = 0.5;
  int k = 10;
  std::size_t sample = 200;
  sem::TrainConfig config;
  sem::AttackBudget budget;
};

int run_transfer(const TransferArgs& args, std::uint64_t seed,
                 unsigned threads) {
  sem::LabeledDataset train_set = sem::load_dataset(args.train);
  sem::LabeledDataset test_set =
      sem::load_dataset(args.test, train_set.num_classes);
  auto table = load_table(args.embeddings, args.limit, "", &train_set);
  const sem::SynonymMap syn =
      sem::all_pairs_synonyms(*table, args.delta, args.k, threads);

  sem::TrainConfig base = args.config;
  base.seed = sem::derive_seed(seed, 1);
  sem::TrainConfig second = args.config;
  second.seed = sem::derive_seed(seed, 2);
  sem::LinearTextModel nt1 = sem::train(train_set, table, base);
  sem::LinearTextModel nt2 = sem::train(train_set, table, second);
  sem::SynonymEncoder encoder = sem::build_encoder(
      *table, args.delta, args.k, sem::TraverseOrder::frequency(), nullptr,
      threads);
  sem::LinearTextModel semm = sem::train(train_set, table, base, encoder);

  std::vector<std::pair<std::string, const sem::TextClassifier*>> models = {
      {"NT", &nt1}, {"NT2", &nt2}, {"SEM", &semm}};
  std::vector<sem::AttackKind> attacks;
  for (const auto& name : split_list(args.attacks))
    attacks.push_back(sem::parse_attack(name));
  const auto rows = sem::transferability_matrix(
      models, attacks, test_set, args.sample, seed, syn, args.budget, threads);
  sem::Report report =
      sem::make_transfer_report("cli-transfer", seed, rows);
  if (args.out_csv.empty() && args.out_json.empty())
    report.write_csv(std::cout);
  else
    report.save(args.out_csv, args.out_json);
  return kExitOk;
}

struct SweepArgs {
  std::string kind = "delta";
  std::string values;
  std::string order_seeds = "1,2,3,4,5";
  std::string train, test, embeddings, out_csv, out_json;
  std::size_t limit = 0;
  std::string attacks = "PWWS";
  double delta = 0.5;
  int k = 10;
  std::size_t sample = 200;
  sem::TrainConfig config;
  sem::AttackBudget budget;
};

int run_sweep(const SweepArgs& args, std::uint64_t seed, unsigned threads) {
  sem::LabeledDataset train_set = sem::load_dataset(args.train);
  sem::LabeledDataset test_set =
      sem::load_dataset(args.test, train_set.num_classes);
  auto table = load_table(args.embeddings, args.limit, "", &train_set);
  const sem::SynonymMap syn =
      sem::all_pairs_synonyms(*table, args.delta, args.k, threads);
  sem::TrainConfig config = args.config;
  config.seed = sem::derive_seed(seed, 1);
  std::vector<sem::AttackKind> attacks;
  for (const auto& name : split_list(args.attacks))
    attacks.push_back(sem::parse_attack(name));

  std::vector<sem::SweepPointResult> points;
  std::string param;
  if (args.kind == "delta") {
    param = "delta";
    std::vector<double> deltas;
    for (const auto& v : split_list(args.values)) deltas.push_back(std::stod(v));
    if (deltas.empty()) deltas = {0.0, 0.25, 0.5, 0.75, 1.0, 1.2};
    points = sem::sweep_delta(table, train_set, test_set, config, args.k,
                              sem::TraverseOrder::frequency(), attacks, syn,
                              args.budget, deltas, args.sample, seed, threads);
  } else if (args.kind == "k") {
    param = "k";
    std::vector<int> ks;
    for (const auto& v : split_list(args.values)) ks.push_back(std::stoi(v));
    if (ks.empty()) ks = {5, 7, 10, 12, 15};
    points = sem::sweep_k(table, train_set, test_set, config, args.delta,
                          sem::TraverseOrder::frequency(), attacks, syn,
                          args.budget, ks, args.sample, seed, threads);
  } else if (args.kind == "order") {
    param = "prefix_count";
    std::vector<std::size_t> counts;
    for (const auto& v : split_list(args.values))
      counts.push_back(std::stoull(v));
    if (counts.empty()) counts = {0, 200, 400, 600, 800, 1000};
    std::vector<std::uint64_t> order_seeds;
    for (const auto& v : split_list(args.order_seeds))
      order_seeds.push_back(std::stoull(v));
    points = sem::sweep_traverse_order(table, train_set, test_set, config,
                                       args.delta, args.k, attacks, syn,
                                       args.budget, counts, order_seeds,
                                       args.sample, seed, threads);
  } else {
    throw sem::PreconditionError("unknown sweep kind '" + args.kind +
                                 "' (delta, k, order)");
  }
  sem::Report report =
      sem::make_sweep_report(param, "cli-sweep", seed, attacks, points);
  if (args.out_csv.empty() && args.out_json.empty())
    report.write_csv(std::cout);
  else
    report.save(args.out_csv, args.out_json);
  return kExitOk;
}

struct ConvertArgs {
  std::string in, format = "ag-csv", out;
  std::size_t per_class = 0;
};

int run_convert(const ConvertArgs& args, std::uint64_t seed) {
  if (args.format != "ag-csv")
    throw sem::PreconditionError("unknown input format '" + args.format +
                                 "' (ag-csv)");
  sem::LabeledDataset ds = sem::load_ag_csv(args.in);
  if (args.per_class > 0) ds = sem::subsample_per_class(ds, args.per_class, seed);
  sem::save_dataset(ds, args.out);
  status("converted " + std::to_string(ds.size()) + " examples -> " +
         args.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synonym-encoding defense toolkit for text classifiers"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 64 usage error, 65 bad data or precondition, "
      "66 I/O error, 70 internal error.");

  std::uint64_t seed = 7;
  unsigned threads = 0;
  auto* seed_opt =
      app.add_option("--seed", seed, "global random seed")->capture_default_str();
  auto* threads_opt =
      app.add_option("--threads", threads,
                     "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--verbosity", g_verbosity, "0 silences status lines")
      ->capture_default_str();

  BuildEncoderArgs be;
  auto* cmd_be = app.add_subcommand("build-encoder",
                                    "Cluster synonyms and write the encoder");
  cmd_be->add_option("--embeddings", be.embeddings, "embedding file")
      ->required();
  cmd_be->add_option("--limit", be.limit, "max vocabulary size (0 = all)")
      ->capture_default_str();
  cmd_be->add_option("--freq", be.freq, "token<TAB>count frequency file");
  cmd_be->add_option("--corpus", be.corpus,
                     "dataset tsv to count frequencies from");
  cmd_be->add_option("--delta", be.delta, "synonym distance bound")
      ->capture_default_str();
  cmd_be->add_option("--k", be.k, "synonyms per word")->capture_default_str();
  cmd_be->add_option("--order", be.order,
                     "traverse order: frequency, random, prefix:N")
      ->capture_default_str();
  cmd_be->add_option("--out", be.out, "encoder output path")->required();

  EncodeArgs en;
  auto* cmd_en = app.add_subcommand("encode", "Apply an encoder to text");
  cmd_en->add_option("--encoder", en.encoder, "encoder file")->required();
  cmd_en->add_option("--in", en.in, "dataset tsv to encode");
  cmd_en->add_option("--out", en.out, "encoded dataset output");
  cmd_en->add_option("--text", en.text, "encode one line of text to stdout");

  TrainArgs tr;
  auto* cmd_tr = app.add_subcommand("train", "Train a classifier");
  cmd_tr->add_option("--train", tr.train, "training dataset tsv")->required();
  cmd_tr->add_option("--embeddings", tr.embeddings, "embedding file")
      ->required();
  cmd_tr->add_option("--limit", tr.limit, "max vocabulary size")
      ->capture_default_str();
  cmd_tr->add_option("--defense", tr.defense, "NT, AT or SEM")
      ->capture_default_str();
  cmd_tr->add_option("--encoder", tr.encoder, "encoder file (SEM)");
  cmd_tr->add_option("--delta", tr.delta, "synonym distance bound (AT)")
      ->capture_default_str();
  cmd_tr->add_option("--k", tr.k, "synonyms per word (AT)")
      ->capture_default_str();
  cmd_tr->add_option("--at-ratio", tr.at_ratio,
                     "fraction of training set attacked for AT")
      ->capture_default_str();
  cmd_tr->add_option("--epochs", tr.config.epochs, "training epochs")
      ->capture_default_str();
  cmd_tr->add_option("--lr", tr.config.lr, "learning rate")
      ->capture_default_str();
  cmd_tr->add_option("--l2", tr.config.l2, "l2 penalty")
      ->capture_default_str();
  cmd_tr->add_option("--batch", tr.config.batch_size, "batch size")
      ->capture_default_str();
  cmd_tr->add_option("--out", tr.out, "model output path")->required();

  AttackArgs at;
  auto* cmd_at = app.add_subcommand("attack", "Attack a trained model");
  cmd_at->add_option("--model", at.model, "model file")->required();
  cmd_at->add_option("--embeddings", at.embeddings, "embedding file")
      ->required();
  cmd_at->add_option("--limit", at.limit, "max vocabulary size")
      ->capture_default_str();
  cmd_at->add_option("--dataset", at.dataset, "dataset tsv to attack")
      ->required();
  cmd_at->add_option("--attack", at.attack, "GSA, PWWS, GA or random")
      ->capture_default_str();
  cmd_at->add_option("--delta", at.delta, "synonym distance bound")
      ->capture_default_str();
  cmd_at->add_option("--k", at.k, "synonyms per word")->capture_default_str();
  cmd_at->add_option("--sample", at.sample, "correctly classified sample size")
      ->capture_default_str();
  cmd_at->add_option("--fraction", at.fraction,
                     "substitution fraction for random attack")
      ->capture_default_str();
  cmd_at->add_option("--max-queries", at.budget.max_queries,
                     "per-example query budget")
      ->capture_default_str();
  cmd_at->add_option("--max-sub-fraction",
                     at.budget.max_substitution_fraction,
                     "max fraction of positions substituted")
      ->capture_default_str();
  cmd_at->add_option("--ga-population", at.budget.ga_population,
                     "GA population size")
      ->capture_default_str();
  cmd_at->add_option("--ga-generations", at.budget.ga_generations,
                     "GA generations")
      ->capture_default_str();
  cmd_at->add_option("--out", at.out_csv, "csv report path");
  cmd_at->add_option("--out-json", at.out_json, "json report path");
  cmd_at->add_option("--trace", at.trace,
                     "write accepted substitutions (forces --threads 1)");

  EvaluateArgs ev;
  auto* cmd_ev =
      app.add_subcommand("evaluate", "Run an experiment from a json spec");
  cmd_ev->add_option("--spec", ev.spec, "experiment spec json")->required();
  cmd_ev->add_option("--out-csv", ev.out_csv, "csv report path");
  cmd_ev->add_option("--out-json", ev.out_json, "json report path");

  TransferArgs tf;
  auto* cmd_tf = app.add_subcommand(
      "transfer", "Cross-model accuracy on transferred adversaries");
  cmd_tf->add_option("--train", tf.train, "training dataset tsv")->required();
  cmd_tf->add_option("--test", tf.test, "test dataset tsv")->required();
  cmd_tf->add_option("--embeddings", tf.embeddings, "embedding file")
      ->required();
  cmd_tf->add_option("--limit", tf.limit, "max vocabulary size")
      ->capture_default_str();
  cmd_tf->add_option("--attacks", tf.attacks, "comma list of attacks")
      ->capture_default_str();
  cmd_tf->add_option("--delta", tf.delta, "synonym distance bound")
      ->capture_default_str();
  cmd_tf->add_option("--k", tf.k, "synonyms per word")->capture_default_str();
  cmd_tf->add_option("--sample", tf.sample, "sample size per source")
      ->capture_default_str();
  cmd_tf->add_option("--epochs", tf.config.epochs, "training epochs")
      ->capture_default_str();
  cmd_tf->add_option("--out-csv", tf.out_csv, "csv report path");
  cmd_tf->add_option("--out-json", tf.out_json, "json report path");

  SweepArgs sw;
  auto* cmd_sw = app.add_subcommand(
      "sweep", "Rebuild the defense across delta / k / traverse order");
  cmd_sw->add_option("--kind", sw.kind, "delta, k or order")
      ->capture_default_str();
  cmd_sw->add_option("--values", sw.values, "comma list of sweep values");
  cmd_sw->add_option("--order-seeds", sw.order_seeds,
                     "comma list of shuffle seeds (order sweep)")
      ->capture_default_str();
  cmd_sw->add_option("--train", sw.train, "training dataset tsv")->required();
  cmd_sw->add_option("--test", sw.test, "test dataset tsv")->required();
  cmd_sw->add_option("--embeddings", sw.embeddings, "embedding file")
      ->required();
  cmd_sw->add_option("--limit", sw.limit, "max vocabulary size")
      ->capture_default_str();
  cmd_sw->add_option("--attacks", sw.attacks, "comma list of attacks")
      ->capture_default_str();
  cmd_sw->add_option("--delta", sw.delta, "fixed delta (k/order sweeps)")
      ->capture_default_str();
  cmd_sw->add_option("--k", sw.k, "fixed k (delta/order sweeps)")
      ->capture_default_str();
  cmd_sw->add_option("--sample", sw.sample, "sample size per point")
      ->capture_default_str();
  cmd_sw->add_option("--epochs", sw.config.epochs, "training epochs")
      ->capture_default_str();
  cmd_sw->add_option("--out-csv", sw.out_csv, "csv report path");
  cmd_sw->add_option("--out-json", sw.out_json, "json report path");

  ConvertArgs cv;
  auto* cmd_cv = app.add_subcommand("convert-dataset",
                                    "Convert AG's News style csv to tsv");
  cmd_cv->add_option("--in", cv.in, "input csv")->required();
  cmd_cv->add_option("--format", cv.format, "input format (ag-csv)")
      ->capture_default_str();
  cmd_cv->add_option("--out", cv.out, "output tsv")->required();
  cmd_cv->add_option("--per-class", cv.per_class,
                     "seeded per-class subsample (0 = keep all)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(cmd_be)) return run_build_encoder(be, seed, threads);
    if (app.got_subcommand(cmd_en)) return run_encode(en);
    if (app.got_subcommand(cmd_tr)) return run_train(tr, seed, threads);
    if (app.got_subcommand(cmd_at)) return run_attack_cmd(at, seed, threads);
    if (app.got_subcommand(cmd_ev))
      return run_evaluate(ev, seed_opt->count() > 0, seed,
                          threads_opt->count() > 0, threads);
    if (app.got_subcommand(cmd_tf)) return run_transfer(tf, seed, threads);
    if (app.got_subcommand(cmd_sw)) return run_sweep(sw, seed, threads);
    if (app.got_subcommand(cmd_cv)) return run_convert(cv, seed);
  } catch (const sem::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const sem::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const sem::PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << '\n';
    return kExitData;
  } catch (const sem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
