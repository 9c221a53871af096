// Writes the bundled synthetic corpus: embedding file, train/test tsv, and
// optionally the same split in AG's News csv form.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sem/sem.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic synonym-cluster corpus"};
  sem::SyntheticConfig cfg;
  std::string out_dir = ".";
  bool ag_csv = false;
  app.add_option("--classes", cfg.num_classes, "number of classes")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "generator seed")->capture_default_str();
  app.add_option("--train-per-class", cfg.train_per_class,
                 "training docs per class")
      ->capture_default_str();
  app.add_option("--test-per-class", cfg.test_per_class, "test docs per class")
      ->capture_default_str();
  app.add_option("--out-dir", out_dir, "output directory")
      ->capture_default_str();
  app.add_flag("--ag-csv", ag_csv, "also write AG's News style csv files");
  CLI11_PARSE(app, argc, argv);

  try {
    sem::SyntheticData data = sem::make_synthetic(cfg);
    sem::save_embeddings(data.table, out_dir + "/embeddings.txt");
    sem::save_frequencies(data.table.vocab, out_dir + "/frequencies.tsv");
    sem::save_dataset(data.train, out_dir + "/train.tsv");
    sem::save_dataset(data.test, out_dir + "/test.tsv");
    if (ag_csv) {
      sem::write_ag_csv(data.train, out_dir + "/train.csv");
      sem::write_ag_csv(data.test, out_dir + "/test.csv");
    }
    std::cerr << "wrote " << data.table.vocab.size() << " words, "
              << data.train.size() << " train / " << data.test.size()
              << " test docs to " << out_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
