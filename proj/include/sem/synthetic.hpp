#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sem/common.hpp"
#include "sem/dataset.hpp"
#include "sem/embedding.hpp"
#include "sem/vocab.hpp"

namespace sem {

// Seeded corpus with planted synonym clusters, used by CI and as a
// desk-scale stand-in where no real dataset is available.
//
// Every class owns `clusters_per_class` concept clusters whose variants
// differ along that class's coordinate (from signal-spread up to
// signal+spread, most-frequent variant highest). Cluster diameters stay
// under 0.5 and distinct clusters stay more than 1.2 apart, so a synonym
// query at the default radius always returns exactly the cluster mates.
struct SyntheticConfig {
  int num_classes = 2;
  int clusters_per_class = 12;
  int variants_per_cluster = 6;
  int neutral_clusters = 16;
  int neutral_variants = 4;
  int neutral_singletons = 120;
  int dim = 16;
  double signal = 0.13;
  double spread = 0.24;
  double jitter = 0.005;
  double min_cluster_gap = 1.9;
  double center_range = 0.9;
  int train_per_class = 1000;
  int test_per_class = 200;
  int doc_len = 14;
  int signal_words_per_doc = 7;
  // off-topic signal words blur per-cluster class evidence, which keeps the
  // classifier honest about reading the class coordinates
  int offclass_words_per_doc = 2;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  EmbeddingTable table;
  LabeledDataset train;
  LabeledDataset test;
};

namespace detail {

inline std::string synth_word(std::mt19937_64& rng,
                              std::set<std::string>& taken) {
  static const char* consonants = "bcdfglmnprstvz";
  static const char* vowels = "aeiou";
  std::uniform_int_distribution<int> c(0, 13), v(0, 4), syl(2, 3);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::string word;
    const int syllables = syl(rng);
    for (int s = 0; s < syllables; ++s) {
      word.push_back(consonants[c(rng)]);
      word.push_back(vowels[v(rng)]);
    }
    if (taken.insert(word).second) return word;
  }
  throw Error("could not generate a fresh synthetic word");
}

}  // namespace detail

inline SyntheticData make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.dim < cfg.num_classes + 2)
    throw PreconditionError("synthetic dim too small for class count");
  if (cfg.signal_words_per_doc > cfg.clusters_per_class)
    throw PreconditionError("more signal words per doc than clusters");
  if (cfg.doc_len < cfg.signal_words_per_doc + cfg.offclass_words_per_doc)
    throw PreconditionError("doc_len smaller than signal word count");
  if (cfg.offclass_words_per_doc > 0 && cfg.num_classes < 2)
    throw PreconditionError("off-class words need at least 2 classes");

  std::mt19937_64 rng(cfg.seed);
  const int free_begin = cfg.num_classes;
  const int free_dims = cfg.dim - free_begin;
  std::uniform_real_distribution<double> center_coord(-cfg.center_range,
                                                      cfg.center_range);

  const int total_centers =
      cfg.num_classes * cfg.clusters_per_class + cfg.neutral_clusters +
      cfg.neutral_singletons;
  std::vector<std::vector<double>> centers;
  centers.reserve(total_centers);
  for (int i = 0; i < total_centers; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
      std::vector<double> cand(free_dims);
      for (double& x : cand) x = center_coord(rng);
      placed = true;
      for (const auto& other : centers) {
        double d2 = 0.0;
        for (int j = 0; j < free_dims; ++j) {
          const double d = cand[j] - other[j];
          d2 += d * d;
        }
        if (d2 < cfg.min_cluster_gap * cfg.min_cluster_gap) {
          placed = false;
          break;
        }
      }
      if (placed) centers.push_back(std::move(cand));
    }
    if (!placed)
      throw Error("could not place synthetic cluster centers; "
                  "reduce counts or min_cluster_gap");
  }

  SyntheticData data;
  data.table.dim = cfg.dim;
  std::set<std::string> taken;
  taken.insert(std::string(kUnknownToken));

  std::uniform_real_distribution<double> offset_dist(-cfg.spread, cfg.spread);
  std::uniform_real_distribution<double> jitter_dist(-cfg.jitter, cfg.jitter);

  auto add_word = [&](const std::vector<double>& center, int axis,
                      double axis_value) {
    std::string word = detail::synth_word(rng, taken);
    data.table.vocab.add_word(word);
    std::vector<float> row(cfg.dim, 0.0f);
    for (int j = 0; j < free_dims; ++j)
      row[free_begin + j] =
          static_cast<float>(center[j] + jitter_dist(rng));
    if (axis >= 0) row[axis] = static_cast<float>(axis_value);
    data.table.vectors.insert(data.table.vectors.end(), row.begin(),
                              row.end());
    return word;
  };

  // variant j=0 sits at +spread (the common form), the last at -spread (the
  // adversarially weakest form), the middle ones anywhere in between
  auto variant_offsets = [&](int count) {
    std::vector<double> offs(count);
    for (int j = 0; j < count; ++j) {
      if (j == 0)
        offs[j] = cfg.spread;
      else if (j == count - 1)
        offs[j] = -cfg.spread;
      else
        offs[j] = offset_dist(rng);
    }
    return offs;
  };

  struct Cluster {
    std::vector<std::string> words;  // index = variant rank (0 most common)
  };
  std::vector<std::vector<Cluster>> class_clusters(cfg.num_classes);
  std::vector<Cluster> neutral_pool;

  int center_at = 0;
  for (int y = 0; y < cfg.num_classes; ++y) {
    for (int c = 0; c < cfg.clusters_per_class; ++c) {
      Cluster cl;
      for (double off : variant_offsets(cfg.variants_per_cluster))
        cl.words.push_back(
            add_word(centers[center_at], y, cfg.signal + off));
      class_clusters[y].push_back(std::move(cl));
      ++center_at;
    }
  }
  for (int c = 0; c < cfg.neutral_clusters; ++c) {
    // neutral variants spread along a rotating free coordinate
    const int axis = free_begin + (c % free_dims);
    Cluster cl;
    const double base = centers[center_at][axis - free_begin];
    for (double off : variant_offsets(cfg.neutral_variants))
      cl.words.push_back(add_word(centers[center_at], axis, base + off));
    neutral_pool.push_back(std::move(cl));
    ++center_at;
  }
  std::vector<std::string> singletons;
  for (int s = 0; s < cfg.neutral_singletons; ++s) {
    singletons.push_back(add_word(centers[center_at], -1, 0.0));
    ++center_at;
  }

  // variant rank r is sampled with weight 2^-r
  auto pick_variant = [&](const Cluster& cl) -> const std::string& {
    double total = 0.0;
    for (std::size_t r = 0; r < cl.words.size(); ++r)
      total += std::ldexp(1.0, -static_cast<int>(r));
    std::uniform_real_distribution<double> u(0.0, total);
    double roll = u(rng);
    for (std::size_t r = 0; r + 1 < cl.words.size(); ++r) {
      const double w = std::ldexp(1.0, -static_cast<int>(r));
      if (roll < w) return cl.words[r];
      roll -= w;
    }
    return cl.words.back();
  };

  auto pick_neutral = [&]() -> const std::string& {
    const std::size_t total = neutral_pool.size() + singletons.size();
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    const std::size_t at = pick(rng);
    if (at < neutral_pool.size()) return pick_variant(neutral_pool[at]);
    return singletons[at - neutral_pool.size()];
  };

  auto make_doc = [&](int label) {
    Example ex;
    ex.label = label;
    std::vector<int> cluster_ids(cfg.clusters_per_class);
    for (int i = 0; i < cfg.clusters_per_class; ++i) cluster_ids[i] = i;
    std::shuffle(cluster_ids.begin(), cluster_ids.end(), rng);
    for (int i = 0; i < cfg.signal_words_per_doc; ++i)
      ex.tokens.push_back(
          pick_variant(class_clusters[label][cluster_ids[i]]));
    std::uniform_int_distribution<int> other_class(0, cfg.num_classes - 2);
    std::uniform_int_distribution<int> any_cluster(0,
                                                   cfg.clusters_per_class - 1);
    for (int i = 0; i < cfg.offclass_words_per_doc; ++i) {
      int cls = other_class(rng);
      if (cls >= label) ++cls;
      ex.tokens.push_back(pick_variant(class_clusters[cls][any_cluster(rng)]));
    }
    const int filled = cfg.signal_words_per_doc + cfg.offclass_words_per_doc;
    for (int i = filled; i < cfg.doc_len; ++i)
      ex.tokens.push_back(pick_neutral());
    std::shuffle(ex.tokens.begin(), ex.tokens.end(), rng);
    return ex;
  };

  data.train.num_classes = cfg.num_classes;
  data.test.num_classes = cfg.num_classes;
  for (int y = 0; y < cfg.num_classes; ++y)
    for (int i = 0; i < cfg.train_per_class; ++i)
      data.train.examples.push_back(make_doc(y));
  for (int y = 0; y < cfg.num_classes; ++y)
    for (int i = 0; i < cfg.test_per_class; ++i)
      data.test.examples.push_back(make_doc(y));

  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(data.train.examples.size());
  for (const auto& ex : data.train.examples) seqs.push_back(ex.tokens);
  data.table.vocab = frequency_from_corpus(std::move(data.table.vocab), seqs);
  return data;
}

// AG's News style export: `"class","title","description"` with a 1-based
// class index.
inline void write_ag_csv(const LabeledDataset& ds, const std::string& path,
                         std::size_t title_tokens = 3) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open csv file for writing: " + path);
  for (const auto& ex : ds.examples) {
    std::vector<std::string> title(
        ex.tokens.begin(),
        ex.tokens.begin() + std::min(title_tokens, ex.tokens.size()));
    std::vector<std::string> body(
        ex.tokens.begin() + std::min(title_tokens, ex.tokens.size()),
        ex.tokens.end());
    out << '"' << ex.label + 1 << "\",\"" << join_tokens(title) << "\",\""
        << join_tokens(body) << "\"\n";
  }
  if (!out) throw IoError("failed writing csv file: " + path);
}

}  // namespace sem
