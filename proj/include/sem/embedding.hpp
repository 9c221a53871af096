#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sem/common.hpp"
#include "sem/parallel.hpp"
#include "sem/vocab.hpp"

namespace sem {

// Row-major n x dim matrix of word vectors plus the vocabulary that indexes
// it. Immutable after load; safe to share across threads.
struct EmbeddingTable {
  Vocabulary vocab;
  int dim = 0;
  std::vector<float> vectors;

  std::span<const float> vector_of(int id) const {
    return {vectors.data() + static_cast<std::size_t>(id) * dim,
            static_cast<std::size_t>(dim)};
  }

  std::optional<std::span<const float>> vector_of(std::string_view word) const {
    int id = vocab.id_of(word);
    if (id < 0) return std::nullopt;
    return vector_of(id);
  }
};

struct SynonymMember {
  std::string token;
  double distance = 0.0;
  bool operator==(const SynonymMember&) const = default;
};

// Syn(w, delta, k): the k nearest words to `source` strictly within `delta`
// under Euclidean distance, ascending, ties by vocabulary id.
struct SynonymSet {
  std::string source;
  std::vector<SynonymMember> members;
};

using SynonymMap = std::unordered_map<std::string, SynonymSet>;

namespace detail {

struct Neighbor {
  int id;
  double squared;
};

// Accumulates squared Euclidean distance strictly left to right (so a full
// sum is bitwise reproducible no matter how it is called), giving up once
// the partial sum exceeds `bound`. The exit test is strict: an exact tie
// with the bound is never truncated early.
inline double squared_distance_bounded(const float* a, const float* b, int dim,
                                       double bound) {
  double acc = 0.0;
  int i = 0;
  for (; i + 8 <= dim; i += 8) {
    for (int j = 0; j < 8; ++j) {
      const double d = static_cast<double>(a[i + j]) - b[i + j];
      acc += d * d;
    }
    if (acc > bound) return acc;
  }
  for (; i < dim; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return acc;
}

inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  if (a.squared != b.squared) return a.squared < b.squared;
  return a.id < b.id;
}

// Exact top-k scan for one query id. Results sorted by (distance, id).
inline std::vector<Neighbor> knn_scan(const EmbeddingTable& table, int query,
                                      double delta, int k) {
  const double delta2 = delta * delta;
  const float* q = table.vectors.data() +
                   static_cast<std::size_t>(query) * table.dim;
  std::vector<Neighbor> heap;  // max-heap on (squared, id)
  heap.reserve(k + 1);
  auto cmp = [](const Neighbor& a, const Neighbor& b) {
    return neighbor_less(a, b);
  };
  const int n = static_cast<int>(table.vocab.size());
  for (int id = 0; id < n; ++id) {
    if (id == query) continue;
    const bool full = static_cast<int>(heap.size()) == k;
    const double bound = full ? heap.front().squared : delta2;
    const float* v = table.vectors.data() +
                     static_cast<std::size_t>(id) * table.dim;
    const double d2 = squared_distance_bounded(q, v, table.dim, bound);
    if (d2 >= delta2) continue;
    const Neighbor cand{id, d2};
    if (!full) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), cmp);
    } else if (neighbor_less(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), cmp);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), cmp);
    }
  }
  std::sort(heap.begin(), heap.end(), cmp);
  return heap;
}

}  // namespace detail

inline double squared_distance(std::span<const float> a,
                               std::span<const float> b) {
  return detail::squared_distance_bounded(
      a.data(), b.data(), static_cast<int>(a.size()),
      std::numeric_limits<double>::infinity());
}

// Synonym neighborhoods for every word, id-indexed. This is the structure
// the encoder and the attacks consume; `all_pairs_synonyms` is its
// token-keyed view.
struct SynonymIndex {
  double delta = 0.0;
  int k = 0;
  std::vector<std::vector<detail::Neighbor>> neighbors;  // by word id

  SynonymSet set_for(const EmbeddingTable& table, int id) const {
    SynonymSet out;
    out.source = table.vocab.word(id);
    out.members.reserve(neighbors[id].size());
    for (const auto& nb : neighbors[id])
      out.members.push_back({table.vocab.word(nb.id), std::sqrt(nb.squared)});
    return out;
  }
};

inline SynonymIndex build_synonym_index(const EmbeddingTable& table,
                                        double delta, int k,
                                        unsigned threads = 1) {
  if (delta < 0) throw PreconditionError("delta must be non-negative");
  if (k < 1) throw PreconditionError("k must be positive");
  SynonymIndex index;
  index.delta = delta;
  index.k = k;
  index.neighbors.resize(table.vocab.size());
  parallel_for(table.vocab.size(), threads, [&](std::size_t i) {
    index.neighbors[i] =
        detail::knn_scan(table, static_cast<int>(i), delta, k);
  });
  return index;
}

inline SynonymSet synonyms(const EmbeddingTable& table, std::string_view word,
                           double delta, int k) {
  const int id = table.vocab.id_of(word);
  if (id < 0)
    throw PreconditionError("word not in vocabulary: '" + std::string(word) +
                            "'");
  if (delta <= 0) throw PreconditionError("delta must be positive");
  if (k < 1) throw PreconditionError("k must be positive");
  SynonymSet out;
  out.source = std::string(word);
  for (const auto& nb : detail::knn_scan(table, id, delta, k))
    out.members.push_back({table.vocab.word(nb.id), std::sqrt(nb.squared)});
  return out;
}

inline SynonymMap all_pairs_synonyms(const EmbeddingTable& table, double delta,
                                     int k, unsigned threads = 1) {
  const SynonymIndex index = build_synonym_index(table, delta, k, threads);
  SynonymMap map;
  map.reserve(table.vocab.size());
  for (std::size_t i = 0; i < table.vocab.size(); ++i)
    map.emplace(table.vocab.word(static_cast<int>(i)),
                index.set_for(table, static_cast<int>(i)));
  return map;
}

// GloVe text convention: `token c1 c2 ... cd` per line, consistent d.
inline EmbeddingTable load_embeddings(const std::string& path,
                                      std::size_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file: " + path);
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (limit > 0 && table.vocab.size() >= limit) break;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    auto skip_ws = [&] {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    };
    skip_ws();
    const char* tok_begin = p;
    while (p < end && *p != ' ' && *p != '\t' && *p != '\r') ++p;
    if (tok_begin == p) continue;  // whitespace-only line
    std::string token(tok_begin, p);
    if (table.vocab.contains(token))
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": duplicate token '" + token + "'");
    std::vector<float> row;
    if (table.dim > 0) row.reserve(table.dim);
    while (true) {
      skip_ws();
      if (p >= end) break;
      float value = 0.0f;
      auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc{} ||
          (next < end && *next != ' ' && *next != '\t' && *next != '\r'))
        throw ParseError(path + " line " + std::to_string(line_no) +
                         ": bad numeric component '" +
                         std::string(p, std::min(end, p + 16)) + "'");
      if (!std::isfinite(value))
        throw ParseError(path + " line " + std::to_string(line_no) +
                         ": non-finite component");
      row.push_back(value);
      p = next;
    }
    if (row.empty())
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": no vector components");
    if (table.dim == 0) {
      table.dim = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != table.dim) {
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": expected " + std::to_string(table.dim) +
                       " components, got " + std::to_string(row.size()));
    }
    table.vocab.add_word(std::move(token));
    table.vectors.insert(table.vectors.end(), row.begin(), row.end());
  }
  if (table.vocab.size() == 0)
    throw ParseError(path + ": no embedding rows");
  return table;
}

inline void save_embeddings(const EmbeddingTable& table,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open embedding file for writing: " + path);
  char buf[64];
  for (std::size_t i = 0; i < table.vocab.size(); ++i) {
    out << table.vocab.word(static_cast<int>(i));
    auto row = table.vector_of(static_cast<int>(i));
    for (float v : row) {
      std::snprintf(buf, sizeof(buf), " %.9g", v);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing embedding file: " + path);
}

}  // namespace sem
