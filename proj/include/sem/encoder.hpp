#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sem/common.hpp"
#include "sem/embedding.hpp"

namespace sem {

enum class TraverseKind { Frequency, FixedPrefix, Random };

// Order in which words are visited while building the encoder. Frequency
// order visits descending frequency (ties by id). FixedPrefix keeps the
// first `count` words in frequency order and shuffles the remainder;
// count=0 is a full shuffle, equivalent to Random.
struct TraverseOrder {
  TraverseKind kind = TraverseKind::Frequency;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  static TraverseOrder frequency() { return {TraverseKind::Frequency, 0, 0}; }
  static TraverseOrder fixed_prefix(std::size_t count, std::uint64_t seed) {
    return {TraverseKind::FixedPrefix, count, seed};
  }
  static TraverseOrder random(std::uint64_t seed) {
    return {TraverseKind::Random, 0, seed};
  }

  bool operator==(const TraverseOrder&) const = default;

  std::string describe() const {
    switch (kind) {
      case TraverseKind::Frequency:
        return "frequency";
      case TraverseKind::FixedPrefix:
        return "prefix " + std::to_string(count) + " " + std::to_string(seed);
      case TraverseKind::Random:
        return "random " + std::to_string(seed);
    }
    return "frequency";
  }
};

inline std::vector<int> traversal_ids(const Vocabulary& vocab,
                                      const TraverseOrder& order) {
  std::vector<int> ids = vocab.ids_by_frequency();
  std::size_t fixed = 0;
  switch (order.kind) {
    case TraverseKind::Frequency:
      return ids;
    case TraverseKind::FixedPrefix:
      fixed = std::min(order.count, ids.size());
      break;
    case TraverseKind::Random:
      fixed = 0;
      break;
  }
  std::mt19937_64 rng(order.seed);
  std::shuffle(ids.begin() + fixed, ids.end(), rng);
  return ids;
}

// Word -> code map over the build-time vocabulary. Codes are fixpoints:
// mapping[mapping[w]] == mapping[w]. Words outside the domain pass through
// encode() unchanged.
class SynonymEncoder {
 public:
  SynonymEncoder() = default;
  SynonymEncoder(std::unordered_map<std::string, std::string> mapping,
                 double delta, int k, TraverseOrder order,
                 std::string vocab_digest)
      : mapping_(std::move(mapping)),
        delta_(delta),
        k_(k),
        order_(order),
        vocab_digest_(std::move(vocab_digest)) {}

  std::string encode(const std::string& word) const {
    auto it = mapping_.find(word);
    return it == mapping_.end() ? word : it->second;
  }

  std::vector<std::string> encode_text(
      const std::vector<std::string>& tokens) const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(encode(t));
    return out;
  }

  bool is_identity() const {
    for (const auto& [word, code] : mapping_)
      if (word != code) return false;
    return true;
  }

  const std::unordered_map<std::string, std::string>& mapping() const {
    return mapping_;
  }
  double delta() const { return delta_; }
  int k() const { return k_; }
  const TraverseOrder& order() const { return order_; }
  const std::string& vocab_digest() const { return vocab_digest_; }

  bool operator==(const SynonymEncoder& other) const {
    return mapping_ == other.mapping_ && delta_ == other.delta_ &&
           k_ == other.k_ && order_ == other.order_ &&
           vocab_digest_ == other.vocab_digest_;
  }

 private:
  std::unordered_map<std::string, std::string> mapping_;
  double delta_ = 0.0;
  int k_ = 0;
  TraverseOrder order_;
  std::string vocab_digest_;
};

// Builds the encoder by traversing words in `order`. An unvisited, uncoded
// word adopts the code of its closest already-coded synonym if one exists,
// otherwise codes to itself; either way its code is then propagated to all
// of its still-uncoded synonyms.
inline SynonymEncoder build_encoder(const EmbeddingTable& table, double delta,
                                    int k, TraverseOrder order,
                                    const SynonymIndex* prebuilt = nullptr,
                                    unsigned threads = 1) {
  if (table.vocab.size() == 0)
    throw PreconditionError("cannot build encoder on empty table");
  if (delta < 0) throw PreconditionError("delta must be non-negative");
  if (k < 1) throw PreconditionError("k must be positive");

  SynonymIndex local;
  const SynonymIndex* index = prebuilt;
  if (index == nullptr) {
    local = build_synonym_index(table, delta, k, threads);
    index = &local;
  }

  const int n = static_cast<int>(table.vocab.size());
  constexpr int kNone = -1;
  std::vector<int> code(n, kNone);
  for (int wi : traversal_ids(table.vocab, order)) {
    if (code[wi] != kNone) continue;
    const auto& nbs = index->neighbors[wi];
    int adopted = kNone;
    for (const auto& nb : nbs) {  // sorted by (distance, id)
      if (code[nb.id] != kNone) {
        adopted = code[nb.id];
        break;
      }
    }
    code[wi] = adopted != kNone ? adopted : wi;
    for (const auto& nb : nbs)
      if (code[nb.id] == kNone) code[nb.id] = code[wi];
  }

  std::unordered_map<std::string, std::string> mapping;
  mapping.reserve(n);
  for (int i = 0; i < n; ++i)
    mapping.emplace(table.vocab.word(i), table.vocab.word(code[i]));
  return SynonymEncoder(std::move(mapping), delta, k, order,
                        table.vocab.digest());
}

struct EncoderInvariantReport {
  std::size_t idempotence_violations = 0;
  std::size_t linkage_violations = 0;
  std::size_t frequency_violations = 0;
  bool ok() const {
    return idempotence_violations == 0 && linkage_violations == 0 &&
           frequency_violations == 0;
  }
};

// Checks idempotence, the within-delta witness for every non-fixpoint word,
// and (frequency order only) that a code is at least as frequent as every
// word it covers.
inline EncoderInvariantReport check_encoder_invariants(
    const SynonymEncoder& enc, const EmbeddingTable& table,
    const SynonymIndex& index) {
  EncoderInvariantReport report;
  const int n = static_cast<int>(table.vocab.size());

  std::vector<int> code(n, -1);
  for (int i = 0; i < n; ++i) {
    auto it = enc.mapping().find(table.vocab.word(i));
    if (it != enc.mapping().end()) code[i] = table.vocab.id_of(it->second);
  }
  for (int i = 0; i < n; ++i) {
    if (code[i] < 0 || code[code[i]] != code[i]) ++report.idempotence_violations;
  }

  // Witness search over forward plus reverse synonym edges; both are within
  // delta by symmetry of the distance.
  std::vector<std::vector<int>> reverse_edges(n);
  for (int i = 0; i < n; ++i)
    for (const auto& nb : index.neighbors[i]) reverse_edges[nb.id].push_back(i);
  for (int i = 0; i < n; ++i) {
    if (code[i] == i) continue;
    bool linked = false;
    for (const auto& nb : index.neighbors[i]) {
      if (code[nb.id] == code[i]) {
        linked = true;
        break;
      }
    }
    if (!linked)
      for (int src : reverse_edges[i]) {
        if (code[src] == code[i]) {
          linked = true;
          break;
        }
      }
    if (!linked) ++report.linkage_violations;
  }

  if (enc.order().kind == TraverseKind::Frequency) {
    for (int i = 0; i < n; ++i)
      if (code[i] >= 0 &&
          table.vocab.frequency(code[i]) < table.vocab.frequency(i))
        ++report.frequency_violations;
  }
  return report;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view text, const std::string& context) {
  double v = 0.0;
  auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || next != text.data() + text.size())
    throw ParseError(context + ": bad number '" + std::string(text) + "'");
  return v;
}

}  // namespace detail

inline void save_encoder(const SynonymEncoder& enc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open encoder file for writing: " + path);
  out << "sem-encoder v1\n";
  out << "delta " << detail::format_double(enc.delta()) << '\n';
  out << "k " << enc.k() << '\n';
  out << "order " << enc.order().describe() << '\n';
  out << "vocab " << enc.vocab_digest() << '\n';
  out << "entries " << enc.mapping().size() << '\n';
  std::vector<const std::pair<const std::string, std::string>*> rows;
  rows.reserve(enc.mapping().size());
  for (const auto& kv : enc.mapping()) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(),
            [](auto* a, auto* b) { return a->first < b->first; });
  for (auto* kv : rows) out << kv->first << '\t' << kv->second << '\n';
  if (!out) throw IoError("failed writing encoder file: " + path);
}

// `expected_vocab_digest`, when non-empty, must match the digest stored at
// build time.
inline SynonymEncoder load_encoder(const std::string& path,
                                   const std::string& expected_vocab_digest =
                                       std::string()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open encoder file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "sem-encoder v1")
    throw ParseError(path + ": not a v1 encoder file");

  auto expect_field = [&](const std::string& key) {
    if (!std::getline(in, line) || line.rfind(key + " ", 0) != 0)
      throw ParseError(path + ": missing '" + key + "' header field");
    return line.substr(key.size() + 1);
  };
  const double delta = detail::parse_double(expect_field("delta"), path);
  int k = 0;
  try {
    k = std::stoi(expect_field("k"));
  } catch (const std::exception&) {
    throw ParseError(path + ": bad k");
  }
  const std::string order_text = expect_field("order");
  TraverseOrder order;
  {
    std::size_t sp = order_text.find(' ');
    std::string kind = order_text.substr(0, sp);
    try {
      if (kind == "frequency") {
        order = TraverseOrder::frequency();
      } else if (kind == "prefix") {
        std::size_t sp2 = order_text.find(' ', sp + 1);
        order = TraverseOrder::fixed_prefix(
            std::stoull(order_text.substr(sp + 1, sp2 - sp - 1)),
            std::stoull(order_text.substr(sp2 + 1)));
      } else if (kind == "random") {
        order = TraverseOrder::random(std::stoull(order_text.substr(sp + 1)));
      } else {
        throw ParseError(path + ": unknown order kind '" + kind + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(path + ": bad order spec '" + order_text + "'");
    }
  }
  const std::string digest = expect_field("vocab");
  if (!expected_vocab_digest.empty() && digest != expected_vocab_digest)
    throw ParseError(path + ": vocabulary digest mismatch (file " + digest +
                     ", expected " + expected_vocab_digest + ")");
  std::size_t entries = 0;
  try {
    entries = std::stoull(expect_field("entries"));
  } catch (const std::exception&) {
    throw ParseError(path + ": bad entry count");
  }

  std::unordered_map<std::string, std::string> mapping;
  mapping.reserve(entries);
  for (std::size_t i = 0; i < entries; ++i) {
    if (!std::getline(in, line))
      throw ParseError(path + ": truncated, expected " +
                       std::to_string(entries) + " entries, got " +
                       std::to_string(i));
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + ": entry " + std::to_string(i + 1) +
                       " has no tab separator");
    mapping.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  if (mapping.size() != entries)
    throw ParseError(path + ": duplicate entries in mapping");
  return SynonymEncoder(std::move(mapping), delta, k, order, digest);
}

}  // namespace sem
