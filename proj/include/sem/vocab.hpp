#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sem/common.hpp"

namespace sem {

// Dense-id word dictionary. Ids are 0..size()-1 in insertion order.
class Vocabulary {
 public:
  int add_word(std::string word) {
    if (word.empty()) throw PreconditionError("vocabulary word is empty");
    for (unsigned char c : word)
      if (std::isspace(c))
        throw PreconditionError("vocabulary word contains whitespace: '" +
                                word + "'");
    auto [it, inserted] = index_.emplace(word, static_cast<int>(words_.size()));
    if (!inserted)
      throw PreconditionError("duplicate vocabulary word: '" + word + "'");
    words_.push_back(std::move(word));
    frequency_.push_back(0);
    return it->second;
  }

  bool contains(std::string_view word) const {
    return index_.find(std::string(word)) != index_.end();
  }

  // -1 when absent.
  int id_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? -1 : it->second;
  }

  const std::string& word(int id) const { return words_[id]; }
  std::uint64_t frequency(int id) const { return frequency_[id]; }
  std::uint64_t frequency_of(std::string_view word) const {
    int id = id_of(word);
    return id < 0 ? 0 : frequency_[id];
  }
  void set_frequency(int id, std::uint64_t count) { frequency_[id] = count; }
  void bump_frequency(int id) { ++frequency_[id]; }

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& frequencies() const { return frequency_; }

  void clear_frequencies() {
    std::fill(frequency_.begin(), frequency_.end(), 0);
  }

  // Word ids sorted by frequency descending, ties by id ascending.
  std::vector<int> ids_by_frequency() const {
    std::vector<int> ids(words_.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    std::sort(ids.begin(), ids.end(), [this](int a, int b) {
      if (frequency_[a] != frequency_[b]) return frequency_[a] > frequency_[b];
      return a < b;
    });
    return ids;
  }

  // Hash of the word list alone. Frequencies are deliberately left out:
  // the digest guards file/vocabulary pairings at load time, and counts
  // differ between pipeline stages over the same dictionary.
  std::string digest() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const std::string& w : words_) {
      h = detail::fnv1a64(w, h);
      h = detail::fnv1a64("\n", h);
    }
    return detail::hex64(h);
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> frequency_;
  std::unordered_map<std::string, int> index_;
};

// Occurrence counts over a corpus of token sequences. Corpus tokens outside
// the vocabulary are ignored; vocabulary words missing from the corpus keep
// count zero.
template <typename TokenSeqRange>
Vocabulary frequency_from_corpus(Vocabulary vocab,
                                 const TokenSeqRange& corpus) {
  vocab.clear_frequencies();
  for (const auto& tokens : corpus) {
    for (const auto& token : tokens) {
      int id = vocab.id_of(token);
      if (id >= 0) vocab.bump_frequency(id);
    }
  }
  return vocab;
}

// token<TAB>count lines, count descending then id ascending.
inline void save_frequencies(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open frequency file for writing: " + path);
  for (int id : vocab.ids_by_frequency())
    out << vocab.word(id) << '\t' << vocab.frequency(id) << '\n';
  if (!out) throw IoError("failed writing frequency file: " + path);
}

// Applies counts from a token<TAB>count file to an existing vocabulary.
// Unknown tokens in the file are ignored.
inline void load_frequencies(Vocabulary& vocab, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frequency file: " + path);
  vocab.clear_frequencies();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("frequency file " + path + " line " +
                       std::to_string(line_no) + ": missing tab separator");
    std::string token = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError("frequency file " + path + " line " +
                       std::to_string(line_no) + ": bad count");
    }
    int id = vocab.id_of(token);
    if (id >= 0) vocab.set_frequency(id, count);
  }
}

}  // namespace sem
