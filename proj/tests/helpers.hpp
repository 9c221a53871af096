#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sem/embedding.hpp"

namespace testutil {

inline sem::EmbeddingTable make_table(
    const std::vector<std::pair<std::string, std::vector<float>>>& rows,
    const std::vector<std::uint64_t>& freqs = {}) {
  sem::EmbeddingTable table;
  table.dim = static_cast<int>(rows.front().second.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.vocab.add_word(rows[i].first);
    table.vectors.insert(table.vectors.end(), rows[i].second.begin(),
                         rows[i].second.end());
    if (i < freqs.size())
      table.vocab.set_frequency(static_cast<int>(i), freqs[i]);
  }
  return table;
}

inline sem::EmbeddingTable random_table(std::mt19937_64& rng, int words,
                                        int dim, double coord_range = 1.0,
                                        std::uint64_t max_freq = 50) {
  sem::EmbeddingTable table;
  table.dim = dim;
  std::uniform_real_distribution<float> coord(
      -static_cast<float>(coord_range), static_cast<float>(coord_range));
  std::uniform_int_distribution<std::uint64_t> freq(0, max_freq);
  for (int i = 0; i < words; ++i) {
    table.vocab.add_word("w" + std::to_string(i));
    table.vocab.set_frequency(i, freq(rng));
    for (int j = 0; j < dim; ++j) table.vectors.push_back(coord(rng));
  }
  return table;
}

// Self-deleting temp directory for file round-trip tests.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("semtest-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace testutil
