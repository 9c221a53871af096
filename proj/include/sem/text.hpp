#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace sem {

namespace detail {

inline bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }
inline bool is_punct_byte(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace detail

// Lowercases ASCII letters, splits on whitespace, strips punctuation that
// surrounds a word ("(hello," -> "hello"). Bytes above 0x7f pass through
// untouched so UTF-8 text stays valid.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space_byte(text[i])) ++i;
    std::size_t begin = i;
    while (i < text.size() && !detail::is_space_byte(text[i])) ++i;
    if (i == begin) break;
    std::size_t end = i;
    while (begin < end && detail::is_punct_byte(text[begin])) ++begin;
    while (end > begin && detail::is_punct_byte(text[end - 1])) --end;
    if (begin == end) continue;
    std::string token;
    token.reserve(end - begin);
    for (std::size_t j = begin; j < end; ++j) {
      unsigned char c = text[j];
      token.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                               : static_cast<char>(c));
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace sem
