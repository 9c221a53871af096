#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sem {

inline constexpr std::string_view kVersion = "0.1.0";

// Token used by attacks to blank out a word while keeping sequence length.
// Models treat it as an in-vocabulary word with an all-zero vector.
inline constexpr std::string_view kUnknownToken = "<unk>";

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (bad arity, non-numeric field, duplicate token, ...).
struct ParseError : Error {
  using Error::Error;
};

// Missing or unreadable file.
struct IoError : Error {
  using Error::Error;
};

// Violated operation precondition (unknown word, empty dataset, ...).
struct PreconditionError : Error {
  using Error::Error;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    state ^= c;
    state *= 0x100000001b3ull;
  }
  return state;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t value, std::uint64_t state) {
  for (int i = 0; i < 8; ++i) {
    state ^= (value >> (8 * i)) & 0xff;
    state *= 0x100000001b3ull;
  }
  return state;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace detail

}  // namespace sem
