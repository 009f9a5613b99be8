#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prism::text {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

/// FNV-1a over the bytes of `data`, with the running hash seeded by `seed`.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset);

std::string to_hex(std::uint64_t value);

/// Lowercases and splits on non-alphanumeric boundaries. Empty tokens dropped.
std::vector<std::string> tokenize_lower(std::string_view text);

/// tokenize_lower restricted to purely alphabetic tokens of length >= min_len.
std::vector<std::string> alpha_tokens(std::string_view text, std::size_t min_len = 2);

/// Number of whitespace-separated words.
std::size_t word_count(std::string_view text);

std::string lowercase(std::string_view text);

}  // namespace prism::text
