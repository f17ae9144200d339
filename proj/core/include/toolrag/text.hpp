#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace toolrag::text {

/// Lowercases ASCII, splits on anything that is not [a-z0-9], drops empties.
/// No stemming and no stop words.
std::vector<std::string> tokenize(std::string_view input);

/// Number of sentences, where a sentence ends at '.', '?' or '!' followed by
/// whitespace or end of input. Trailing text without a terminator counts as one.
std::size_t count_sentences(std::string_view input);

/// Lowercase, strip ASCII punctuation, collapse whitespace runs, trim.
std::string normalize_answer(std::string_view input);

std::string trim(std::string_view input);
std::string to_lower(std::string_view input);
bool starts_with_icase(std::string_view haystack, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view input);

/// 64-bit FNV-1a. Stable across platforms; used for fingerprints and bucket hashing.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string url_encode(std::string_view input);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace toolrag::text
