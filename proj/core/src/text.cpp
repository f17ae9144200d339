#include "toolrag/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace toolrag::text {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : input) {
    if (is_alnum(c)) {
      current.push_back(lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t count_sentences(std::string_view input) {
  std::size_t count = 0;
  bool pending = false;  // non-space content since the last terminator
  for (std::size_t i = 0; i < input.size(); ++i) {
    char c = input[i];
    bool terminator = (c == '.' || c == '?' || c == '!');
    bool boundary = terminator && (i + 1 == input.size() || is_space(input[i + 1]));
    if (boundary) {
      ++count;
      pending = false;
    } else if (!is_space(c)) {
      pending = true;
    }
  }
  if (pending) ++count;
  return count;
}

std::string normalize_answer(std::string_view input) {
  std::string out;
  bool space = false;
  for (char c : input) {
    if (std::ispunct(static_cast<unsigned char>(c))) continue;
    if (is_space(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(lower(c));
  }
  return out;
}

std::string trim(std::string_view input) {
  std::size_t begin = 0;
  std::size_t end = input.size();
  while (begin < end && is_space(input[begin])) ++begin;
  while (end > begin && is_space(input[end - 1])) --end;
  return std::string(input.substr(begin, end - begin));
}

std::string to_lower(std::string_view input) {
  std::string out(input);
  for (char& c : out) c = lower(c);
  return out;
}

bool starts_with_icase(std::string_view haystack, std::string_view prefix) {
  if (prefix.size() > haystack.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower(haystack[i]) != lower(prefix[i])) return false;
  }
  return true;
}

std::vector<std::string> split_lines(std::string_view input) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= input.size()) {
    std::size_t end = input.find('\n', start);
    if (end == std::string_view::npos) end = input.size();
    std::string_view line = input.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t hash = seed;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string url_encode(std::string_view input) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : input) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kDigits[c >> 4]);
      out.push_back(kDigits[c & 0xf]);
    }
  }
  return out;
}

std::string format_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("format_double: non-finite value");
  std::array<char, 64> buffer{};
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buffer.data(), ptr);
}

}  // namespace toolrag::text
