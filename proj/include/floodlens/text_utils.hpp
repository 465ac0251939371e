#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace floodlens {

// ASCII-only case folding; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string_view s);

std::string_view trim(std::string_view s);

// Lowercased alphanumeric tokens; every byte outside [0-9A-Za-z] is a
// separator (UTF-8 continuation bytes included, so accented words never
// collide with the ASCII keyword lists).
std::vector<std::string> tokenize(std::string_view text);

std::unordered_set<std::string> token_set(std::string_view text);

// Non-overlapping occurrence count.
std::size_t count_occurrences(std::string_view text, std::string_view needle);

// Whole-word, case-insensitive match of a possibly multi-word phrase.
bool contains_phrase(std::string_view text, std::string_view phrase);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

std::string read_file(const std::string& path); // throws on IO failure

} // namespace floodlens
