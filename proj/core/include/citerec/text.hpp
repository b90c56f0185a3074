#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace citerec {

// Lowercases ASCII, deletes every byte outside the 7-bit range (so multi-byte
// UTF-8 sequences vanish entirely), collapses whitespace runs to one space and
// trims both ends. Idempotent.
std::string preprocess_text(std::string_view raw);

// Maximal runs of ASCII [A-Za-z0-9]. Everything else is a delimiter.
std::vector<std::string> tokenize(std::string_view text);

inline constexpr std::size_t kDefaultMaxAbstractTokens = 512;

// Returns the words after the first word carrying the token "abstract", up to
// (not including) the first word carrying the token "introduction", capped at
// max_tokens words. Words are whitespace-delimited; a word "carries" a token
// when tokenize(word) contains it, so "abstract:" and "1.introduction" count.
// Throws Error(kMissingAbstractMarker) when no word carries "abstract".
std::string extract_abstract(std::string_view full_text,
                             std::size_t max_tokens = kDefaultMaxAbstractTokens);

// First max_tokens whitespace-delimited words; the fallback when a document
// has no abstract marker.
std::string leading_words(std::string_view text, std::size_t max_tokens);

}  // namespace citerec
