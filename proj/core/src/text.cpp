#include "citerec/text.hpp"

#include <algorithm>
#include <span>

#include "citerec/error.hpp"

namespace citerec {
namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_ascii_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

bool carries_token(std::string_view word, std::string_view token) {
  const auto tokens = tokenize(word);
  return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
}

std::string join(std::span<const std::string_view> words) {
  std::string out;
  for (const auto w : words) {
    if (!out.empty()) out.push_back(' ');
    out.append(w);
  }
  return out;
}

}  // namespace

std::string preprocess_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (const char ch : raw) {
    const auto byte = static_cast<unsigned char>(ch);
    if (byte >= 0x80) continue;
    if (is_ascii_space(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a')
                                         : ch);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_ascii_alnum(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_ascii_alnum(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string extract_abstract(std::string_view full_text,
                             std::size_t max_tokens) {
  const auto words = split_words(full_text);
  const auto marker = std::find_if(words.begin(), words.end(), [](auto w) {
    return carries_token(w, "abstract");
  });
  if (marker == words.end()) {
    throw Error(ErrorCode::kMissingAbstractMarker,
                "no 'abstract' keyword in document text");
  }
  auto begin = std::next(marker);
  auto end = std::find_if(begin, words.end(), [](auto w) {
    return carries_token(w, "introduction");
  });
  if (static_cast<std::size_t>(std::distance(begin, end)) > max_tokens) {
    end = begin + static_cast<std::ptrdiff_t>(max_tokens);
  }
  const auto offset = static_cast<std::size_t>(begin - words.begin());
  const auto count = static_cast<std::size_t>(end - begin);
  return join(std::span<const std::string_view>(words).subspan(offset, count));
}

std::string leading_words(std::string_view text, std::size_t max_tokens) {
  auto words = split_words(text);
  if (words.size() > max_tokens) words.resize(max_tokens);
  return join(words);
}

}  // namespace citerec
