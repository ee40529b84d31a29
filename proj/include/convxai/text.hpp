#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace convxai {

// Half-open byte range [begin, end) into the source text.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  std::string_view view(std::string_view text) const {
    return text.substr(begin, end - begin);
  }
  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

// Splits plain text into sentences. A split happens after '.', '!' or '?'
// (optionally followed by closing quotes/brackets) when the next
// non-whitespace character is an upper-case letter or a digit, unless the
// word carrying the period is a known abbreviation (e.g., i.e., et al., Fig.,
// vs., ...). Spans are trimmed of surrounding whitespace and never empty.
std::vector<SentenceSpan> segment_abstract(std::string_view text);

// Convenience: the sentence strings for segment_abstract(text).
std::vector<std::string> split_sentences(std::string_view text);

// Whitespace-separated surface words, punctuation kept.
std::vector<std::string> split_words(std::string_view text);

// Lower-cased alphanumeric content of a surface word; empty when the word
// is pure punctuation.
std::string normalize_word(std::string_view word);

// Normalized non-empty tokens of a sentence, in order.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

// Collapses every whitespace run to a single space and trims.
std::string normalize_whitespace(std::string_view text);

}  // namespace convxai
