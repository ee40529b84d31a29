#include "convxai/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace convxai {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_closing(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

bool starts_sentence(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isupper(u) != 0 || std::isdigit(u) != 0;
}

constexpr std::array<std::string_view, 16> kAbbreviations = {
    "e.g.", "i.e.", "al.",  "fig.", "figs.", "vs.",  "cf.",   "eq.",
    "eqs.", "dr.",  "mr.",  "ms.",  "no.",   "sec.", "approx.", "resp."};

// The word that ends at `dot` (inclusive), lower-cased, with leading opening
// punctuation stripped.
bool is_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !is_space(text[start - 1])) --start;
  std::string word = to_lower(text.substr(start, dot - start + 1));
  while (!word.empty() && (word.front() == '(' || word.front() == '[' || word.front() == '"')) {
    word.erase(word.begin());
  }
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

void push_trimmed(std::string_view text, std::size_t begin, std::size_t end,
                  std::vector<SentenceSpan>& out) {
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  if (begin < end) out.push_back({begin, end});
}

}  // namespace

std::vector<SentenceSpan> segment_abstract(std::string_view text) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = text.size();
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    while (end < n && is_closing(text[end])) ++end;
    if (end >= n || !is_space(text[end])) continue;
    std::size_t next = end;
    while (next < n && is_space(text[next])) ++next;
    if (next >= n || !starts_sentence(text[next])) continue;
    if (c == '.' && is_abbreviation(text, i)) continue;
    push_trimmed(text, start, end, spans);
    start = end;
    i = end - 1;
  }
  push_trimmed(text, start, n, spans);
  return spans;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& span : segment_abstract(text)) out.emplace_back(span.view(text));
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string normalize_word(std::string_view word) {
  std::string out;
  for (char c : word) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (const auto& word : split_words(text)) {
    auto token = normalize_word(word);
    if (!token.empty()) tokens.push_back(std::move(token));
  }
  return tokens;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace convxai
