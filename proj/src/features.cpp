#include "convxai/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "convxai/error.hpp"
#include "convxai/text.hpp"

namespace convxai {
namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv_mix(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t finalize(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

}  // namespace

double SparseVector::norm() const {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

double SparseVector::get(std::uint32_t index) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), index);
  if (it == indices.end() || *it != index) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

double dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] == b.indices[j]) {
      sum += a.values[i++] * b.values[j++];
    } else if (a.indices[i] < b.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

HashedFeaturizer::HashedFeaturizer(FeaturizerConfig config) : config_(config) {
  if (config_.dim == 0) throw InvalidInput("feature dimension must be positive");
}

std::uint32_t HashedFeaturizer::bucket(char tag, std::string_view a, std::string_view b) const {
  std::uint64_t h = kFnvOffset;
  for (int shift = 0; shift < 64; shift += 8) {
    h ^= (config_.seed >> shift) & 0xffu;
    h *= kFnvPrime;
  }
  h = fnv_mix(h, std::string_view(&tag, 1));
  h = fnv_mix(h, a);
  if (!b.empty()) {
    h = fnv_mix(h, "\x1f");
    h = fnv_mix(h, b);
  }
  return static_cast<std::uint32_t>(finalize(h) % config_.dim);
}

std::uint32_t HashedFeaturizer::unigram_feature(std::string_view token) const {
  return bucket('u', token, {});
}

std::uint32_t HashedFeaturizer::bigram_feature(std::string_view first,
                                               std::string_view second) const {
  return bucket('b', first, second);
}

FeaturizedSentence HashedFeaturizer::featurize(std::string_view sentence) const {
  FeaturizedSentence out;
  out.words = split_words(sentence);
  std::vector<std::pair<std::size_t, std::string>> tokens;  // (word index, token)
  for (std::size_t w = 0; w < out.words.size(); ++w) {
    auto token = normalize_word(out.words[w]);
    if (!token.empty()) tokens.emplace_back(w, std::move(token));
  }
  for (const auto& [w, token] : tokens) {
    out.occurrences.push_back({unigram_feature(token), w, w});
  }
  if (config_.bigrams) {
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      out.occurrences.push_back({bigram_feature(tokens[t - 1].second, tokens[t].second),
                                 tokens[t - 1].first, tokens[t].first});
    }
  }
  std::map<std::uint32_t, double> folded;
  for (const auto& occ : out.occurrences) folded[occ.feature] += 1.0;
  for (const auto& [index, value] : folded) {
    out.counts.indices.push_back(index);
    out.counts.values.push_back(value);
  }
  return out;
}

SparseVector HashedFeaturizer::counts(std::string_view sentence) const {
  return featurize(sentence).counts;
}

}  // namespace convxai
