#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace convxai {

// Sparse vector with strictly ascending indices.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  double norm() const;
  double get(std::uint32_t index) const;
};

double dot(const SparseVector& a, const SparseVector& b);

struct FeaturizerConfig {
  std::uint32_t dim = 1u << 14;
  std::uint64_t seed = 0x5eed;
  bool bigrams = true;

  friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;
};

// One hashed feature firing. Unigrams belong to one surface word; bigrams
// to two adjacent (non-empty) words.
struct FeatureOccurrence {
  std::uint32_t feature = 0;
  std::size_t first_word = 0;
  std::size_t second_word = 0;  // == first_word for unigrams
  bool is_bigram() const { return first_word != second_word; }
};

struct FeaturizedSentence {
  std::vector<std::string> words;                // surface words
  std::vector<FeatureOccurrence> occurrences;
  SparseVector counts;                           // occurrences folded by feature
};

// Hashes normalized word unigrams and bigrams into a fixed-size space.
class HashedFeaturizer {
 public:
  explicit HashedFeaturizer(FeaturizerConfig config = {});

  const FeaturizerConfig& config() const { return config_; }
  std::uint32_t dim() const { return config_.dim; }

  FeaturizedSentence featurize(std::string_view sentence) const;
  SparseVector counts(std::string_view sentence) const;

  std::uint32_t unigram_feature(std::string_view token) const;
  std::uint32_t bigram_feature(std::string_view first, std::string_view second) const;

 private:
  std::uint32_t bucket(char tag, std::string_view a, std::string_view b) const;
  FeaturizerConfig config_;
};

}  // namespace convxai
