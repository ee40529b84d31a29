#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "convxai/corpus.hpp"
#include "json.hpp"

namespace convxai {

inline constexpr int kStyleModelFormatVersion = 1;
inline constexpr std::string_view kBeginToken = "<s>";
inline constexpr std::string_view kEndToken = "</s>";
inline constexpr std::string_view kUnknownToken = "<unk>";

// Additive-smoothed n-gram language model:
//   P(w | h) = (c(h, w) + alpha) / (c(h) + alpha * V)
// where h is the previous n-1 tokens (left-padded with <s>), V counts the
// training word types plus </s> and <unk>, and out-of-vocabulary tokens are
// mapped to <unk>. Every token therefore has positive probability.
class StyleModel {
 public:
  StyleModel(std::size_t order, double alpha);

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }
  std::size_t vocab_size() const { return vocab_.size() + 2; }

  void add_sentence(std::span<const std::string> tokens);

  // Raw counts; `context` holds exactly order()-1 tokens.
  std::uint64_t count(std::span<const std::string> context, std::string_view word) const;
  std::uint64_t context_count(std::span<const std::string> context) const;

  double log_prob(std::span<const std::string> context, std::string_view word) const;
  // Natural-log probability of each predicted token, including </s>.
  std::vector<double> token_log_probs(std::string_view sentence) const;

  nlohmann::json to_json() const;
  static StyleModel from_json(const nlohmann::json& object);
  void save(const std::filesystem::path& path) const;
  static StyleModel load(const std::filesystem::path& path);

 private:
  std::string map_token(std::string_view token) const;
  static std::string join(std::span<const std::string> context, std::string_view word);

  std::size_t order_;
  double alpha_;
  std::unordered_set<std::string> vocab_;
  std::unordered_map<std::string, std::uint64_t> ngram_counts_;
  std::unordered_map<std::string, std::uint64_t> context_counts_;
};

// Trains on every sentence of `corpus`. Throws InvalidInput for n == 0 or a
// non-positive alpha, DegenerateInput for an empty corpus.
StyleModel train_style_lm(const Corpus& corpus, std::size_t n, double alpha);

// exp(-(1/T) * sum(log_probs)); 1 for an empty span.
double perplexity_from_log_probs(std::span<const double> log_probs);

double sentence_perplexity(const StyleModel& model, std::string_view sentence);

// Five-level style score from a perplexity: <= b1 -> 5, <= b2 -> 4,
// <= b3 -> 3, <= b4 -> 2, otherwise 1. Throws InvalidInput on a non-finite
// perplexity or boundaries that are not strictly ascending.
int quantize_quality(double perplexity, const std::array<double, 4>& boundaries);

}  // namespace convxai
