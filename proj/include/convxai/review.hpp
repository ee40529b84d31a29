#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/aspect.hpp"
#include "convxai/dtw.hpp"
#include "convxai/profile.hpp"
#include "convxai/templates.hpp"

namespace convxai {

enum class ReviewKind { Structure, Style, Length };

std::string_view to_string(ReviewKind kind);

struct ReviewItem {
  ReviewKind kind = ReviewKind::Structure;
  std::size_t sentence_index = 0;
  std::string message;
  AspectLabel current_label = AspectLabel::Other;
  std::optional<AspectLabel> suggested_label;  // Structure only
  std::optional<int> quality_score;            // Style only
  std::optional<std::size_t> token_count;      // Length only
};

struct OverallScores {
  double style = 0.0;
  double structure = 0.0;
  double overall = 0.0;
};

struct AbstractReview {
  std::vector<ReviewItem> items;
  OverallScores scores;
  std::optional<std::size_t> matched_pattern;  // index into the profile's patterns
  std::size_t revision = 0;

  std::size_t count(ReviewKind kind) const;
  std::vector<const ReviewItem*> items_for(std::size_t sentence_index) const;
};

struct ReviewConfig {
  int style_threshold = 2;  // Style item when quality_score <= threshold
};

struct PatternMatch {
  std::size_t pattern_index = 0;
  DtwResult alignment;
};

// The pattern with the smallest 0/1-cost DTW distance (first on ties).
PatternMatch closest_pattern(std::span<const AspectLabel> predicted,
                             std::span<const StructurePattern> patterns);

// For each sentence i, the majority pattern label among the pattern
// positions aligned to i on the optimal path. A tie that includes the
// sentence's current label keeps it; other ties take the tied label that is
// reached first along the path. An item is emitted only where the majority
// label differs from predicted[i].
std::vector<ReviewItem> structure_review(std::span<const AspectLabel> predicted,
                                         std::span<const StructurePattern> patterns,
                                         const TemplateStore& templates = TemplateStore::builtin());

// Style items for quality scores at or below the threshold; Length items for
// token counts outside [p5, p95] of the profile.
std::vector<ReviewItem> style_and_length_review(std::span<const std::string> sentences,
                                                std::span<const AspectLabel> labels,
                                                std::span<const int> quality_scores,
                                                const ConferenceProfile& profile,
                                                const ReviewConfig& config = {},
                                                const TemplateStore& templates = TemplateStore::builtin());

// style = mean(quality), structure = clamp(5 - 0.5 * #Structure, 0, 5),
// overall = mean of the two.
OverallScores overall_scores(std::span<const ReviewItem> items, std::span<const int> quality_scores);

struct SentenceAssessment {
  std::string text;
  AspectLabel label = AspectLabel::Other;
  int quality_score = 3;
};

// Complete review: structure items, style and length items, and the scores.
AbstractReview build_review(std::span<const SentenceAssessment> sentences,
                            const ConferenceProfile& profile, const ReviewConfig& config = {},
                            const TemplateStore& templates = TemplateStore::builtin());

}  // namespace convxai
