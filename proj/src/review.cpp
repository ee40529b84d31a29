#include "convxai/review.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "convxai/error.hpp"
#include "convxai/format.hpp"
#include "convxai/text.hpp"

namespace convxai {
namespace {

std::string sentence_id(std::size_t index) { return "S" + std::to_string(index + 1); }

std::string format_number(double value) { return format_fixed(value, 0); }

}  // namespace

std::string_view to_string(ReviewKind kind) {
  switch (kind) {
    case ReviewKind::Structure: return "structure";
    case ReviewKind::Style: return "style";
    case ReviewKind::Length: return "length";
  }
  return "structure";
}

std::size_t AbstractReview::count(ReviewKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [kind](const auto& i) { return i.kind == kind; }));
}

std::vector<const ReviewItem*> AbstractReview::items_for(std::size_t sentence_index) const {
  std::vector<const ReviewItem*> out;
  for (const auto& item : items) {
    if (item.sentence_index == sentence_index) out.push_back(&item);
  }
  return out;
}

PatternMatch closest_pattern(std::span<const AspectLabel> predicted,
                             std::span<const StructurePattern> patterns) {
  if (predicted.empty()) throw InvalidInput("structure review needs at least one sentence");
  if (patterns.empty()) throw InvalidInput("structure review needs at least one pattern");
  PatternMatch best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    auto alignment = dtw_align(predicted, patterns[p].sequence);
    if (alignment.distance < best_distance) {
      best_distance = alignment.distance;
      best.pattern_index = p;
      best.alignment = std::move(alignment);
    }
  }
  return best;
}

std::vector<ReviewItem> structure_review(std::span<const AspectLabel> predicted,
                                         std::span<const StructurePattern> patterns,
                                         const TemplateStore& templates) {
  const auto match = closest_pattern(predicted, patterns);
  const auto& pattern = patterns[match.pattern_index];

  struct Tally {
    std::array<std::size_t, kNumAspects> votes{};
    std::array<std::size_t, kNumAspects> first_seen{};
  };
  std::vector<Tally> tallies(predicted.size());
  std::size_t step = 0;
  for (const auto& [i, j] : match.alignment.path) {
    const auto label = index_of(pattern.sequence[j]);
    auto& tally = tallies[i];
    if (tally.votes[label]++ == 0) tally.first_seen[label] = step;
    ++step;
  }

  std::vector<ReviewItem> items;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& tally = tallies[i];
    const std::size_t top = *std::max_element(tally.votes.begin(), tally.votes.end());
    if (tally.votes[index_of(predicted[i])] == top) continue;
    std::size_t chosen = kNumAspects;
    for (std::size_t c = 0; c < kNumAspects; ++c) {
      if (tally.votes[c] != top) continue;
      if (chosen == kNumAspects || tally.first_seen[c] < tally.first_seen[chosen]) chosen = c;
    }
    ReviewItem item;
    item.kind = ReviewKind::Structure;
    item.sentence_index = i;
    item.current_label = predicted[i];
    item.suggested_label = aspect_at(chosen);
    item.message = templates.render(
        "review.structure", {{"sentence", sentence_id(i)},
                             {"current", std::string(to_string(predicted[i]))},
                             {"suggested", std::string(to_string(aspect_at(chosen)))},
                             {"pattern", pattern.display_form()}});
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<ReviewItem> style_and_length_review(std::span<const std::string> sentences,
                                                std::span<const AspectLabel> labels,
                                                std::span<const int> quality_scores,
                                                const ConferenceProfile& profile,
                                                const ReviewConfig& config,
                                                const TemplateStore& templates) {
  if (sentences.size() != quality_scores.size() || sentences.size() != labels.size()) {
    throw InvalidInput("sentences, labels and quality scores must have equal length");
  }
  std::vector<ReviewItem> items;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (quality_scores[i] <= config.style_threshold) {
      ReviewItem item;
      item.kind = ReviewKind::Style;
      item.sentence_index = i;
      item.current_label = labels[i];
      item.quality_score = quality_scores[i];
      item.message = templates.render(
          "review.style", {{"sentence", sentence_id(i)},
                           {"score", std::to_string(quality_scores[i])},
                           {"threshold", std::to_string(config.style_threshold)},
                           {"conference", profile.conference}});
      items.push_back(std::move(item));
    }
    const auto tokens = tokenize(sentences[i]).size();
    const auto length = static_cast<double>(tokens);
    if (length < profile.length_stats.p5 || length > profile.length_stats.p95) {
      ReviewItem item;
      item.kind = ReviewKind::Length;
      item.sentence_index = i;
      item.current_label = labels[i];
      item.token_count = tokens;
      item.message = templates.render(
          "review.length", {{"sentence", sentence_id(i)},
                            {"tokens", std::to_string(tokens)},
                            {"direction", length > profile.length_stats.p95 ? "long" : "short"},
                            {"low", format_number(profile.length_stats.p5)},
                            {"high", format_number(profile.length_stats.p95)},
                            {"conference", profile.conference}});
      items.push_back(std::move(item));
    }
  }
  return items;
}

OverallScores overall_scores(std::span<const ReviewItem> items, std::span<const int> quality_scores) {
  if (quality_scores.empty()) throw InvalidInput("overall scores need at least one quality score");
  OverallScores scores;
  double total = 0.0;
  for (int q : quality_scores) total += q;
  scores.style = total / static_cast<double>(quality_scores.size());
  const auto structure_items = std::count_if(
      items.begin(), items.end(), [](const auto& i) { return i.kind == ReviewKind::Structure; });
  scores.structure = std::clamp(5.0 - 0.5 * static_cast<double>(structure_items), 0.0, 5.0);
  scores.overall = (scores.style + scores.structure) / 2.0;
  return scores;
}

AbstractReview build_review(std::span<const SentenceAssessment> sentences,
                            const ConferenceProfile& profile, const ReviewConfig& config,
                            const TemplateStore& templates) {
  if (sentences.empty()) throw InvalidInput("cannot review an abstract without sentences");
  std::vector<AspectLabel> labels;
  std::vector<std::string> texts;
  std::vector<int> quality;
  for (const auto& s : sentences) {
    labels.push_back(s.label);
    texts.push_back(s.text);
    quality.push_back(s.quality_score);
  }
  AbstractReview review;
  review.matched_pattern = closest_pattern(labels, profile.patterns).pattern_index;
  review.items = structure_review(labels, profile.patterns, templates);
  auto other = style_and_length_review(texts, labels, quality, profile, config, templates);
  review.items.insert(review.items.end(), other.begin(), other.end());
  std::stable_sort(review.items.begin(), review.items.end(), [](const auto& a, const auto& b) {
    if (a.sentence_index != b.sentence_index) return a.sentence_index < b.sentence_index;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  review.scores = overall_scores(review.items, quality);
  return review;
}

}  // namespace convxai
