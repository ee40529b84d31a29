#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace convxai {

// The ten explanation question types plus Fallback.
enum class Intent : int {
  DataStats = 0,
  ModelDescription,
  QualityScoreMeaning,
  LabelDistribution,
  SentenceLength,
  Confidence,
  Example,
  Attribution,
  Counterfactual,
  Suggestion,
  Fallback,
};

inline constexpr std::size_t kNumExplanationIntents = 10;

inline constexpr std::array<Intent, kNumExplanationIntents> kExplanationIntents = {
    Intent::DataStats,    Intent::ModelDescription, Intent::QualityScoreMeaning,
    Intent::LabelDistribution, Intent::SentenceLength, Intent::Confidence,
    Intent::Example,      Intent::Attribution,      Intent::Counterfactual,
    Intent::Suggestion};

// Wire name, e.g. "counterfactual".
std::string_view to_string(Intent intent);
std::optional<Intent> parse_intent(std::string_view name);

// Short button caption, e.g. "Similar examples".
std::string_view button_label(Intent intent);

// The five global (instance-independent) explanations.
bool is_global(Intent intent);

// Intents that act on the selected sentence.
bool needs_sentence(Intent intent);

}  // namespace convxai
