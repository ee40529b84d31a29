#include "convxai/intent.hpp"

namespace convxai {

std::string_view to_string(Intent intent) {
  switch (intent) {
    case Intent::DataStats: return "data_stats";
    case Intent::ModelDescription: return "model_description";
    case Intent::QualityScoreMeaning: return "quality_score_meaning";
    case Intent::LabelDistribution: return "label_distribution";
    case Intent::SentenceLength: return "sentence_length";
    case Intent::Confidence: return "confidence";
    case Intent::Example: return "example";
    case Intent::Attribution: return "attribution";
    case Intent::Counterfactual: return "counterfactual";
    case Intent::Suggestion: return "suggestion";
    case Intent::Fallback: return "fallback";
  }
  return "fallback";
}

std::optional<Intent> parse_intent(std::string_view name) {
  for (auto intent : kExplanationIntents) {
    if (to_string(intent) == name) return intent;
  }
  if (name == "fallback") return Intent::Fallback;
  return std::nullopt;
}

std::string_view button_label(Intent intent) {
  switch (intent) {
    case Intent::DataStats: return "Data statistics";
    case Intent::ModelDescription: return "Model description";
    case Intent::QualityScoreMeaning: return "What does the quality score mean?";
    case Intent::LabelDistribution: return "Label distribution";
    case Intent::SentenceLength: return "Sentence length";
    case Intent::Confidence: return "Prediction confidence";
    case Intent::Example: return "Similar examples";
    case Intent::Attribution: return "Important words";
    case Intent::Counterfactual: return "Counterfactual rewrite";
    case Intent::Suggestion: return "Explain this review";
    case Intent::Fallback: return "Help";
  }
  return "Help";
}

bool is_global(Intent intent) {
  switch (intent) {
    case Intent::DataStats:
    case Intent::ModelDescription:
    case Intent::QualityScoreMeaning:
    case Intent::LabelDistribution:
    case Intent::SentenceLength:
      return true;
    default:
      return false;
  }
}

bool needs_sentence(Intent intent) {
  switch (intent) {
    case Intent::Confidence:
    case Intent::Example:
    case Intent::Attribution:
    case Intent::Counterfactual:
    case Intent::Suggestion:
      return true;
    default:
      return false;
  }
}

}  // namespace convxai
