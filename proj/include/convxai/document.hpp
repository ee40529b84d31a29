#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/classifier.hpp"
#include "convxai/profile.hpp"
#include "convxai/review.hpp"
#include "convxai/style_model.hpp"
#include "convxai/templates.hpp"
#include "convxai/text.hpp"
#include "json.hpp"

namespace convxai {

struct AnalyzedSentence {
  std::string text;
  SentenceSpan span;
  Prediction prediction;
  double perplexity = 1.0;
  int quality = 3;
  std::size_t token_count = 0;
};

// A submitted abstract with per-sentence model outputs and its review.
struct AbstractDocument {
  std::string raw_text;
  std::vector<AnalyzedSentence> sentences;
  AbstractReview review;
  std::size_t revision = 0;

  std::vector<AspectLabel> labels() const;
};

// Segments `text`, predicts aspect and style quality for every sentence and
// builds the review. Throws InvalidInput when no sentence is found.
AbstractDocument analyze_abstract(std::string_view text, std::size_t revision,
                                  const AspectClassifier& classifier, const StyleModel& style_model,
                                  const ConferenceProfile& profile, const ReviewConfig& config = {},
                                  const TemplateStore& templates = TemplateStore::builtin());

nlohmann::json to_json(const Prediction& prediction);
nlohmann::json to_json(const ReviewItem& item);
nlohmann::json to_json(const AbstractReview& review);
nlohmann::json to_json(const AbstractDocument& document);

}  // namespace convxai
