#include "convxai/document.hpp"

#include "convxai/error.hpp"

namespace convxai {

std::vector<AspectLabel> AbstractDocument::labels() const {
  std::vector<AspectLabel> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.prediction.label);
  return out;
}

AbstractDocument analyze_abstract(std::string_view text, std::size_t revision,
                                  const AspectClassifier& classifier, const StyleModel& style_model,
                                  const ConferenceProfile& profile, const ReviewConfig& config,
                                  const TemplateStore& templates) {
  AbstractDocument doc;
  doc.raw_text = std::string(text);
  doc.revision = revision;
  std::vector<SentenceAssessment> assessments;
  for (const auto& span : segment_abstract(text)) {
    AnalyzedSentence s;
    s.span = span;
    s.text = std::string(span.view(text));
    s.prediction = classifier.predict(s.text);
    s.perplexity = sentence_perplexity(style_model, s.text);
    s.quality = quantize_quality(s.perplexity, profile.quality_boundaries);
    s.token_count = tokenize(s.text).size();
    assessments.push_back({s.text, s.prediction.label, s.quality});
    doc.sentences.push_back(std::move(s));
  }
  if (doc.sentences.empty()) throw InvalidInput("the abstract contains no sentences");
  doc.review = build_review(assessments, profile, config, templates);
  doc.review.revision = revision;
  return doc;
}

nlohmann::json to_json(const Prediction& prediction) {
  nlohmann::json probs = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumAspects; ++i) {
    probs[std::string(to_string(aspect_at(i)))] = prediction.probabilities[i];
  }
  return {{"label", std::string(to_string(prediction.label))},
          {"confidence", prediction.confidence},
          {"probabilities", probs}};
}

nlohmann::json to_json(const ReviewItem& item) {
  nlohmann::json j = {{"kind", std::string(to_string(item.kind))},
                      {"sentence_index", item.sentence_index},
                      {"message", item.message},
                      {"current_label", std::string(to_string(item.current_label))}};
  if (item.suggested_label) j["suggested_label"] = std::string(to_string(*item.suggested_label));
  if (item.quality_score) j["quality_score"] = *item.quality_score;
  if (item.token_count) j["token_count"] = *item.token_count;
  return j;
}

nlohmann::json to_json(const AbstractReview& review) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : review.items) items.push_back(to_json(item));
  nlohmann::json j = {{"revision", review.revision},
                      {"items", items},
                      {"scores",
                       {{"style", review.scores.style},
                        {"structure", review.scores.structure},
                        {"overall", review.scores.overall}}}};
  if (review.matched_pattern) j["matched_pattern"] = *review.matched_pattern;
  return j;
}

nlohmann::json to_json(const AbstractDocument& document) {
  nlohmann::json sentences = nlohmann::json::array();
  for (std::size_t i = 0; i < document.sentences.size(); ++i) {
    const auto& s = document.sentences[i];
    sentences.push_back({{"index", i},
                         {"text", s.text},
                         {"span", {s.span.begin, s.span.end}},
                         {"prediction", to_json(s.prediction)},
                         {"perplexity", s.perplexity},
                         {"quality", s.quality},
                         {"token_count", s.token_count}});
  }
  return {{"revision", document.revision}, {"sentences", sentences}, {"review", to_json(document.review)}};
}

}  // namespace convxai
