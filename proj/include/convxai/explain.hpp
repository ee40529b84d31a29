#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "convxai/aspect.hpp"
#include "convxai/classifier.hpp"
#include "convxai/corpus.hpp"
#include "convxai/generator.hpp"
#include "convxai/intent.hpp"
#include "convxai/profile.hpp"
#include "convxai/review.hpp"
#include "convxai/style_model.hpp"
#include "convxai/templates.hpp"
#include "json.hpp"

namespace convxai {

enum class RankMethod { Similarity, Quality };
std::string_view to_string(RankMethod method);

// User-controllable knobs; unset fields take the explainer's defaults.
struct ExplanationVariables {
  std::optional<AspectLabel> target_label;
  std::optional<std::size_t> example_count;
  std::optional<RankMethod> rank_method;
  std::optional<std::string> keyword;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> ig_steps;

  bool empty() const;
  // Fields set in `overrides` replace ours.
  ExplanationVariables merged_with(const ExplanationVariables& overrides) const;
  friend bool operator==(const ExplanationVariables&, const ExplanationVariables&) = default;
};

struct TokenWeight {
  std::string token;
  double weight = 0.0;
  bool highlighted = false;
};

struct AttributionMap {
  AspectLabel target = AspectLabel::Other;
  std::size_t top_k = 0;
  std::vector<TokenWeight> tokens;  // sentence order
};

struct ExampleEntry {
  std::string sentence;
  AspectLabel label = AspectLabel::Other;
  double similarity = 0.0;
  int quality = 0;
};

struct ExampleList {
  RankMethod rank = RankMethod::Similarity;
  std::vector<ExampleEntry> examples;
};

struct ScoreCard {
  std::string title;
  std::vector<std::pair<std::string, double>> entries;
};

enum class Provenance { Retrieval, ExternalGenerator };
std::string_view to_string(Provenance provenance);

struct CounterfactualCandidate {
  std::string text;
  AspectLabel target = AspectLabel::Other;
  AspectLabel repredicted = AspectLabel::Other;
  double repredicted_confidence = 0.0;
  Provenance provenance = Provenance::Retrieval;
  bool reaches_target = false;
  std::string note;
};

using Attachment = std::variant<AttributionMap, ExampleList, ScoreCard, CounterfactualCandidate>;

struct ExplanationPayload {
  Intent intent = Intent::Fallback;
  bool ok = true;  // false for precondition failures ("already predicted as X", ...)
  std::string text;
  std::vector<Attachment> attachments;
  std::vector<Intent> followups;
  std::vector<std::string> notices;
};

// A retrievable reference sentence.
struct IndexEntry {
  std::string text;
  AspectLabel label = AspectLabel::Other;
  double perplexity = 0.0;
  int quality = 0;
  SentenceEmbedding embedding;
};

// Sentences of one conference with embeddings and quality scores.
class ExampleIndex {
 public:
  ExampleIndex() = default;
  explicit ExampleIndex(std::vector<IndexEntry> entries) : entries_(std::move(entries)) {}

  // Embeds and scores every sentence of `corpus` (all records are used).
  static ExampleIndex build(const Corpus& corpus, const AspectClassifier& classifier,
                            const StyleModel& style_model, const ConferenceProfile& profile);

  const std::vector<IndexEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<IndexEntry> entries_;
};

struct ExplainerLimits {
  std::size_t max_example_count = 10;
  std::size_t default_example_count = 3;
  std::size_t default_top_k = 5;
  std::size_t default_ig_steps = 64;
  std::size_t prompt_examples_per_aspect = 5;
  std::size_t generator_max_length = 128;
};

// Read-only view of everything the explainers consult.
struct ExplainerContext {
  const AspectClassifier& classifier;
  const StyleModel& style_model;
  const ConferenceProfile& profile;
  const ExampleIndex& index;
  const TemplateStore& templates;
  TextGenerator* generator = nullptr;
  ExplainerLimits limits = {};
};

// DataStats, ModelDescription, QualityScoreMeaning, LabelDistribution or
// SentenceLength (which compares `sentence`, when given, to the profile band).
ExplanationPayload explain_global(Intent kind, const ExplainerContext& context,
                                  std::optional<std::string_view> sentence = std::nullopt);

enum class ModelTarget { Structure, Style };

ExplanationPayload explain_confidence(const Prediction& prediction, const TemplateStore& templates,
                                      ModelTarget target = ModelTarget::Structure);

// Filters by target label (default: the query's predicted label) and
// keyword, ranks by similarity or quality, keeps the top example_count.
ExplanationPayload explain_examples(std::string_view query, const ExplanationVariables& variables,
                                    const ExplainerContext& context);

struct AttributionResult {
  AspectLabel target = AspectLabel::Other;
  SparseVector features;
  std::vector<double> feature_attributions;  // aligned with features.indices
  std::vector<std::string> words;
  std::vector<double> word_weights;  // aligned with words
  double logit_input = 0.0;
  double logit_baseline = 0.0;
};

// Integrated gradients of the target logit from the all-zero feature vector
// to the sentence's features (midpoint Riemann sum with `steps` points; the
// linear head uses its closed form). Unigram attributions go to their word,
// bigram attributions are split evenly between the two words.
AttributionResult integrated_gradients(const AspectClassifier& classifier, std::string_view sentence,
                                       AspectLabel target, std::size_t steps);

ExplanationPayload explain_attribution(std::string_view sentence, const ExplanationVariables& variables,
                                       const ExplainerContext& context);

// Few-shot rewrite prompt: for every aspect, the most similar index
// sentences as "{sentence} is labeled {aspect}", followed by
// "Rewrite {input sentence} into label {desired aspect}".
std::string build_rewrite_prompt(std::string_view sentence, AspectLabel target,
                                 const ExplainerContext& context);

// Uses the external generator when configured, else (or on failure) the
// most similar index sentence carrying `target`. Without a target the
// runner-up label of the prediction is used.
ExplanationPayload explain_counterfactual(std::string_view sentence, std::optional<AspectLabel> target,
                                          const ExplainerContext& context);

// Recommended next intents for a review kind.
std::vector<Intent> suggestion_followups(ReviewKind kind);

// `item_revision` is the review revision the item came from; a mismatch with
// `current_revision` yields a refresh notice.
ExplanationPayload explain_suggestion(const ReviewItem& item, std::size_t item_revision,
                                      std::size_t current_revision, const ExplainerContext& context,
                                      const ReviewConfig& review_config = {});

nlohmann::json to_json(const ExplanationVariables& variables);
ExplanationVariables variables_from_json(const nlohmann::json& object);
nlohmann::json to_json(const Attachment& attachment);
nlohmann::json to_json(const ExplanationPayload& payload);

}  // namespace convxai
