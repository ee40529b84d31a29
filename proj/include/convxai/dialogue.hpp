#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/document.hpp"
#include "convxai/explain.hpp"
#include "convxai/intent.hpp"
#include "convxai/nlu.hpp"
#include "convxai/review.hpp"
#include "convxai/templates.hpp"
#include "json.hpp"

namespace convxai {

struct TurnRecord {
  std::size_t turn_index = 0;
  std::string utterance;
  Intent resolved_intent = Intent::Fallback;
  ExplanationVariables variables;  // after context defaults were merged in
  std::int64_t timestamp_ms = 0;
};

struct PendingContext {
  std::optional<AspectLabel> suggested_label;  // from the selected sentence's Structure item
  std::optional<Intent> last_intent;
  ExplanationVariables last_variables;

  friend bool operator==(const PendingContext&, const PendingContext&) = default;
};

struct DialogueState {
  std::string session_id;
  std::optional<std::size_t> selected_sentence;
  std::optional<AbstractReview> last_review;
  std::vector<TurnRecord> history;  // append-only
  PendingContext pending;
  std::vector<std::string> diagnostics;
};

struct QuickReply {
  std::string label;
  std::string utterance;  // sent verbatim through the chat path
};

struct DialogueResponse {
  ExplanationPayload payload;
  PendingContext state_delta;
  std::vector<QuickReply> quick_replies;
  IntentMatch match;
};

// Ties the NLU, the explainers and the templates together. Stateless; all
// conversation state lives in DialogueState.
class DialogueEngine {
 public:
  explicit DialogueEngine(const IntentClassifier& classifier,
                          const TemplateStore& templates = TemplateStore::builtin(),
                          ReviewConfig review_config = {});

  IntentMatch classify_intent(std::string_view utterance, const DialogueState& state) const;

  // One chat turn. `document` is null before the first submission. Always
  // appends exactly one TurnRecord.
  DialogueResponse respond(DialogueState& state, std::string_view utterance,
                           const AbstractDocument* document, const ExplainerContext& context,
                           std::int64_t timestamp_ms = 0) const;

  // Selects sentence `index` (0-based) and explains its review comment.
  // Throws InvalidInput when the index is out of range.
  DialogueResponse select_sentence(DialogueState& state, std::size_t index,
                                   const AbstractDocument& document,
                                   const ExplainerContext& context) const;

  // Resets stale context after a (re)submission and summarizes the review.
  DialogueResponse on_submission(DialogueState& state, const AbstractDocument& document) const;

 private:
  DialogueResponse selection_response(DialogueState& state, std::size_t index,
                                      const AbstractDocument& document,
                                      const ExplainerContext& context) const;
  DialogueResponse fallback(const DialogueState& state, const IntentMatch& match) const;
  std::vector<QuickReply> replies_for(std::span<const Intent> intents) const;
  std::string hint(Intent intent) const;

  const IntentClassifier& classifier_;
  const TemplateStore& templates_;
  ReviewConfig review_config_;
};

// "S3", "s 3", "sentence 3" or "select sentence 3" -> 2 (0-based).
std::optional<std::size_t> parse_selection(std::string_view utterance);

// Resolved-intent counts; Fallback turns are counted separately.
struct UsageStats {
  std::array<std::size_t, kNumExplanationIntents> counts{};
  std::size_t fallback = 0;

  std::size_t total() const;
  UsageStats& operator+=(const UsageStats& other);
  friend bool operator==(const UsageStats&, const UsageStats&) = default;
  nlohmann::json to_json() const;
};

UsageStats export_usage_stats(std::span<const TurnRecord> history);

nlohmann::json to_json(const QuickReply& reply);
nlohmann::json to_json(const PendingContext& context);
nlohmann::json to_json(const TurnRecord& turn);
nlohmann::json to_json(const DialogueResponse& response);

}  // namespace convxai
