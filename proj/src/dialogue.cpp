#include "convxai/dialogue.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "convxai/error.hpp"
#include "convxai/format.hpp"
#include "convxai/text.hpp"

namespace convxai {

namespace {

constexpr std::size_t kMaxSentenceReplies = 10;

std::string sentence_id(std::size_t index) { return "S" + std::to_string(index + 1); }

ExplanationPayload plain_payload(Intent intent, bool ok, std::string text) {
  ExplanationPayload p;
  p.intent = intent;
  p.ok = ok;
  p.text = std::move(text);
  return p;
}

std::vector<QuickReply> sentence_replies(const AbstractDocument& document) {
  std::vector<QuickReply> out;
  const auto n = std::min(document.sentences.size(), kMaxSentenceReplies);
  for (std::size_t i = 0; i < n; ++i) out.push_back({sentence_id(i), sentence_id(i)});
  return out;
}

bool mentions_style(std::string_view utterance) {
  for (const auto& tok : tokenize(utterance)) {
    if (tok == "style" || tok == "stylistic") return true;
  }
  return false;
}

}  // namespace

std::optional<std::size_t> parse_selection(std::string_view utterance) {
  auto words = tokenize(utterance);
  if (words.empty() || words.size() > 3) return std::nullopt;
  std::size_t at = 0;
  if (words[at] == "select" || words[at] == "choose" || words[at] == "pick") ++at;
  if (at >= words.size()) return std::nullopt;
  std::string digits;
  if (words[at] == "sentence" || words[at] == "s") {
    if (at + 1 != words.size() - 1) return std::nullopt;
    digits = words[at + 1];
  } else if (at == words.size() - 1 && words[at].size() > 1 && words[at][0] == 's') {
    digits = words[at].substr(1);
  } else {
    return std::nullopt;
  }
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value == 0) return std::nullopt;
  return value - 1;
}

DialogueEngine::DialogueEngine(const IntentClassifier& classifier, const TemplateStore& templates,
                               ReviewConfig review_config)
    : classifier_(classifier), templates_(templates), review_config_(review_config) {}

IntentMatch DialogueEngine::classify_intent(std::string_view utterance, const DialogueState& state) const {
  return classifier_.classify(utterance, state.pending.last_intent);
}

std::vector<QuickReply> DialogueEngine::replies_for(std::span<const Intent> intents) const {
  std::vector<QuickReply> out;
  for (Intent intent : intents) {
    if (intent == Intent::Fallback) continue;
    out.push_back({std::string(button_label(intent)), classifier_.inventory().canonical(intent)});
  }
  return out;
}

std::string DialogueEngine::hint(Intent intent) const {
  std::string id = "hint." + std::string(to_string(intent));
  return templates_.render(templates_.contains(id) ? id : std::string("hint.default"), {});
}

DialogueResponse DialogueEngine::fallback(const DialogueState& state, const IntentMatch& match) const {
  DialogueResponse r;
  r.match = match;
  r.payload = plain_payload(Intent::Fallback, false, templates_.render("dialogue.fallback", {}));
  static constexpr std::array<Intent, 5> kSentenceHelp = {Intent::Suggestion, Intent::Confidence,
                                                          Intent::Example, Intent::Attribution,
                                                          Intent::Counterfactual};
  static constexpr std::array<Intent, 5> kGlobalHelp = {Intent::DataStats, Intent::ModelDescription,
                                                        Intent::QualityScoreMeaning,
                                                        Intent::LabelDistribution, Intent::SentenceLength};
  if (state.selected_sentence) {
    r.payload.followups.assign(kSentenceHelp.begin(), kSentenceHelp.end());
  } else {
    r.payload.followups.assign(kGlobalHelp.begin(), kGlobalHelp.end());
  }
  r.quick_replies = replies_for(r.payload.followups);
  return r;
}

DialogueResponse DialogueEngine::selection_response(DialogueState& state, std::size_t index,
                                                    const AbstractDocument& document,
                                                    const ExplainerContext& context) const {
  const auto& sentence = document.sentences[index];
  state.selected_sentence = index;
  state.pending = {};
  state.pending.last_intent = Intent::Suggestion;

  const AbstractReview& review = document.review;
  const std::size_t item_revision = state.last_review ? state.last_review->revision : review.revision;
  const auto items = review.items_for(index);
  for (const auto* item : items) {
    if (item->kind == ReviewKind::Structure) state.pending.suggested_label = item->suggested_label;
  }

  const std::string header = templates_.render(
      "dialogue.selected", {{"sentence", sentence_id(index)},
                            {"text", sentence.text},
                            {"label", std::string(display_name(sentence.prediction.label))},
                            {"quality", std::to_string(sentence.quality)}});
  DialogueResponse r;
  r.match = {Intent::Suggestion, 1.0, MatchStage::Rule};
  if (items.empty()) {
    r.payload = plain_payload(Intent::Suggestion, true,
                              header + " " + templates_.render("suggestion.none", {}));
    r.payload.followups = {Intent::Confidence, Intent::Example, Intent::Attribution};
  } else {
    r.payload = explain_suggestion(*items.front(), item_revision, document.revision, context, review_config_);
    r.payload.text = header + " " + r.payload.text;
    for (std::size_t k = 1; k < items.size(); ++k) r.payload.notices.push_back(items[k]->message);
  }
  r.quick_replies = replies_for(r.payload.followups);
  r.state_delta = state.pending;
  return r;
}

DialogueResponse DialogueEngine::select_sentence(DialogueState& state, std::size_t index,
                                                 const AbstractDocument& document,
                                                 const ExplainerContext& context) const {
  if (index >= document.sentences.size()) {
    throw InvalidInput("sentence index " + std::to_string(index) + " is out of range (the abstract has " +
                       std::to_string(document.sentences.size()) + " sentences)");
  }
  return selection_response(state, index, document, context);
}

DialogueResponse DialogueEngine::on_submission(DialogueState& state, const AbstractDocument& document) const {
  state.selected_sentence.reset();
  state.pending = {};
  state.last_review = document.review;

  const auto& scores = document.review.scores;
  DialogueResponse r;
  r.match = {Intent::Suggestion, 1.0, MatchStage::Rule};
  r.payload = plain_payload(
      Intent::Suggestion, true,
      templates_.render("dialogue.submission", {{"count", std::to_string(document.sentences.size())},
                                                {"structure", format_fixed(scores.structure, 1)},
                                                {"style", format_fixed(scores.style, 1)},
                                                {"overall", format_fixed(scores.overall, 1)},
                                                {"items", std::to_string(document.review.items.size())}}));
  std::vector<bool> flagged(document.sentences.size(), false);
  for (const auto& item : document.review.items) flagged[item.sentence_index] = true;
  for (std::size_t i = 0; i < document.sentences.size() && r.quick_replies.size() < kMaxSentenceReplies; ++i) {
    if (flagged[i]) r.quick_replies.push_back({sentence_id(i), sentence_id(i)});
  }
  if (r.quick_replies.empty()) r.quick_replies = sentence_replies(document);
  r.state_delta = state.pending;
  return r;
}

DialogueResponse DialogueEngine::respond(DialogueState& state, std::string_view utterance,
                                         const AbstractDocument* document, const ExplainerContext& context,
                                         std::int64_t timestamp_ms) const {
  TurnRecord turn;
  turn.turn_index = state.history.size();
  turn.utterance = std::string(utterance);
  turn.timestamp_ms = timestamp_ms;

  auto finish = [&](DialogueResponse r, Intent resolved, const ExplanationVariables& vars) {
    turn.resolved_intent = resolved;
    turn.variables = vars;
    state.history.push_back(std::move(turn));
    r.state_delta = state.pending;
    return r;
  };

  if (trim(utterance).empty()) return finish(fallback(state, {}), Intent::Fallback, {});

  if (auto index = parse_selection(utterance)) {
    if (!document) {
      DialogueResponse r;
      r.match = {Intent::Suggestion, 1.0, MatchStage::Rule};
      r.payload = plain_payload(Intent::Suggestion, false, templates_.render("dialogue.submit_first", {}));
      return finish(std::move(r), Intent::Suggestion, {});
    }
    if (*index >= document->sentences.size()) {
      DialogueResponse r;
      r.match = {Intent::Suggestion, 1.0, MatchStage::Rule};
      r.payload = plain_payload(
          Intent::Suggestion, false,
          templates_.render("dialogue.bad_selection", {{"sentence", sentence_id(*index)},
                                                       {"count", std::to_string(document->sentences.size())}}));
      r.quick_replies = sentence_replies(*document);
      return finish(std::move(r), Intent::Suggestion, {});
    }
    return finish(selection_response(state, *index, *document, context), Intent::Suggestion, {});
  }

  const IntentMatch match = classify_intent(utterance, state);
  if (match.intent == Intent::Fallback) return finish(fallback(state, match), Intent::Fallback, {});

  const Intent intent = match.intent;
  ParsedVariables parsed = parse_variables(utterance, intent, context.limits.max_example_count);

  // Explicit variables beat inherited ones, which beat context defaults.
  ExplanationVariables vars;
  if (match.stage == MatchStage::Context && state.pending.last_intent == intent) {
    vars = state.pending.last_variables;
  }
  vars = vars.merged_with(parsed.variables);
  if ((intent == Intent::Counterfactual || intent == Intent::Attribution) && !vars.target_label) {
    vars.target_label = state.pending.suggested_label;
  }

  DialogueResponse r;
  r.match = match;
  if (!document) {
    r.payload = plain_payload(intent, false, templates_.render("dialogue.submit_first", {}));
    return finish(std::move(r), intent, vars);
  }
  if (state.selected_sentence && *state.selected_sentence >= document->sentences.size()) {
    state.selected_sentence.reset();
  }
  if (needs_sentence(intent) && !state.selected_sentence) {
    r.payload = plain_payload(intent, false, templates_.render("dialogue.select_sentence", {}));
    r.quick_replies = sentence_replies(*document);
    return finish(std::move(r), intent, vars);
  }

  std::optional<std::string_view> sentence;
  const AnalyzedSentence* selected = nullptr;
  if (state.selected_sentence) {
    selected = &document->sentences[*state.selected_sentence];
    sentence = selected->text;
  }

  switch (intent) {
    case Intent::DataStats:
    case Intent::ModelDescription:
    case Intent::QualityScoreMeaning:
    case Intent::LabelDistribution:
      r.payload = explain_global(intent, context);
      break;
    case Intent::SentenceLength:
      r.payload = explain_global(intent, context, sentence);
      break;
    case Intent::Confidence:
      r.payload = explain_confidence(selected->prediction, context.templates,
                                     mentions_style(utterance) ? ModelTarget::Style : ModelTarget::Structure);
      break;
    case Intent::Example:
      r.payload = explain_examples(*sentence, vars, context);
      break;
    case Intent::Attribution:
      r.payload = explain_attribution(*sentence, vars, context);
      break;
    case Intent::Counterfactual:
      r.payload = explain_counterfactual(*sentence, vars.target_label, context);
      break;
    case Intent::Suggestion: {
      const auto items = document->review.items_for(*state.selected_sentence);
      if (items.empty()) {
        r.payload = plain_payload(Intent::Suggestion, true, templates_.render("suggestion.none", {}));
        r.payload.followups = {Intent::Confidence, Intent::Example, Intent::Attribution};
      } else {
        const std::size_t item_revision =
            state.last_review ? state.last_review->revision : document->review.revision;
        r.payload = explain_suggestion(*items.front(), item_revision, document->revision, context,
                                       review_config_);
        for (std::size_t k = 1; k < items.size(); ++k) r.payload.notices.push_back(items[k]->message);
      }
      break;
    }
    case Intent::Fallback:
      break;
  }

  // Parser notices come first; the explainer's own follow.
  parsed.notices.insert(parsed.notices.end(), r.payload.notices.begin(), r.payload.notices.end());
  r.payload.notices = std::move(parsed.notices);
  r.payload.text += (r.payload.text.find('\n') == std::string::npos ? " " : "\n") + hint(intent);
  r.quick_replies = replies_for(r.payload.followups);

  state.pending.last_intent = intent;
  state.pending.last_variables = vars;
  return finish(std::move(r), intent, vars);
}

std::size_t UsageStats::total() const {
  std::size_t sum = fallback;
  for (auto c : counts) sum += c;
  return sum;
}

UsageStats& UsageStats::operator+=(const UsageStats& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  fallback += other.fallback;
  return *this;
}

nlohmann::json UsageStats::to_json() const {
  nlohmann::json intents = nlohmann::json::object();
  for (Intent intent : kExplanationIntents) {
    intents[std::string(convxai::to_string(intent))] = counts[static_cast<std::size_t>(intent)];
  }
  return {{"intents", intents}, {"fallback", fallback}};
}

UsageStats export_usage_stats(std::span<const TurnRecord> history) {
  UsageStats stats;
  for (const auto& turn : history) {
    if (turn.resolved_intent == Intent::Fallback) {
      ++stats.fallback;
    } else {
      ++stats.counts[static_cast<std::size_t>(turn.resolved_intent)];
    }
  }
  return stats;
}

nlohmann::json to_json(const QuickReply& reply) {
  return {{"label", reply.label}, {"utterance", reply.utterance}};
}

nlohmann::json to_json(const PendingContext& context) {
  nlohmann::json j = {{"variables", to_json(context.last_variables)}};
  j["suggested_label"] = context.suggested_label
                             ? nlohmann::json(std::string(to_string(*context.suggested_label)))
                             : nlohmann::json(nullptr);
  j["last_intent"] = context.last_intent ? nlohmann::json(std::string(to_string(*context.last_intent)))
                                         : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const TurnRecord& turn) {
  return {{"turn_index", turn.turn_index},
          {"utterance", turn.utterance},
          {"intent", std::string(to_string(turn.resolved_intent))},
          {"variables", to_json(turn.variables)},
          {"timestamp_ms", turn.timestamp_ms}};
}

nlohmann::json to_json(const DialogueResponse& response) {
  nlohmann::json replies = nlohmann::json::array();
  for (const auto& q : response.quick_replies) replies.push_back(to_json(q));
  return {{"payload", to_json(response.payload)},
          {"state", to_json(response.state_delta)},
          {"quick_replies", replies},
          {"match",
           {{"intent", std::string(to_string(response.match.intent))},
            {"confidence", response.match.confidence},
            {"stage", std::string(to_string(response.match.stage))}}}};
}

}  // namespace convxai
