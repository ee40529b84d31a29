#include "convxai/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convxai/error.hpp"
#include "convxai/format.hpp"
#include "convxai/text.hpp"

namespace convxai {
namespace {

std::string label_name(AspectLabel label) { return std::string(to_string(label)); }

std::string distribution_text(const ConferenceProfile& profile) {
  std::string out;
  for (std::size_t i = 0; i < kNumAspects; ++i) {
    if (i) out += ", ";
    out += label_name(aspect_at(i)) + " " + format_fixed(100.0 * profile.label_distribution[i], 1) + "%";
  }
  return out;
}

ExplanationPayload make_payload(Intent intent, const TemplateStore& templates, std::string_view id,
                                const Slots& slots) {
  ExplanationPayload payload;
  payload.intent = intent;
  payload.text = templates.render(id, slots);
  return payload;
}

ExplanationPayload failure(Intent intent, const TemplateStore& templates, std::string_view id,
                           const Slots& slots) {
  auto payload = make_payload(intent, templates, id, slots);
  payload.ok = false;
  return payload;
}

std::string example_lines(const ExampleList& list) {
  std::string out;
  for (std::size_t i = 0; i < list.examples.size(); ++i) {
    const auto& e = list.examples[i];
    if (i) out += "\n";
    out += std::to_string(i + 1) + ". " + e.sentence + " [" + label_name(e.label) +
           ", similarity " + format_fixed(e.similarity, 2) + ", quality " + std::to_string(e.quality) + "]";
  }
  return out;
}

}  // namespace

std::string_view to_string(RankMethod method) {
  return method == RankMethod::Quality ? "quality" : "similarity";
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::ExternalGenerator ? "external_generator" : "retrieval";
}

bool ExplanationVariables::empty() const {
  return !target_label && !example_count && !rank_method && !keyword && !top_k && !ig_steps;
}

ExplanationVariables ExplanationVariables::merged_with(const ExplanationVariables& o) const {
  ExplanationVariables out = *this;
  if (o.target_label) out.target_label = o.target_label;
  if (o.example_count) out.example_count = o.example_count;
  if (o.rank_method) out.rank_method = o.rank_method;
  if (o.keyword) out.keyword = o.keyword;
  if (o.top_k) out.top_k = o.top_k;
  if (o.ig_steps) out.ig_steps = o.ig_steps;
  return out;
}

ExampleIndex ExampleIndex::build(const Corpus& corpus, const AspectClassifier& classifier,
                                 const StyleModel& style_model, const ConferenceProfile& profile) {
  std::vector<IndexEntry> entries;
  for (const auto& record : corpus.records()) {
    for (const auto& s : record.sentences) {
      IndexEntry entry;
      entry.text = s.text;
      entry.label = s.label;
      entry.perplexity = sentence_perplexity(style_model, s.text);
      entry.quality = quantize_quality(entry.perplexity, profile.quality_boundaries);
      entry.embedding = classifier.embed(s.text);
      entries.push_back(std::move(entry));
    }
  }
  return ExampleIndex(std::move(entries));
}

// ---------------------------------------------------------------------------
// Global explanations

ExplanationPayload explain_global(Intent kind, const ExplainerContext& ctx,
                                  std::optional<std::string_view> sentence) {
  const auto& p = ctx.profile;
  const auto& t = ctx.templates;
  switch (kind) {
    case Intent::DataStats: {
      if (p.data_card.empty()) return failure(kind, t, "global.missing_card", {{"card", "data sheet"}});
      auto payload = make_payload(kind, t, "global.data_stats",
                                  {{"card", p.data_card},
                                   {"conference", p.conference},
                                   {"abstracts", std::to_string(p.abstract_count)},
                                   {"sentences", std::to_string(p.sentence_count)},
                                   {"distribution", distribution_text(p)}});
      ScoreCard card{"data_statistics",
                     {{"abstracts", static_cast<double>(p.abstract_count)},
                      {"sentences", static_cast<double>(p.sentence_count)},
                      {"mean_length", p.length_stats.mean}}};
      payload.attachments.emplace_back(std::move(card));
      payload.followups = {Intent::LabelDistribution, Intent::SentenceLength};
      return payload;
    }
    case Intent::ModelDescription: {
      if (p.model_card.empty()) return failure(kind, t, "global.missing_card", {{"card", "model card"}});
      auto payload = make_payload(
          kind, t, "global.model_description",
          {{"card", p.model_card},
           {"training_sentences", std::to_string(ctx.classifier.training_sentences())},
           {"feature_dim", std::to_string(ctx.classifier.hyperparams().feature_dim)},
           {"order", std::to_string(ctx.style_model.order())},
           {"alpha", format_fixed(ctx.style_model.alpha(), 2)},
           {"conference", p.conference}});
      payload.followups = {Intent::Confidence, Intent::Attribution};
      return payload;
    }
    case Intent::QualityScoreMeaning: {
      const auto& b = p.quality_boundaries;
      auto payload = make_payload(kind, t, "global.quality_score_meaning",
                                  {{"conference", p.conference},
                                   {"b1", format_fixed(b[0], 2)},
                                   {"b2", format_fixed(b[1], 2)},
                                   {"b3", format_fixed(b[2], 2)},
                                   {"b4", format_fixed(b[3], 2)}});
      payload.attachments.emplace_back(ScoreCard{
          "quality_boundaries", {{"p20", b[0]}, {"p40", b[1]}, {"p60", b[2]}, {"p80", b[3]}}});
      payload.followups = {Intent::Example, Intent::Attribution};
      return payload;
    }
    case Intent::LabelDistribution: {
      auto payload = make_payload(kind, t, "global.label_distribution",
                                  {{"conference", p.conference}, {"distribution", distribution_text(p)}});
      ScoreCard card{"label_distribution", {}};
      for (std::size_t i = 0; i < kNumAspects; ++i) {
        card.entries.emplace_back(label_name(aspect_at(i)), p.label_distribution[i]);
      }
      payload.attachments.emplace_back(std::move(card));
      payload.followups = {Intent::Example, Intent::Counterfactual};
      return payload;
    }
    case Intent::SentenceLength: {
      Slots slots{{"conference", p.conference},
                  {"mean", format_fixed(p.length_stats.mean, 1)},
                  {"low", format_fixed(p.length_stats.p5, 0)},
                  {"high", format_fixed(p.length_stats.p95, 0)}};
      std::string id = "global.sentence_length";
      ScoreCard card{"sentence_length",
                     {{"mean", p.length_stats.mean}, {"p5", p.length_stats.p5}, {"p95", p.length_stats.p95}}};
      if (sentence) {
        const auto tokens = static_cast<double>(tokenize(*sentence).size());
        slots["tokens"] = format_fixed(tokens, 0);
        card.entries.emplace_back("tokens", tokens);
        if (tokens < p.length_stats.p5) {
          id = "global.sentence_length.outside";
          slots["direction"] = "shorter";
        } else if (tokens > p.length_stats.p95) {
          id = "global.sentence_length.outside";
          slots["direction"] = "longer";
        } else {
          id = "global.sentence_length.within";
        }
      }
      auto payload = make_payload(kind, t, id, slots);
      payload.attachments.emplace_back(std::move(card));
      payload.followups = {Intent::Example};
      return payload;
    }
    default:
      throw InvalidInput("explain_global does not handle intent '" + std::string(to_string(kind)) + "'");
  }
}

// ---------------------------------------------------------------------------
// Confidence

ExplanationPayload explain_confidence(const Prediction& prediction, const TemplateStore& templates,
                                      ModelTarget target) {
  if (target == ModelTarget::Style) {
    return failure(Intent::Confidence, templates, "confidence.unavailable", {});
  }
  auto payload = make_payload(Intent::Confidence, templates, "confidence",
                              {{"label", label_name(prediction.label)},
                               {"confidence", format_fixed(prediction.confidence, 2)}});
  ScoreCard card{"probabilities", {}};
  for (std::size_t i = 0; i < kNumAspects; ++i) {
    card.entries.emplace_back(label_name(aspect_at(i)), prediction.probabilities[i]);
  }
  payload.attachments.emplace_back(std::move(card));
  payload.followups = {Intent::Counterfactual, Intent::Example};
  return payload;
}

// ---------------------------------------------------------------------------
// Similar examples

ExplanationPayload explain_examples(std::string_view query, const ExplanationVariables& vars,
                                    const ExplainerContext& ctx) {
  const auto& limits = ctx.limits;
  ExplanationPayload notices_only;
  std::size_t count = vars.example_count.value_or(limits.default_example_count);
  if (count == 0) {
    notices_only.notices.push_back("example count must be positive; using " +
                                   std::to_string(limits.default_example_count));
    count = limits.default_example_count;
  }
  if (count > limits.max_example_count) {
    notices_only.notices.push_back("example count " + std::to_string(count) + " exceeds the maximum; showing " +
                                   std::to_string(limits.max_example_count));
    count = limits.max_example_count;
  }
  const AspectLabel label = vars.target_label.value_or(ctx.classifier.predict(query).label);
  const RankMethod rank = vars.rank_method.value_or(RankMethod::Similarity);
  const std::string keyword = vars.keyword ? to_lower(*vars.keyword) : std::string();
  const auto query_embedding = ctx.classifier.embed(query);
  const auto query_norm = normalize_whitespace(query);

  struct Candidate {
    std::size_t index;
    double similarity;
  };
  std::vector<Candidate> candidates;
  const auto& entries = ctx.index.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.label != label) continue;
    if (!keyword.empty() && to_lower(e.text).find(keyword) == std::string::npos) continue;
    if (normalize_whitespace(e.text) == query_norm) continue;
    candidates.push_back({i, similarity(query_embedding, e.embedding)});
  }

  Slots slots{{"label", label_name(label)},
              {"conference", ctx.profile.conference},
              {"rank", std::string(to_string(rank))},
              {"keyword_note", keyword.empty() ? std::string() : " containing \"" + *vars.keyword + "\""}};
  if (candidates.empty()) {
    auto payload = failure(Intent::Example, ctx.templates, "examples.none", slots);
    payload.notices = notices_only.notices;
    payload.followups = {Intent::LabelDistribution, Intent::Counterfactual};
    return payload;
  }

  std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (rank == RankMethod::Quality && entries[a.index].quality != entries[b.index].quality) {
      return entries[a.index].quality > entries[b.index].quality;
    }
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.index < b.index;
  });
  if (candidates.size() > count) candidates.resize(count);

  ExampleList list;
  list.rank = rank;
  for (const auto& c : candidates) {
    const auto& e = entries[c.index];
    list.examples.push_back({e.text, e.label, c.similarity, e.quality});
  }
  slots["count"] = std::to_string(list.examples.size());
  slots["list"] = example_lines(list);
  auto payload = make_payload(Intent::Example, ctx.templates, "examples", slots);
  payload.notices = notices_only.notices;
  payload.attachments.emplace_back(std::move(list));
  payload.followups = {Intent::Counterfactual, Intent::Attribution};
  return payload;
}

// ---------------------------------------------------------------------------
// Important words

AttributionResult integrated_gradients(const AspectClassifier& classifier, std::string_view sentence,
                                       AspectLabel target, std::size_t steps) {
  if (steps == 0) throw InvalidInput("integrated gradients needs at least one step");
  const auto featurized = classifier.featurizer().featurize(sentence);
  AttributionResult out;
  out.target = target;
  out.features = featurized.counts;
  out.words = featurized.words;
  const auto& x = out.features;
  out.feature_attributions.assign(x.nnz(), 0.0);

  if (classifier.is_linear()) {
    const auto grad = classifier.logit_gradient(x, target);
    for (std::size_t k = 0; k < x.nnz(); ++k) out.feature_attributions[k] = grad[k] * x.values[k];
  } else {
    std::vector<double> sum(x.nnz(), 0.0);
    SparseVector point = x;
    for (std::size_t s = 0; s < steps; ++s) {
      const double alpha = (static_cast<double>(s) + 0.5) / static_cast<double>(steps);
      for (std::size_t k = 0; k < x.nnz(); ++k) point.values[k] = alpha * x.values[k];
      const auto grad = classifier.logit_gradient(point, target);
      for (std::size_t k = 0; k < x.nnz(); ++k) sum[k] += grad[k];
    }
    for (std::size_t k = 0; k < x.nnz(); ++k) {
      out.feature_attributions[k] = x.values[k] * sum[k] / static_cast<double>(steps);
    }
  }

  out.word_weights.assign(out.words.size(), 0.0);
  for (const auto& occ : featurized.occurrences) {
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(x.indices.begin(), x.indices.end(), occ.feature) - x.indices.begin());
    const double share = out.feature_attributions[pos] / x.values[pos];
    if (occ.is_bigram()) {
      out.word_weights[occ.first_word] += 0.5 * share;
      out.word_weights[occ.second_word] += 0.5 * share;
    } else {
      out.word_weights[occ.first_word] += share;
    }
  }

  const auto t = index_of(target);
  out.logit_input = classifier.logits(x)[t];
  out.logit_baseline = classifier.logits(SparseVector{})[t];
  return out;
}

ExplanationPayload explain_attribution(std::string_view sentence, const ExplanationVariables& vars,
                                       const ExplainerContext& ctx) {
  const auto words = split_words(sentence);
  if (words.empty()) {
    return failure(Intent::Attribution, ctx.templates, "attribution.empty", {});
  }
  const AspectLabel target = vars.target_label.value_or(ctx.classifier.predict(sentence).label);
  const std::size_t steps = std::max<std::size_t>(1, vars.ig_steps.value_or(ctx.limits.default_ig_steps));
  const auto result = integrated_gradients(ctx.classifier, sentence, target, steps);

  std::vector<std::string> notices;
  std::size_t top_k = vars.top_k.value_or(ctx.limits.default_top_k);
  if (top_k == 0) top_k = ctx.limits.default_top_k;
  if (top_k > result.words.size()) {
    notices.push_back("the sentence has only " + std::to_string(result.words.size()) +
                      " words; showing all of them");
    top_k = result.words.size();
  }

  std::vector<std::size_t> order(result.words.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(result.word_weights[a]) > std::abs(result.word_weights[b]);
  });

  AttributionMap map;
  map.target = target;
  map.top_k = top_k;
  for (std::size_t w = 0; w < result.words.size(); ++w) map.tokens.push_back({result.words[w], result.word_weights[w], false});
  std::string listing;
  for (std::size_t r = 0; r < top_k; ++r) {
    const auto w = order[r];
    map.tokens[w].highlighted = true;
    if (r) listing += ", ";
    const double weight = result.word_weights[w];
    listing += "\"" + result.words[w] + "\" (" + (weight >= 0 ? "+" : "") + format_fixed(weight, 3) + ")";
  }
  auto payload = make_payload(Intent::Attribution, ctx.templates, "attribution",
                              {{"k", std::to_string(top_k)}, {"label", label_name(target)}, {"words", listing}});
  payload.notices = std::move(notices);
  payload.attachments.emplace_back(std::move(map));
  payload.followups = {Intent::Counterfactual, Intent::Example};
  return payload;
}

// ---------------------------------------------------------------------------
// Counterfactual rewrites

std::string build_rewrite_prompt(std::string_view sentence, AspectLabel target, const ExplainerContext& ctx) {
  const auto query = ctx.classifier.embed(sentence);
  const auto& entries = ctx.index.entries();
  std::string prompt;
  for (auto aspect : kAllAspects) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].label == aspect) ranked.emplace_back(similarity(query, entries[i].embedding), i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const auto n = std::min(ranked.size(), ctx.limits.prompt_examples_per_aspect);
    for (std::size_t r = 0; r < n; ++r) {
      prompt += entries[ranked[r].second].text + " is labeled " + label_name(aspect) + "\n";
    }
  }
  prompt += "Rewrite " + std::string(sentence) + " into label " + label_name(target);
  return prompt;
}

ExplanationPayload explain_counterfactual(std::string_view sentence, std::optional<AspectLabel> target,
                                          const ExplainerContext& ctx) {
  const auto prediction = ctx.classifier.predict(sentence);
  if (!target) {
    std::size_t runner_up = kNumAspects;
    for (std::size_t i = 0; i < kNumAspects; ++i) {
      if (aspect_at(i) == prediction.label) continue;
      if (runner_up == kNumAspects || prediction.probabilities[i] > prediction.probabilities[runner_up]) runner_up = i;
    }
    target = aspect_at(runner_up);
  }
  if (*target == prediction.label) {
    auto payload = failure(Intent::Counterfactual, ctx.templates, "counterfactual.same_label",
                           {{"label", label_name(prediction.label)}});
    payload.followups = {Intent::Example, Intent::Attribution};
    return payload;
  }

  CounterfactualCandidate candidate;
  candidate.target = *target;
  bool have_candidate = false;
  if (ctx.generator != nullptr) {
    const auto result = ctx.generator->complete(
        {build_rewrite_prompt(sentence, *target, ctx), ctx.limits.generator_max_length});
    const auto text = result.ok ? trim(result.text.substr(0, result.text.find('\n'))) : std::string();
    if (!text.empty()) {
      candidate.text = text;
      candidate.provenance = Provenance::ExternalGenerator;
      have_candidate = true;
    } else {
      candidate.note = "external generator unavailable (" +
                       (result.ok ? std::string("empty completion") : result.error) +
                       "); fell back to retrieval";
    }
  }
  if (!have_candidate) {
    const auto query = ctx.classifier.embed(sentence);
    const auto query_norm = normalize_whitespace(sentence);
    const auto& entries = ctx.index.entries();
    std::optional<std::size_t> best;
    double best_similarity = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].label != *target) continue;
      if (normalize_whitespace(entries[i].text) == query_norm) continue;
      const double s = similarity(query, entries[i].embedding);
      if (!best || s > best_similarity) {
        best = i;
        best_similarity = s;
      }
    }
    if (!best) {
      auto payload = failure(Intent::Counterfactual, ctx.templates, "counterfactual.none",
                             {{"target", label_name(*target)}, {"conference", ctx.profile.conference}});
      payload.followups = {Intent::Example};
      return payload;
    }
    candidate.text = entries[*best].text;
    candidate.provenance = Provenance::Retrieval;
  }

  const auto repredicted = ctx.classifier.predict(candidate.text);
  candidate.repredicted = repredicted.label;
  candidate.repredicted_confidence = repredicted.confidence;
  candidate.reaches_target = repredicted.label == *target;

  Slots slots{{"target", label_name(*target)},
              {"original", label_name(prediction.label)},
              {"candidate", candidate.text},
              {"provenance", candidate.provenance == Provenance::Retrieval
                                 ? "retrieved from the conference corpus"
                                 : "generated by the external rewriter"},
              {"repredicted", label_name(repredicted.label)},
              {"confidence", format_fixed(repredicted.confidence, 2)}};
  auto payload = make_payload(Intent::Counterfactual, ctx.templates,
                              candidate.reaches_target ? "counterfactual" : "counterfactual.mismatch", slots);
  if (!candidate.note.empty()) payload.notices.push_back(candidate.note);
  payload.attachments.emplace_back(std::move(candidate));
  payload.followups = {Intent::Example, Intent::Attribution};
  return payload;
}

// ---------------------------------------------------------------------------
// Suggestion explanations

std::vector<Intent> suggestion_followups(ReviewKind kind) {
  switch (kind) {
    case ReviewKind::Structure: return {Intent::Counterfactual, Intent::Example};
    case ReviewKind::Style: return {Intent::Example, Intent::Attribution};
    case ReviewKind::Length: return {Intent::SentenceLength, Intent::Example};
  }
  return {};
}

ExplanationPayload explain_suggestion(const ReviewItem& item, std::size_t item_revision,
                                      std::size_t current_revision, const ExplainerContext& ctx,
                                      const ReviewConfig& review_config) {
  if (item_revision != current_revision) {
    auto payload = failure(Intent::Suggestion, ctx.templates, "suggestion.stale", {});
    payload.followups = {Intent::Suggestion};
    return payload;
  }
  const auto& p = ctx.profile;
  Slots slots{{"sentence", "S" + std::to_string(item.sentence_index + 1)},
              {"conference", p.conference},
              {"current", label_name(item.current_label)}};
  std::string id;
  switch (item.kind) {
    case ReviewKind::Structure:
      id = "suggestion.structure";
      slots["suggested"] = item.suggested_label ? label_name(*item.suggested_label) : std::string();
      slots["patterns"] = std::to_string(p.patterns.size());
      break;
    case ReviewKind::Style:
      id = "suggestion.style";
      slots["score"] = std::to_string(item.quality_score.value_or(0));
      slots["threshold"] = std::to_string(review_config.style_threshold);
      break;
    case ReviewKind::Length:
      id = "suggestion.length";
      slots["tokens"] = std::to_string(item.token_count.value_or(0));
      slots["low"] = format_fixed(p.length_stats.p5, 0);
      slots["high"] = format_fixed(p.length_stats.p95, 0);
      break;
  }
  const auto followups = suggestion_followups(item.kind);
  std::string actions;
  for (std::size_t i = 0; i < followups.size(); ++i) {
    if (i) actions += i + 1 == followups.size() ? " or " : ", ";
    actions += "\"" + std::string(button_label(followups[i])) + "\"";
  }
  auto payload = make_payload(Intent::Suggestion, ctx.templates, id, slots);
  payload.text += " " + ctx.templates.render("suggestion.improve", {{"actions", actions}});
  payload.followups = followups;
  return payload;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const ExplanationVariables& v) {
  nlohmann::json out = nlohmann::json::object();
  if (v.target_label) out["target_label"] = label_name(*v.target_label);
  if (v.example_count) out["example_count"] = *v.example_count;
  if (v.rank_method) out["rank_method"] = std::string(to_string(*v.rank_method));
  if (v.keyword) out["keyword"] = *v.keyword;
  if (v.top_k) out["top_k"] = *v.top_k;
  if (v.ig_steps) out["ig_steps"] = *v.ig_steps;
  return out;
}

ExplanationVariables variables_from_json(const nlohmann::json& object) {
  ExplanationVariables v;
  if (!object.is_object()) return v;
  if (auto it = object.find("target_label"); it != object.end() && it->is_string()) {
    v.target_label = parse_aspect(it->get<std::string>());
  }
  if (auto it = object.find("example_count"); it != object.end() && it->is_number_unsigned()) {
    v.example_count = it->get<std::size_t>();
  }
  if (auto it = object.find("rank_method"); it != object.end() && it->is_string()) {
    v.rank_method = it->get<std::string>() == "quality" ? RankMethod::Quality : RankMethod::Similarity;
  }
  if (auto it = object.find("keyword"); it != object.end() && it->is_string()) v.keyword = it->get<std::string>();
  if (auto it = object.find("top_k"); it != object.end() && it->is_number_unsigned()) v.top_k = it->get<std::size_t>();
  if (auto it = object.find("ig_steps"); it != object.end() && it->is_number_unsigned()) {
    v.ig_steps = it->get<std::size_t>();
  }
  return v;
}

nlohmann::json to_json(const Attachment& attachment) {
  return std::visit(
      [](const auto& a) -> nlohmann::json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, AttributionMap>) {
          nlohmann::json tokens = nlohmann::json::array();
          for (const auto& t : a.tokens) {
            tokens.push_back({{"token", t.token}, {"weight", t.weight}, {"highlighted", t.highlighted}});
          }
          return {{"type", "attribution_map"}, {"target", label_name(a.target)}, {"top_k", a.top_k}, {"tokens", tokens}};
        } else if constexpr (std::is_same_v<T, ExampleList>) {
          nlohmann::json examples = nlohmann::json::array();
          for (const auto& e : a.examples) {
            examples.push_back({{"sentence", e.sentence},
                                {"label", label_name(e.label)},
                                {"similarity", e.similarity},
                                {"quality", e.quality}});
          }
          return {{"type", "example_list"}, {"rank_method", std::string(to_string(a.rank))}, {"examples", examples}};
        } else if constexpr (std::is_same_v<T, ScoreCard>) {
          nlohmann::json entries = nlohmann::json::array();
          for (const auto& [name, value] : a.entries) entries.push_back({{"name", name}, {"value", value}});
          return {{"type", "score_card"}, {"title", a.title}, {"entries", entries}};
        } else {
          return {{"type", "counterfactual_candidate"},
                  {"text", a.text},
                  {"target", label_name(a.target)},
                  {"repredicted", label_name(a.repredicted)},
                  {"repredicted_confidence", a.repredicted_confidence},
                  {"provenance", std::string(to_string(a.provenance))},
                  {"reaches_target", a.reaches_target},
                  {"note", a.note}};
        }
      },
      attachment);
}

nlohmann::json to_json(const ExplanationPayload& payload) {
  nlohmann::json attachments = nlohmann::json::array();
  for (const auto& a : payload.attachments) attachments.push_back(to_json(a));
  nlohmann::json followups = nlohmann::json::array();
  for (auto f : payload.followups) followups.push_back(std::string(to_string(f)));
  return {{"intent", std::string(to_string(payload.intent))},
          {"ok", payload.ok},
          {"text", payload.text},
          {"attachments", attachments},
          {"followups", followups},
          {"notices", payload.notices}};
}

}  // namespace convxai
