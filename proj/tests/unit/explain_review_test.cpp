#include <doctest.h>

#include <cmath>
#include <thread>

#include "httplib.h"

#include "convxai/error.hpp"
#include "convxai/explain.hpp"
#include "convxai/generator.hpp"
#include "convxai/random.hpp"
#include "convxai/review.hpp"
#include "convxai/synthetic.hpp"
#include "convxai/templates.hpp"
#include "../support.hpp"

using namespace convxai;

namespace {

ExplainerContext chi_context(TextGenerator* generator = nullptr) {
  const auto& bundle = testing::demo_bundle();
  const auto& chi = bundle.conference("CHI");
  return ExplainerContext{bundle.classifier, chi.style_model, chi.profile, chi.index, bundle.templates, generator};
}

template <typename T>
const T& attachment(const ExplanationPayload& p) {
  REQUIRE(p.attachments.size() == 1);
  REQUIRE(std::holds_alternative<T>(p.attachments[0]));
  return std::get<T>(p.attachments[0]);
}

// Majority vote over the aligned pattern positions, reimplemented directly.
std::vector<std::optional<AspectLabel>> vote_oracle(const std::vector<AspectLabel>& predicted,
                                                    const StructurePattern& pattern) {
  const auto alignment = dtw_align(predicted, pattern.sequence);
  std::vector<std::optional<AspectLabel>> out(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    std::vector<AspectLabel> seen;
    std::array<int, kNumAspects> votes{};
    for (const auto& [pi, pj] : alignment.path) {
      if (pi != i) continue;
      if (votes[index_of(pattern.sequence[pj])]++ == 0) seen.push_back(pattern.sequence[pj]);
    }
    const int top = *std::max_element(votes.begin(), votes.end());
    if (votes[index_of(predicted[i])] == top) continue;
    for (auto l : seen) {
      if (votes[index_of(l)] == top) {
        out[i] = l;
        break;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("templates fill every slot and never leak braces") {
  const auto& t = TemplateStore::builtin();
  std::vector<std::string> diag;
  const auto text = t.render("examples", {{"count", "2"}, {"label", "{x}"}, {"conference", "CHI"},
                                          {"keyword_note", ""}, {"rank", "similarity"}, {"list", "- a"}},
                             &diag);
  CHECK(diag.empty());
  CHECK(text.find('{') == std::string::npos);
  CHECK(text.find('}') == std::string::npos);
  CHECK(text.find("(x)") != std::string::npos);
}

TEST_CASE("a missing template renders the fallback with a diagnostic") {
  const auto& t = TemplateStore::builtin();
  std::vector<std::string> diag;
  const auto text = t.render("no.such.template", {}, &diag);
  CHECK(text == t.render(kFallbackTemplate, {}));
  CHECK(diag.size() == 1);
  diag.clear();
  const auto partial = t.render("review.style", {{"sentence", "S1"}}, &diag);
  CHECK(partial.find('{') == std::string::npos);
  CHECK(!diag.empty());
}

TEST_CASE("every builtin template renders cleanly with all slots bound") {
  const auto& t = TemplateStore::builtin();
  const auto j = t.to_json();
  for (const auto& [id, raw] : j.at("templates").items()) {
    Slots slots;
    const std::string s = raw.get<std::string>();
    for (std::size_t p = s.find('{'); p != std::string::npos; p = s.find('{', p + 1)) {
      slots[s.substr(p + 1, s.find('}', p) - p - 1)] = "v";
    }
    std::vector<std::string> diag;
    const auto text = t.render(id, slots, &diag);
    CHECK_MESSAGE(diag.empty(), id);
    CHECK_MESSAGE(text.find('{') == std::string::npos, id);
  }
  CHECK_THROWS_AS(TemplateStore::from_json({{"format_version", 1}, {"templates", {{"a", "b"}}}}), ArtifactError);
}

TEST_CASE("score formulas") {
  ReviewItem structure;
  structure.kind = ReviewKind::Structure;
  ReviewItem style;
  style.kind = ReviewKind::Style;
  const std::vector<int> q = {5, 4, 3, 2};
  auto s = overall_scores(std::vector<ReviewItem>{structure, structure, style}, q);
  CHECK(s.structure == 4.0);
  CHECK(s.style == 3.5);
  CHECK(s.overall == 3.75);
  s = overall_scores(std::vector<ReviewItem>{}, q);
  CHECK(s.structure == 5.0);
  s = overall_scores(std::vector<ReviewItem>(12, structure), std::vector<int>{1});
  CHECK(s.structure == 0.0);
  CHECK(s.overall == 0.5);
  CHECK_THROWS_AS(overall_scores(std::vector<ReviewItem>{}, std::vector<int>{}), InvalidInput);
}

TEST_CASE("structure review matches the majority-vote oracle") {
  Rng rng(23);
  const auto& t = TemplateStore::builtin();
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<StructurePattern> patterns(1 + rng.below(3));
    for (auto& p : patterns) {
      std::vector<AspectLabel> base(2 + rng.below(5));
      for (auto& l : base) l = aspect_at(rng.below(4));
      p.sequence = resample_labels(base, 12);
      p.support = 1;
    }
    std::vector<AspectLabel> predicted(1 + rng.below(8));
    for (auto& l : predicted) l = aspect_at(rng.below(4));
    const auto match = closest_pattern(predicted, patterns);
    for (const auto& p : patterns) CHECK(match.alignment.distance <= dtw_distance(predicted, p.sequence));
    const auto oracle = vote_oracle(predicted, patterns[match.pattern_index]);
    const auto items = structure_review(predicted, patterns, t);
    std::size_t next = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      if (!oracle[i]) continue;
      REQUIRE(next < items.size());
      CHECK(items[next].sentence_index == i);
      CHECK(items[next].suggested_label == oracle[i]);
      CHECK(items[next].current_label == predicted[i]);
      CHECK(items[next].message.find('{') == std::string::npos);
      ++next;
    }
    CHECK(next == items.size());
  }
}

TEST_CASE("a sentence sequence equal to a pattern gets no structure items") {
  using L = AspectLabel;
  const std::vector<L> seq = {L::Background, L::Purpose, L::Method, L::Finding};
  std::vector<StructurePattern> patterns = {{resample_labels(seq, 12), 3}};
  CHECK(structure_review(seq, patterns).empty());
}

TEST_CASE("style and length review thresholds") {
  const auto& profile = testing::demo_bundle().conference("CHI").profile;
  std::string long_sentence;
  for (int i = 0; i < 80; ++i) long_sentence += "word ";
  const std::vector<std::string> sentences = {"We study tools for writers in the wild today.", long_sentence, "Short."};
  const std::vector<AspectLabel> labels(3, AspectLabel::Method);
  const std::vector<int> q = {3, 2, 5};
  const auto items = style_and_length_review(sentences, labels, q, profile);
  std::size_t styles = 0, lengths = 0;
  for (const auto& i : items) {
    if (i.kind == ReviewKind::Style) {
      ++styles;
      CHECK(i.sentence_index == 1);
      CHECK(i.quality_score == 2);
    } else {
      ++lengths;
      CHECK(i.sentence_index != 0);
    }
  }
  CHECK(styles == 1);
  CHECK(lengths == 2);
  ReviewConfig strict;
  strict.style_threshold = 3;
  CHECK(style_and_length_review(sentences, labels, q, profile, strict).size() == 4);
}

TEST_CASE("integrated gradients are complete for the linear head") {
  const auto& model = testing::demo_bundle().classifier;
  const auto& corpus = testing::demo_corpus();
  int n = 0;
  for (const auto& r : corpus.records()) {
    for (const auto& s : r.sentences) {
      for (auto target : kAllAspects) {
        const auto ig = integrated_gradients(model, s.text, target, 16);
        double sum = 0, word_sum = 0;
        for (double a : ig.feature_attributions) sum += a;
        for (double w : ig.word_weights) word_sum += w;
        CHECK(std::abs(sum - (ig.logit_input - ig.logit_baseline)) <= 1e-6);
        CHECK(std::abs(word_sum - sum) <= 1e-9);
      }
      if (++n == 40) return;
    }
  }
}

TEST_CASE("integrated gradients converge for the hidden head") {
  ClassifierHyperparams h;
  h.hidden_units = 6;
  h.epochs = 4;
  h.feature_dim = 1u << 10;
  const auto model = train_classifier(separable_corpus(150, 8), h);
  const auto ig = integrated_gradients(model, "We propose a framework for drafting abstracts.", AspectLabel::Purpose, 256);
  double sum = 0;
  for (double a : ig.feature_attributions) sum += a;
  CHECK(sum == doctest::Approx(ig.logit_input - ig.logit_baseline).epsilon(1e-3));
  CHECK_THROWS_AS(integrated_gradients(model, "x", AspectLabel::Method, 0), InvalidInput);
}

TEST_CASE("a word with no features gets exactly zero attribution") {
  const auto& model = testing::demo_bundle().classifier;
  const auto ig = integrated_gradients(model, "We propose -- a new method .", AspectLabel::Method, 32);
  REQUIRE(ig.words.size() == 7);
  CHECK(ig.word_weights[2] == 0.0);
  CHECK(ig.word_weights[6] == 0.0);
}

TEST_CASE("attribution highlights the top-k words by magnitude") {
  const auto ctx = chi_context();
  ExplanationVariables v;
  v.top_k = 3;
  const auto p = explain_attribution("Existing approaches to crowdsourcing often struggle with privacy concerns.", v, ctx);
  const auto& map = attachment<AttributionMap>(p);
  CHECK(map.top_k == 3);
  double min_on = INFINITY, max_off = 0;
  int on = 0;
  for (const auto& t : map.tokens) {
    if (t.highlighted) {
      ++on;
      min_on = std::min(min_on, std::abs(t.weight));
    } else {
      max_off = std::max(max_off, std::abs(t.weight));
    }
  }
  CHECK(on == 3);
  CHECK(min_on >= max_off);
  v.top_k = 50;
  const auto all = explain_attribution("Results improve.", v, ctx);
  CHECK(attachment<AttributionMap>(all).top_k == 2);
  CHECK(all.notices.size() == 1);
  CHECK(!explain_attribution("   ", {}, ctx).ok);
}

TEST_CASE("examples respect count, label, keyword and exclude the query") {
  const auto ctx = chi_context();
  const std::string query = ctx.index.entries()[0].text;
  for (std::size_t count : {1, 2, 5}) {
    for (auto label : {AspectLabel::Background, AspectLabel::Method, AspectLabel::Finding}) {
      ExplanationVariables v;
      v.example_count = count;
      v.target_label = label;
      const auto p = explain_examples(query, v, ctx);
      const auto& list = attachment<ExampleList>(p);
      CHECK(list.examples.size() == count);
      for (std::size_t i = 0; i < list.examples.size(); ++i) {
        CHECK(list.examples[i].label == label);
        CHECK(list.examples[i].sentence != query);
        if (i) CHECK(list.examples[i - 1].similarity >= list.examples[i].similarity);
      }
    }
  }
  ExplanationVariables q;
  q.rank_method = RankMethod::Quality;
  q.example_count = 10;
  const auto ranked_payload = explain_examples(query, q, ctx);
  const auto& ranked = attachment<ExampleList>(ranked_payload);
  for (std::size_t i = 1; i < ranked.examples.size(); ++i) CHECK(ranked.examples[i - 1].quality >= ranked.examples[i].quality);
  ExplanationVariables big;
  big.example_count = 50;
  const auto capped = explain_examples(query, big, ctx);
  CHECK(attachment<ExampleList>(capped).examples.size() == ctx.limits.max_example_count);
  CHECK(capped.notices.size() == 1);
  ExplanationVariables none;
  none.keyword = "zzzyyy";
  CHECK(!explain_examples(query, none, ctx).ok);
}

TEST_CASE("retrieval counterfactual re-predicts the candidate") {
  const auto ctx = chi_context();
  const std::string s = "Existing approaches to crowdsourcing often struggle with privacy concerns.";
  const auto p = explain_counterfactual(s, AspectLabel::Method, ctx);
  const auto& c = attachment<CounterfactualCandidate>(p);
  CHECK(c.provenance == Provenance::Retrieval);
  CHECK(c.target == AspectLabel::Method);
  const auto re = ctx.classifier.predict(c.text);
  CHECK(c.repredicted == re.label);
  CHECK(c.repredicted_confidence == re.confidence);
  CHECK(c.reaches_target == (re.label == AspectLabel::Method));
  const auto same = explain_counterfactual(s, ctx.classifier.predict(s).label, ctx);
  CHECK(!same.ok);
  CHECK(same.attachments.empty());
}

TEST_CASE("rewrite prompt lists labeled examples and the instruction") {
  const auto ctx = chi_context();
  const auto prompt = build_rewrite_prompt("We built a tool.", AspectLabel::Finding, ctx);
  CHECK(prompt.find("is labeled background\n") != std::string::npos);
  CHECK(prompt.rfind("Rewrite We built a tool. into label finding") != std::string::npos);
}

TEST_CASE("external generator output is used, and failures fall back to retrieval") {
  httplib::Server server;
  std::string seen_prompt;
  server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_prompt = nlohmann::json::parse(req.body).at("prompt").get<std::string>();
    res.set_content(R"({"completion":"Results show that writers finish faster.\nextra"})", "application/json");
  });
  server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"completion":"late"})", "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpGeneratorConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  HttpTextGenerator good(config);
  const std::string s = "We built a tool for writers.";
  const auto p = explain_counterfactual(s, AspectLabel::Finding, chi_context(&good));
  const auto& c = attachment<CounterfactualCandidate>(p);
  CHECK(c.provenance == Provenance::ExternalGenerator);
  CHECK(c.text == "Results show that writers finish faster.");
  CHECK(seen_prompt.find("into label finding") != std::string::npos);

  config.path = "/slow";
  config.timeout = std::chrono::milliseconds(150);
  HttpTextGenerator slow(config);
  CHECK(!slow.complete({"x", 8}).ok);
  const auto fallback = explain_counterfactual(s, AspectLabel::Finding, chi_context(&slow));
  CHECK(attachment<CounterfactualCandidate>(fallback).provenance == Provenance::Retrieval);
  CHECK(fallback.notices.size() == 1);

  config.path = "/broken";
  config.timeout = std::chrono::milliseconds(2000);
  HttpTextGenerator broken(config);
  const auto r = broken.complete({"x", 8});
  CHECK(!r.ok);
  CHECK(!r.error.empty());
  server.stop();
  thread.join();
}

TEST_CASE("confidence and global explanations render without slot markers") {
  const auto ctx = chi_context();
  const auto pred = ctx.classifier.predict("We propose a tool.");
  const auto c = explain_confidence(pred, ctx.templates);
  CHECK(c.ok);
  CHECK(c.text.find('{') == std::string::npos);
  for (auto kind : {Intent::DataStats, Intent::ModelDescription, Intent::QualityScoreMeaning,
                    Intent::LabelDistribution, Intent::SentenceLength}) {
    const auto g = explain_global(kind, ctx, std::string_view("We propose a tool."));
    CHECK(g.text.find('{') == std::string::npos);
    CHECK(!g.text.empty());
  }
}

TEST_CASE("explanation variables merge and round trip") {
  ExplanationVariables a, b;
  a.example_count = 3;
  a.target_label = AspectLabel::Method;
  b.target_label = AspectLabel::Finding;
  const auto m = a.merged_with(b);
  CHECK(m.example_count == 3u);
  CHECK(m.target_label == AspectLabel::Finding);
  CHECK(variables_from_json(to_json(m)) == m);
  CHECK(ExplanationVariables{}.empty());
}
