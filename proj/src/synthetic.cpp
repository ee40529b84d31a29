#include "convxai/synthetic.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

#include "convxai/error.hpp"

namespace convxai {

namespace {

using Words = std::vector<std::string>;

constexpr AspectLabel B = AspectLabel::Background;
constexpr AspectLabel P = AspectLabel::Purpose;
constexpr AspectLabel M = AspectLabel::Method;
constexpr AspectLabel F = AspectLabel::Finding;
constexpr AspectLabel O = AspectLabel::Other;

struct Vocabulary {
  Words topics;
  Words nouns;
  Words methods;
  Words settings;
  Words metrics;
};

const Vocabulary& vocabulary(std::string_view conference) {
  static const Vocabulary nlp{
      {"machine translation", "question answering", "text summarization", "dialogue systems",
       "sentiment analysis", "information extraction", "named entity recognition", "semantic parsing"},
      {"robustness", "annotation cost", "generalization", "calibration", "factual consistency",
       "low resource settings", "domain shift", "long documents"},
      {"a transformer encoder", "a contrastive objective", "a retrieval module", "a hierarchical decoder",
       "a pretrained language model", "a multilingual adapter"},
      {"three benchmarks", "five public datasets", "a large web corpus", "two languages",
       "a news corpus", "social media posts"},
      {"accuracy", "F1", "BLEU", "ROUGE", "exact match"}};
  static const Vocabulary hci{
      {"writing support tools", "data visualization", "crowdsourcing", "accessibility tools",
       "collaborative editing", "conversational agents", "online learning platforms", "mobile interfaces"},
      {"user trust", "cognitive load", "engagement", "learnability", "privacy concerns",
       "workflow disruption", "novice users", "expert feedback"},
      {"a mixed methods study", "a controlled experiment", "a diary study", "a design probe",
       "a participatory workshop", "a prototype interface"},
      {"a user study with 24 participants", "semi structured interviews", "a field deployment",
       "a survey of 300 respondents", "think aloud sessions", "a two week deployment"},
      {"task completion time", "user satisfaction", "usability scores", "error rates", "perceived workload"}};
  static const Vocabulary ml{
      {"graph learning", "reinforcement learning", "federated learning", "generative modeling",
       "representation learning", "meta learning", "neural architecture search", "continual learning"},
      {"sample efficiency", "training stability", "scalability", "convergence speed", "overfitting",
       "distribution shift", "memory cost", "adversarial robustness"},
      {"a graph neural network", "a variational objective", "a lightweight regularizer", "a novel optimizer",
       "a diffusion model", "a sparse attention layer"},
      {"image classification benchmarks", "continuous control tasks", "synthetic data",
       "large scale pretraining", "standard vision datasets", "offline datasets"},
      {"test accuracy", "sample complexity", "wall clock time", "expected return", "negative log likelihood"}};
  if (conference == "CHI") return hci;
  if (conference == "ICLR") return ml;
  if (conference == "ACL") return nlp;
  const std::array<const Vocabulary*, 3> all = {&nlp, &hci, &ml};
  std::size_t h = 0;
  for (char c : conference) h = h * 31 + static_cast<unsigned char>(c);
  return *all[h % all.size()];
}

const std::vector<Words>& templates() {
  // Indexed by aspect. Slots: {topic} {Topic} {noun} {method} {method2}
  // {setting} {metric} {num}.
  static const std::vector<Words> t = {
      {"{Topic} has become a central problem because of {noun}.",
       "Recent advances in {topic} have raised concerns about {noun}.",
       "Existing approaches to {topic} often struggle with {noun}.",
       "Prior work on {topic} has largely overlooked {noun}.",
       "Despite years of research, {noun} in {topic} remains an open challenge.",
       "Many real world applications of {topic} depend on {noun}."},
      {"In this paper, we propose {method} to improve {noun} in {topic}.",
       "We aim to address {noun} for {topic}.",
       "This work introduces {method} for {topic}.",
       "Our goal is to understand how {noun} affects {topic}.",
       "We set out to investigate whether {method} can reduce problems of {noun}.",
       "Here we study {noun} in the context of {topic}."},
      {"We train {method} on {setting} and tune it with {method2}.",
       "Our approach combines {method} with {method2}.",
       "We evaluate the system on {setting} using {metric} as the main measure.",
       "Specifically, we design {method} that encodes {noun} explicitly.",
       "We collect data from {setting} and annotate it with expert labels.",
       "The pipeline first applies {method} and then refines outputs with {method2}."},
      {"Experiments show that our approach improves {metric} by {num} points.",
       "Results indicate that {noun} improves substantially over strong baselines.",
       "We find that {method} outperforms prior systems on {setting}.",
       "Our analysis reveals that {noun} correlates strongly with {metric}.",
       "The proposed system achieves the best {metric} on {setting}.",
       "Participants and benchmarks alike confirm gains of {num} points in {metric}."},
      {"Code and data for {topic} with {method} are available online.",
       "We release {method} for {topic} as open source software.",
       "Supplementary material on {noun} and {metric} is provided in the appendix.",
       "A video demonstration of {topic} on {setting} accompanies this submission.",
       "We thank our colleagues for discussions on {noun} in {topic}.",
       "An extended version with proofs about {noun} under {setting} is available on request."}};
  return t;
}

std::string fill(std::string_view pattern, Rng& rng, const Vocabulary& v) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '{') {
      out.push_back(pattern[i]);
      continue;
    }
    const auto close = pattern.find('}', i);
    const std::string_view slot = pattern.substr(i + 1, close - i - 1);
    i = close;
    if (slot == "topic") {
      out += rng.pick(v.topics);
    } else if (slot == "Topic") {
      std::string t = rng.pick(v.topics);
      t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
      out += t;
    } else if (slot == "noun") {
      out += rng.pick(v.nouns);
    } else if (slot == "method" || slot == "method2") {
      out += rng.pick(v.methods);
    } else if (slot == "setting") {
      out += rng.pick(v.settings);
    } else if (slot == "metric") {
      out += rng.pick(v.metrics);
    } else if (slot == "num") {
      out += std::to_string(2 + rng.below(19));
    }
  }
  return out;
}

// Draws until the sentence is new to `seen`; gives up on uniqueness after a
// bounded number of attempts.
std::string fresh_sentence(AspectLabel label, Rng& rng, std::string_view conference,
                           std::unordered_set<std::string>& seen) {
  std::string s;
  for (int attempt = 0; attempt < 256; ++attempt) {
    s = synthetic_sentence(label, rng, conference);
    if (seen.insert(s).second) return s;
  }
  throw DegenerateInput("synthetic vocabulary exhausted for " + std::string(to_string(label)));
}

}  // namespace

std::string synthetic_sentence(AspectLabel label, Rng& rng, std::string_view conference) {
  const auto& options = templates()[index_of(label)];
  return fill(rng.pick(options), rng, vocabulary(conference));
}

std::vector<std::vector<AspectLabel>> structure_groups(std::string_view conference) {
  if (conference == "CHI") return {{B, B, P, M, F}, {B, P, M, M, F, O}, {B, P, F}};
  if (conference == "ICLR") return {{B, P, M, M, F}, {P, M, F, F}, {B, B, P, M, F}};
  return {{B, P, M, F}, {B, B, P, M, F, F}, {P, M, M, F}};
}

Corpus synthetic_corpus(const SyntheticOptions& options) {
  Rng rng(options.seed);
  std::vector<CorpusRecord> records;
  for (const auto& conference : options.conferences) {
    const auto groups = structure_groups(conference);
    std::unordered_set<std::string> seen;
    for (std::size_t a = 0; a < options.abstracts_per_conference; ++a) {
      auto labels = groups[a % groups.size()];
      if (rng.uniform() < options.perturbation) {
        const std::size_t at = rng.below(labels.size());
        labels.insert(labels.begin() + static_cast<std::ptrdiff_t>(at), labels[at]);
      }
      CorpusRecord record;
      record.conference = conference;
      record.year = 2019 + static_cast<int>(a % 3);
      record.abstract_id = conference + "-" + std::to_string(a + 1);
      for (AspectLabel label : labels) {
        record.sentences.push_back({fresh_sentence(label, rng, conference, seen), label});
      }
      records.push_back(std::move(record));
    }
  }
  return Corpus(std::move(records));
}

Corpus separable_corpus(std::size_t sentences, std::uint64_t seed, std::string_view conference) {
  Rng rng(seed);
  std::vector<AspectLabel> labels;
  labels.reserve(sentences);
  for (std::size_t i = 0; i < sentences; ++i) labels.push_back(aspect_at(i % kNumAspects));
  rng.shuffle(labels);

  std::unordered_set<std::string> seen;
  std::vector<CorpusRecord> records;
  for (std::size_t i = 0; i < sentences; i += 5) {
    CorpusRecord record;
    record.conference = std::string(conference);
    record.year = 2020;
    record.abstract_id = std::string(conference) + "-" + std::to_string(i / 5 + 1);
    for (std::size_t j = i; j < std::min(i + 5, sentences); ++j) {
      record.sentences.push_back({fresh_sentence(labels[j], rng, conference, seen), labels[j]});
    }
    records.push_back(std::move(record));
  }
  return Corpus(std::move(records));
}

}  // namespace convxai
