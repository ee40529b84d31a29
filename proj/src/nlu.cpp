#include "convxai/nlu.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "convxai/embedded_data.hpp"
#include "convxai/error.hpp"
#include "convxai/text.hpp"

namespace convxai {

namespace {

std::vector<std::string> phrase_tokens(std::string_view phrase) { return tokenize(phrase); }

}  // namespace

const PhrasingInventory& PhrasingInventory::builtin() {
  static const PhrasingInventory inventory =
      from_json(nlohmann::json::parse(embedded::kPhrasingsJson));
  return inventory;
}

PhrasingInventory PhrasingInventory::from_json(const nlohmann::json& object) {
  if (!object.is_object()) throw ArtifactError("phrasings: expected an object");
  if (object.value("format_version", 0) != kPhrasingFormatVersion) {
    throw ArtifactError("phrasings: unsupported format_version");
  }
  PhrasingInventory inv;
  inv.similarity_threshold = object.value("similarity_threshold", 0.55);
  const auto& intents = object.at("intents");
  for (auto it = intents.begin(); it != intents.end(); ++it) {
    auto intent = parse_intent(it.key());
    if (!intent || *intent == Intent::Fallback) {
      throw ArtifactError("phrasings: unknown intent '" + it.key() + "'");
    }
    auto& kws = inv.keywords[*intent];
    for (const auto& k : it.value().value("keywords", nlohmann::json::array())) {
      IntentKeyword kw{k.at("phrase").get<std::string>(), k.value("weight", 1)};
      if (phrase_tokens(kw.phrase).empty() || kw.weight <= 0) {
        throw ArtifactError("phrasings: bad keyword for " + it.key());
      }
      kws.push_back(std::move(kw));
    }
    auto& ph = inv.phrasings[*intent];
    for (const auto& p : it.value().value("phrasings", nlohmann::json::array())) {
      ph.push_back(p.get<std::string>());
    }
  }
  for (Intent intent : kExplanationIntents) {
    if (inv.phrasings[intent].empty()) {
      throw ArtifactError("phrasings: no phrasings for " + std::string(to_string(intent)));
    }
  }
  return inv;
}

PhrasingInventory PhrasingInventory::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(path.string() + ": " + e.what());
  }
}

nlohmann::json PhrasingInventory::to_json() const {
  nlohmann::json intents = nlohmann::json::object();
  for (Intent intent : kExplanationIntents) {
    nlohmann::json entry;
    entry["keywords"] = nlohmann::json::array();
    if (auto it = keywords.find(intent); it != keywords.end()) {
      for (const auto& kw : it->second) {
        entry["keywords"].push_back({{"phrase", kw.phrase}, {"weight", kw.weight}});
      }
    }
    auto it = phrasings.find(intent);
    entry["phrasings"] = it == phrasings.end() ? nlohmann::json::array() : nlohmann::json(it->second);
    intents[std::string(to_string(intent))] = std::move(entry);
  }
  return {{"format_version", kPhrasingFormatVersion},
          {"similarity_threshold", similarity_threshold},
          {"intents", std::move(intents)}};
}

std::string PhrasingInventory::canonical(Intent intent) const {
  auto it = phrasings.find(intent);
  if (it == phrasings.end() || it->second.empty()) return std::string(button_label(intent));
  return it->second.front();
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({sub, up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t typo_budget(std::string_view token) {
  if (token.size() < 4) return 0;
  if (token.size() < 6) return 1;
  return 2;
}

bool fuzzy_match(std::string_view token, std::string_view keyword) {
  if (token == keyword) return true;
  std::size_t budget = typo_budget(token);
  if (budget == 0) return false;
  std::size_t gap = token.size() > keyword.size() ? token.size() - keyword.size()
                                                  : keyword.size() - token.size();
  if (gap > budget) return false;
  return levenshtein(token, keyword) <= budget;
}

namespace {

std::unordered_map<std::string, double> trigram_counts(std::string_view text) {
  std::unordered_map<std::string, double> counts;
  for (const auto& tok : tokenize(text)) {
    std::string padded = "  " + tok + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) counts[padded.substr(i, 3)] += 1.0;
  }
  return counts;
}

}  // namespace

double trigram_cosine(std::string_view a, std::string_view b) {
  auto ca = trigram_counts(a);
  auto cb = trigram_counts(b);
  if (ca.empty() || cb.empty()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (const auto& [g, v] : ca) {
    na += v * v;
    if (auto it = cb.find(g); it != cb.end()) dot += v * it->second;
  }
  for (const auto& [g, v] : cb) nb += v * v;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string_view to_string(MatchStage stage) {
  switch (stage) {
    case MatchStage::Context: return "context";
    case MatchStage::Rule: return "rule";
    case MatchStage::Similarity: return "similarity";
    case MatchStage::Fallback: return "fallback";
  }
  return "fallback";
}

bool accepts_variables(Intent intent) {
  return intent == Intent::Example || intent == Intent::Attribution ||
         intent == Intent::Counterfactual;
}

// ---------------------------------------------------------------------------
// Variable grammar

namespace {

struct Fragment {
  std::string text;
  bool quoted = false;
};

std::vector<Fragment> lex(std::string_view utterance) {
  std::vector<Fragment> out;
  std::string current;
  auto flush = [&] {
    std::string w;
    for (char c : current) {
      unsigned char u = static_cast<unsigned char>(c);
      if (std::isalnum(u) || c == '-' || c == '_') w.push_back(static_cast<char>(std::tolower(u)));
    }
    if (!w.empty()) out.push_back({w, false});
    current.clear();
  };
  for (std::size_t i = 0; i < utterance.size(); ++i) {
    char c = utterance[i];
    if (c == '"') {
      flush();
      auto close = utterance.find('"', i + 1);
      if (close == std::string_view::npos) close = utterance.size();
      std::string kw = normalize_whitespace(utterance.substr(i + 1, close - i - 1));
      if (!kw.empty()) out.push_back({kw, true});
      i = close;
    } else if (c == '+') {
      flush();
      out.push_back({"+", false});
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

std::optional<std::size_t> as_number(const std::string& word) {
  static const std::unordered_map<std::string, std::size_t> words = {
      {"one", 1}, {"two", 2},   {"three", 3}, {"four", 4}, {"five", 5},
      {"six", 6}, {"seven", 7}, {"eight", 8}, {"nine", 9}, {"ten", 10}};
  if (auto it = words.find(word); it != words.end()) return it->second;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size()) return std::nullopt;
  return value;
}

// Words allowed around variables without making the utterance a question.
const std::unordered_set<std::string>& filler_words() {
  static const std::unordered_set<std::string> words = {
      "and", "with", "please", "by", "rank", "ranked", "sort", "sorted", "label", "in",
      "into", "to", "as", "instead", "only", "use", "ranking", "now", "then", "ok", "okay"};
  return words;
}

std::optional<AspectLabel> label_word(const std::string& word, bool explicit_context) {
  auto label = parse_aspect(word);
  if (!label) return std::nullopt;
  // "other" is too common to be read as a label without a cue.
  if (*label == AspectLabel::Other && !explicit_context) return std::nullopt;
  return label;
}

struct RawVariables {
  std::optional<std::size_t> bare_number;
  std::optional<std::size_t> plus_count;
  std::optional<std::size_t> top;
  std::optional<std::size_t> steps;
  std::optional<AspectLabel> label;
  bool label_cued = false;
  std::optional<RankMethod> rank;
  std::optional<std::string> keyword;
  bool any = false;
  bool all_consumed = true;
};

RawVariables scan(const std::vector<Fragment>& frags) {
  RawVariables raw;
  auto set_label = [&](AspectLabel label, bool cued) {
    // A cued label ("into method") wins over a bare one.
    if (cued || !raw.label_cued) {
      raw.label = label;
      raw.label_cued = raw.label_cued || cued;
    }
    raw.any = true;
  };
  for (std::size_t i = 0; i < frags.size(); ++i) {
    const auto& f = frags[i];
    if (f.quoted) {
      raw.keyword = f.text;
      raw.any = true;
      continue;
    }
    const std::string& w = f.text;
    bool prev_cue = i > 0 && !frags[i - 1].quoted &&
                    (frags[i - 1].text == "into" || frags[i - 1].text == "to" ||
                     frags[i - 1].text == "as" || frags[i - 1].text == "label" ||
                     frags[i - 1].text == "+");
    if (w == "top" && i + 1 < frags.size() && !frags[i + 1].quoted) {
      if (auto n = as_number(frags[i + 1].text)) {
        raw.top = n;
        raw.any = true;
        ++i;
        continue;
      }
    }
    if (auto n = as_number(w)) {
      if (i + 1 < frags.size() && !frags[i + 1].quoted &&
          (frags[i + 1].text == "steps" || frags[i + 1].text == "step")) {
        raw.steps = n;
        ++i;
      } else if (i + 2 < frags.size() && frags[i + 1].text == "+" && !frags[i + 2].quoted) {
        if (auto label = label_word(frags[i + 2].text, true)) {
          raw.plus_count = n;
          set_label(*label, true);
          i += 2;
        } else {
          raw.bare_number = n;
        }
      } else {
        raw.bare_number = n;
      }
      raw.any = true;
      continue;
    }
    if (w == "+") continue;
    if (auto label = label_word(w, prev_cue)) {
      set_label(*label, prev_cue);
      continue;
    }
    if (w == "similar" || w == "similarity" || w == "similarly") {
      raw.rank = RankMethod::Similarity;
      raw.any = true;
      continue;
    }
    if (w == "quality") {
      raw.rank = RankMethod::Quality;
      raw.any = true;
      continue;
    }
    if (!filler_words().contains(w)) raw.all_consumed = false;
  }
  return raw;
}

std::string intent_name(Intent intent) { return std::string(to_string(intent)); }

}  // namespace

ParsedVariables parse_variables(std::string_view utterance, Intent intent,
                                std::size_t max_example_count) {
  ParsedVariables out;
  RawVariables raw = scan(lex(utterance));
  out.variables_only = raw.any && raw.all_consumed;
  auto& v = out.variables;
  auto drop = [&](const std::string& what) {
    out.dropped = true;
    out.notices.push_back("Ignored " + what + ": not used by " + intent_name(intent) + ".");
  };

  switch (intent) {
    case Intent::Example: {
      std::optional<std::size_t> count = raw.plus_count;
      if (!count) count = raw.top;
      if (!count) count = raw.bare_number;
      if (count) {
        if (*count == 0) {
          out.notices.push_back("Example count must be at least 1; using 1.");
          count = 1;
        } else if (*count > max_example_count) {
          out.notices.push_back("Example count " + std::to_string(*count) + " exceeds the limit; using " +
                                std::to_string(max_example_count) + ".");
          count = max_example_count;
        }
        v.example_count = count;
      }
      v.target_label = raw.label;
      v.rank_method = raw.rank;
      v.keyword = raw.keyword;
      if (raw.steps) drop("step count");
      break;
    }
    case Intent::Attribution: {
      std::optional<std::size_t> k = raw.top;
      if (!k) k = raw.bare_number;
      if (!k) k = raw.plus_count;
      if (k) v.top_k = std::max<std::size_t>(*k, 1);
      if (k && *k == 0) out.notices.push_back("Top-k must be at least 1; using 1.");
      v.target_label = raw.label;
      if (raw.steps) v.ig_steps = std::max<std::size_t>(*raw.steps, 1);
      if (raw.keyword) drop("keyword");
      if (raw.rank) drop("rank method");
      break;
    }
    case Intent::Counterfactual: {
      v.target_label = raw.label;
      if (raw.bare_number || raw.plus_count || raw.top) drop("count");
      if (raw.steps) drop("step count");
      if (raw.keyword) drop("keyword");
      if (raw.rank) drop("rank method");
      break;
    }
    default:
      // Question phrasing naturally carries label words and ranks ("how
      // many background sentences"); only report explicit variable syntax.
      if (raw.plus_count || raw.top || raw.steps || raw.keyword) drop("variables");
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classifier

IntentClassifier::IntentClassifier(PhrasingInventory inventory) : inventory_(std::move(inventory)) {}

IntentClassifier::Scored IntentClassifier::best_similarity(
    std::string_view utterance, const std::vector<Intent>& candidates) const {
  Scored best{Intent::Fallback, 0.0};
  for (Intent intent : candidates) {
    auto it = inventory_.phrasings.find(intent);
    if (it == inventory_.phrasings.end()) continue;
    for (const auto& p : it->second) {
      double s = trigram_cosine(utterance, p);
      if (s > best.similarity) best = {intent, s};
    }
  }
  return best;
}

IntentMatch IntentClassifier::classify(std::string_view utterance,
                                       std::optional<Intent> last_intent) const {
  auto tokens = tokenize(utterance);
  if (tokens.empty()) return {};

  if (last_intent && accepts_variables(*last_intent)) {
    ParsedVariables parsed = parse_variables(utterance, *last_intent);
    if (parsed.variables_only && !parsed.dropped) return {*last_intent, 1.0, MatchStage::Context};
  }
  {
    // "2 + background" outside an Example exchange still asks for examples.
    ParsedVariables parsed = parse_variables(utterance, Intent::Example);
    if (parsed.variables_only && !parsed.dropped && parsed.variables.example_count) {
      return {Intent::Example, 1.0, MatchStage::Context};
    }
  }

  // Tokens that exactly equal some keyword word are never treated as typos
  // of another ("conference" is not a misspelled "confidence").
  std::unordered_set<std::string> vocabulary;
  for (const auto& [intent, kws] : inventory_.keywords) {
    for (const auto& kw : kws) {
      for (auto& t : phrase_tokens(kw.phrase)) vocabulary.insert(std::move(t));
    }
  }

  std::map<Intent, int> scores;
  std::map<Intent, bool> exact;
  for (const auto& [intent, kws] : inventory_.keywords) {
    for (const auto& kw : kws) {
      auto words = phrase_tokens(kw.phrase);
      if (words.size() > tokens.size()) continue;
      bool found = false, found_exact = false;
      for (std::size_t p = 0; p + words.size() <= tokens.size() && !found_exact; ++p) {
        bool match = true, all_exact = true;
        for (std::size_t q = 0; q < words.size() && match; ++q) {
          const auto& tok = tokens[p + q];
          if (tok == words[q]) continue;
          all_exact = false;
          match = !vocabulary.contains(tok) && fuzzy_match(tok, words[q]);
        }
        if (match) {
          found = true;
          found_exact = found_exact || all_exact;
        }
      }
      if (found) {
        scores[intent] += kw.weight;
        if (found_exact) exact[intent] = true;
      }
    }
  }

  int top = 0;
  for (const auto& [intent, s] : scores) top = std::max(top, s);
  if (top > 0) {
    std::vector<Intent> winners;
    for (const auto& [intent, s] : scores) {
      if (s == top) winners.push_back(intent);
    }
    if (winners.size() == 1) {
      return {winners.front(), exact[winners.front()] ? 1.0 : 0.9, MatchStage::Rule};
    }
    Scored tie = best_similarity(utterance, winners);
    Intent pick = tie.intent == Intent::Fallback ? winners.front() : tie.intent;
    return {pick, 0.8, MatchStage::Rule};
  }

  std::vector<Intent> all(kExplanationIntents.begin(), kExplanationIntents.end());
  Scored best = best_similarity(utterance, all);
  if (best.similarity >= inventory_.similarity_threshold) {
    return {best.intent, best.similarity, MatchStage::Similarity};
  }
  return {Intent::Fallback, best.similarity, MatchStage::Fallback};
}

}  // namespace convxai
