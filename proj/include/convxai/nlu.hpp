#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/explain.hpp"
#include "convxai/intent.hpp"
#include "json.hpp"

namespace convxai {

inline constexpr int kPhrasingFormatVersion = 1;

struct IntentKeyword {
  std::string phrase;  // one or more words
  int weight = 1;
};

// Keyword rules and canonical phrasings per intent (data/phrasings.json).
struct PhrasingInventory {
  double similarity_threshold = 0.55;
  std::map<Intent, std::vector<IntentKeyword>> keywords;
  std::map<Intent, std::vector<std::string>> phrasings;

  static const PhrasingInventory& builtin();
  static PhrasingInventory from_json(const nlohmann::json& object);
  static PhrasingInventory load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // First phrasing of `intent`; used as the canned utterance of buttons.
  std::string canonical(Intent intent) const;
};

// Plain Levenshtein distance (a transposition costs 2).
std::size_t levenshtein(std::string_view a, std::string_view b);

// Edit budget for a user token: 0 below 4 characters, 1 for 4-5, 2 from 6.
std::size_t typo_budget(std::string_view token);

// `token` equals `keyword` or is within typo_budget(token) edits of it.
bool fuzzy_match(std::string_view token, std::string_view keyword);

// Cosine similarity of padded character-trigram count vectors.
double trigram_cosine(std::string_view a, std::string_view b);

enum class MatchStage { Context, Rule, Similarity, Fallback };
std::string_view to_string(MatchStage stage);

struct IntentMatch {
  Intent intent = Intent::Fallback;
  double confidence = 0.0;
  MatchStage stage = MatchStage::Fallback;
};

struct ParsedVariables {
  ExplanationVariables variables;
  std::vector<std::string> notices;
  // Every fragment of the utterance belonged to the variable grammar, e.g.
  // "2 + background" or "top 3".
  bool variables_only = false;
  // Some parsed variable does not apply to the intent and was dropped.
  bool dropped = false;
};

// Intents that accept customization variables.
bool accepts_variables(Intent intent);

// Grammar: bare integer (example count; top-k under Attribution),
// bare label name, "<int> + <label>", "top <int>", "<int> steps", a quoted
// keyword, and the rank words "similar"/"quality". Variables the intent does
// not use are dropped with a notice; counts above `max_example_count` are
// clamped with a notice.
ParsedVariables parse_variables(std::string_view utterance, Intent intent,
                                std::size_t max_example_count = 10);

// Rule stage (weighted, typo-tolerant keywords), then trigram similarity
// against canonical phrasings, else Fallback. A variables-only utterance is
// attributed to `last_intent` when that intent takes all of its variables;
// one carrying a count otherwise goes to Example.
class IntentClassifier {
 public:
  explicit IntentClassifier(PhrasingInventory inventory = PhrasingInventory::builtin());

  IntentMatch classify(std::string_view utterance,
                       std::optional<Intent> last_intent = std::nullopt) const;

  const PhrasingInventory& inventory() const { return inventory_; }

 private:
  struct Scored {
    Intent intent;
    double similarity;
  };
  Scored best_similarity(std::string_view utterance, const std::vector<Intent>& candidates) const;

  PhrasingInventory inventory_;
};

}  // namespace convxai
