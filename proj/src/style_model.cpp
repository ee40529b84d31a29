#include "convxai/style_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "convxai/error.hpp"
#include "convxai/text.hpp"

namespace convxai {

StyleModel::StyleModel(std::size_t order, double alpha) : order_(order), alpha_(alpha) {
  if (order_ == 0) throw InvalidInput("n-gram order must be at least 1");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw InvalidInput("alpha must be positive");
}

std::string StyleModel::join(std::span<const std::string> context, std::string_view word) {
  std::string key;
  for (const auto& t : context) {
    key += t;
    key += '\x1f';
  }
  key += word;
  return key;
}

std::string StyleModel::map_token(std::string_view token) const {
  if (token == kBeginToken || token == kEndToken) return std::string(token);
  if (vocab_.count(std::string(token))) return std::string(token);
  return std::string(kUnknownToken);
}

void StyleModel::add_sentence(std::span<const std::string> tokens) {
  std::vector<std::string> padded(order_ - 1, std::string(kBeginToken));
  for (const auto& t : tokens) {
    vocab_.insert(t);
    padded.push_back(t);
  }
  padded.emplace_back(kEndToken);
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    std::span<const std::string> context(padded.data() + i - (order_ - 1), order_ - 1);
    ++ngram_counts_[join(context, padded[i])];
    ++context_counts_[join(context, "")];
  }
}

std::uint64_t StyleModel::count(std::span<const std::string> context, std::string_view word) const {
  auto it = ngram_counts_.find(join(context, word));
  return it == ngram_counts_.end() ? 0 : it->second;
}

std::uint64_t StyleModel::context_count(std::span<const std::string> context) const {
  auto it = context_counts_.find(join(context, ""));
  return it == context_counts_.end() ? 0 : it->second;
}

double StyleModel::log_prob(std::span<const std::string> context, std::string_view word) const {
  const double numerator = static_cast<double>(count(context, word)) + alpha_;
  const double denominator =
      static_cast<double>(context_count(context)) + alpha_ * static_cast<double>(vocab_size());
  return std::log(numerator / denominator);
}

std::vector<double> StyleModel::token_log_probs(std::string_view sentence) const {
  std::vector<std::string> padded(order_ - 1, std::string(kBeginToken));
  for (const auto& t : tokenize(sentence)) padded.push_back(map_token(t));
  padded.emplace_back(kEndToken);
  std::vector<double> out;
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    std::span<const std::string> context(padded.data() + i - (order_ - 1), order_ - 1);
    out.push_back(log_prob(context, padded[i]));
  }
  return out;
}

StyleModel train_style_lm(const Corpus& corpus, std::size_t n, double alpha) {
  StyleModel model(n, alpha);
  if (corpus.sentence_count() == 0) throw DegenerateInput("cannot train a style model on an empty corpus");
  for (const auto& r : corpus.records()) {
    for (const auto& s : r.sentences) model.add_sentence(tokenize(s.text));
  }
  return model;
}

double perplexity_from_log_probs(std::span<const double> log_probs) {
  if (log_probs.empty()) return 1.0;
  double total = 0.0;
  for (double lp : log_probs) total += lp;
  return std::exp(-total / static_cast<double>(log_probs.size()));
}

double sentence_perplexity(const StyleModel& model, std::string_view sentence) {
  return std::max(1.0, perplexity_from_log_probs(model.token_log_probs(sentence)));
}

int quantize_quality(double perplexity, const std::array<double, 4>& boundaries) {
  if (!std::isfinite(perplexity)) throw InvalidInput("perplexity must be finite");
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (!(boundaries[i - 1] < boundaries[i])) {
      throw InvalidInput("quality boundaries must be strictly ascending");
    }
  }
  int score = 5;
  for (double b : boundaries) {
    if (perplexity <= b) return score;
    --score;
  }
  return 1;
}

nlohmann::json StyleModel::to_json() const {
  // Sorted for byte-stable artifacts.
  std::map<std::string, std::uint64_t> ngrams(ngram_counts_.begin(), ngram_counts_.end());
  std::vector<std::string> vocab(vocab_.begin(), vocab_.end());
  std::sort(vocab.begin(), vocab.end());
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [key, c] : ngrams) counts.push_back(nlohmann::json::array({key, c}));
  return {{"format_version", kStyleModelFormatVersion},
          {"kind", "style_model"},
          {"order", order_},
          {"alpha", alpha_},
          {"vocab", vocab},
          {"ngram_counts", counts}};
}

StyleModel StyleModel::from_json(const nlohmann::json& object) {
  if (object.value("format_version", -1) != kStyleModelFormatVersion ||
      object.value("kind", std::string()) != "style_model") {
    throw ArtifactError("style model artifact format_version mismatch (expected " +
                        std::to_string(kStyleModelFormatVersion) + ")");
  }
  try {
    StyleModel model(object.at("order").get<std::size_t>(), object.at("alpha").get<double>());
    for (const auto& w : object.at("vocab")) model.vocab_.insert(w.get<std::string>());
    for (const auto& entry : object.at("ngram_counts")) {
      const auto key = entry.at(0).get<std::string>();
      const auto c = entry.at(1).get<std::uint64_t>();
      model.ngram_counts_[key] = c;
      const auto cut = key.rfind('\x1f');
      const std::string context_key = cut == std::string::npos ? std::string() : key.substr(0, cut + 1);
      model.context_counts_[context_key] += c;
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed style model artifact: ") + e.what());
  }
}

void StyleModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write style model '" + path.string() + "'");
  out << to_json().dump() << '\n';
}

StyleModel StyleModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot read style model '" + path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ArtifactError("style model '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace convxai
