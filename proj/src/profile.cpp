#include "convxai/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "convxai/dtw.hpp"
#include "convxai/error.hpp"
#include "convxai/format.hpp"
#include "convxai/random.hpp"
#include "convxai/text.hpp"

namespace convxai {
namespace {

double clustering_cost(const std::vector<std::vector<double>>& d, std::span<const double> w,
                       const std::vector<std::size_t>& medoids) {
  double total = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m : medoids) best = std::min(best, d[j][m]);
    total += w[j] * best;
  }
  return total;
}

std::vector<std::size_t> build_init(const std::vector<std::vector<double>>& d,
                                    std::span<const double> w, std::size_t k) {
  const std::size_t n = d.size();
  std::vector<std::size_t> medoids;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best_index = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      if (chosen[c]) continue;
      double cost = 0.0;
      for (std::size_t j = 0; j < n; ++j) cost += w[j] * std::min(nearest[j], d[j][c]);
      if (cost < best_cost) {
        best_cost = cost;
        best_index = c;
      }
    }
    chosen[best_index] = true;
    medoids.push_back(best_index);
    for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], d[j][best_index]);
  }
  std::sort(medoids.begin(), medoids.end());
  return medoids;
}

// Best-improvement swap until no swap lowers the cost.
double swap_phase(const std::vector<std::vector<double>>& d, std::span<const double> w,
                  std::vector<std::size_t>& medoids) {
  const std::size_t n = d.size();
  double current = clustering_cost(d, w, medoids);
  while (true) {
    double best = current;
    std::size_t best_pos = 0;
    std::size_t best_candidate = 0;
    bool improved = false;
    std::vector<bool> is_medoid(n, false);
    for (std::size_t m : medoids) is_medoid[m] = true;
    for (std::size_t pos = 0; pos < medoids.size(); ++pos) {
      for (std::size_t c = 0; c < n; ++c) {
        if (is_medoid[c]) continue;
        auto trial = medoids;
        trial[pos] = c;
        const double cost = clustering_cost(d, w, trial);
        if (cost < best - 1e-12) {
          best = cost;
          best_pos = pos;
          best_candidate = c;
          improved = true;
        }
      }
    }
    if (!improved) break;
    medoids[best_pos] = best_candidate;
    std::sort(medoids.begin(), medoids.end());
    current = best;
  }
  return current;
}

}  // namespace

std::vector<std::pair<AspectLabel, double>> StructurePattern::runs() const {
  std::vector<std::pair<AspectLabel, double>> out;
  if (sequence.empty()) return out;
  const double total = static_cast<double>(sequence.size());
  std::size_t start = 0;
  for (std::size_t i = 1; i <= sequence.size(); ++i) {
    if (i == sequence.size() || sequence[i] != sequence[start]) {
      out.emplace_back(sequence[start], 100.0 * static_cast<double>(i - start) / total);
      start = i;
    }
  }
  return out;
}

std::string StructurePattern::display_form() const {
  std::string out;
  for (const auto& [label, percent] : runs()) {
    if (!out.empty()) out += " -> ";
    out += std::string(to_string(label)) + " (" + format_fixed(percent, 1) + "%)";
  }
  return out;
}

double nearest_rank_percentile(std::span<const double> sorted, int percent) {
  if (sorted.empty()) throw InvalidInput("percentile of an empty sample");
  if (percent <= 0 || percent > 100) throw InvalidInput("percent must be in (0, 100]");
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  rank = std::max<std::size_t>(rank, 1);
  return sorted[rank - 1];
}

std::vector<AspectLabel> resample_labels(std::span<const AspectLabel> labels,
                                         std::size_t length) {
  if (labels.empty()) throw InvalidInput("cannot resample an empty label sequence");
  if (length == 0) throw InvalidInput("resample length must be positive");
  std::vector<AspectLabel> out(length);
  for (std::size_t j = 0; j < length; ++j) out[j] = labels[j * labels.size() / length];
  return out;
}

MedoidClustering k_medoids(const std::vector<std::vector<double>>& distances,
                           std::span<const double> weights, std::size_t k,
                           std::uint64_t seed) {
  const std::size_t n = distances.size();
  if (k == 0) throw InvalidInput("k must be at least 1");
  if (k > n) throw DegenerateInput("k exceeds the number of points");
  if (weights.size() != n) throw InvalidInput("weights and distances disagree in size");

  constexpr std::size_t kRandomRestarts = 3;
  auto best = build_init(distances, weights, k);
  double best_cost = swap_phase(distances, weights, best);

  Rng rng(seed);
  for (std::size_t r = 0; r < kRandomRestarts && k < n; ++r) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    rng.shuffle(pool);
    std::vector<std::size_t> medoids(pool.begin(), pool.begin() + static_cast<long>(k));
    std::sort(medoids.begin(), medoids.end());
    const double cost = swap_phase(distances, weights, medoids);
    if (cost < best_cost - 1e-12) {
      best_cost = cost;
      best = medoids;
    }
  }

  MedoidClustering out;
  out.medoids = best;
  out.cost = best_cost;
  out.assignment.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Nearest medoid, first on ties; a medoid always keeps itself.
    std::size_t pos = 0;
    for (std::size_t p = 1; p < best.size(); ++p) {
      if (distances[j][best[p]] < distances[j][best[pos]]) pos = p;
    }
    for (std::size_t p = 0; p < best.size(); ++p) {
      if (best[p] == j) pos = p;
    }
    out.assignment[j] = pos;
  }
  return out;
}

std::vector<StructurePattern> extract_patterns(const Corpus& corpus,
                                               std::string_view conference, std::size_t k,
                                               std::size_t length, std::uint64_t seed) {
  if (k == 0) throw InvalidInput("pattern count must be at least 1");
  std::map<std::vector<AspectLabel>, std::size_t> unique;
  std::size_t abstracts = 0;
  for (const auto& record : corpus.records()) {
    if (record.conference != conference) continue;
    ++abstracts;
    ++unique[resample_labels(record.labels(), length)];
  }
  if (abstracts < k) {
    throw DegenerateInput("conference '" + std::string(conference) + "' has " +
                          std::to_string(abstracts) + " abstracts, fewer than k=" +
                          std::to_string(k));
  }

  std::vector<std::vector<AspectLabel>> sequences;
  std::vector<double> weights;
  for (const auto& [sequence, count] : unique) {
    sequences.push_back(sequence);
    weights.push_back(static_cast<double>(count));
  }
  const std::size_t n = sequences.size();
  std::vector<std::vector<double>> distances(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      distances[i][j] = distances[j][i] = dtw_distance(sequences[i], sequences[j]);
    }
  }

  const auto clustering = k_medoids(distances, weights, std::min(k, n), seed);
  std::vector<StructurePattern> patterns;
  for (std::size_t m : clustering.medoids) patterns.push_back({sequences[m], 0});
  for (std::size_t j = 0; j < n; ++j) {
    patterns[clustering.assignment[j]].support += unique.at(sequences[j]);
  }
  std::stable_sort(patterns.begin(), patterns.end(), [](const auto& a, const auto& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.sequence < b.sequence;
  });
  return patterns;
}

ConferenceProfile build_profile(const Corpus& corpus, std::string_view conference,
                                const PerplexityFn& perplexity, const ProfileOptions& options) {
  ConferenceProfile profile;
  profile.conference = std::string(conference);

  std::vector<double> perplexities;
  std::vector<double> lengths;
  std::array<std::size_t, kNumAspects> label_counts{};
  for (const auto& record : corpus.records()) {
    if (record.conference != conference) continue;
    ++profile.abstract_count;
    for (const auto& sentence : record.sentences) {
      const double ppl = perplexity(sentence.text);
      if (!std::isfinite(ppl) || ppl <= 0.0) {
        throw InvalidInput("perplexity for sentence '" + sentence.text +
                           "' is not a positive finite number");
      }
      perplexities.push_back(ppl);
      lengths.push_back(static_cast<double>(tokenize(sentence.text).size()));
      ++label_counts[index_of(sentence.label)];
    }
  }
  profile.sentence_count = perplexities.size();
  if (profile.sentence_count < 5) {
    throw DegenerateInput("conference '" + profile.conference + "' has " +
                          std::to_string(profile.sentence_count) +
                          " sentences; at least 5 are needed for quality boundaries");
  }

  std::sort(perplexities.begin(), perplexities.end());
  constexpr std::array<int, 4> kPercents = {20, 40, 60, 80};
  for (std::size_t i = 0; i < kPercents.size(); ++i) {
    profile.quality_boundaries[i] = nearest_rank_percentile(perplexities, kPercents[i]);
  }
  for (std::size_t i = 1; i < kPercents.size(); ++i) {
    if (!(profile.quality_boundaries[i - 1] < profile.quality_boundaries[i])) {
      throw DegenerateInput("quality boundaries for '" + profile.conference +
                            "' are not strictly ascending (perplexity distribution is degenerate)");
    }
  }

  for (std::size_t i = 0; i < kNumAspects; ++i) {
    profile.label_distribution[i] =
        static_cast<double>(label_counts[i]) / static_cast<double>(profile.sentence_count);
  }

  std::sort(lengths.begin(), lengths.end());
  profile.length_stats.mean =
      std::accumulate(lengths.begin(), lengths.end(), 0.0) / static_cast<double>(lengths.size());
  profile.length_stats.p5 = nearest_rank_percentile(lengths, 5);
  profile.length_stats.p95 = nearest_rank_percentile(lengths, 95);

  profile.patterns =
      extract_patterns(corpus, conference, std::min(options.pattern_count, profile.abstract_count),
                       options.pattern_length, options.seed);

  std::ostringstream card;
  card << "Conference " << profile.conference << ": " << profile.abstract_count
       << " abstracts, " << profile.sentence_count << " sentences. Labels:";
  for (std::size_t i = 0; i < kNumAspects; ++i) {
    card << (i ? ", " : " ") << to_string(aspect_at(i)) << ' '
         << format_fixed(100.0 * profile.label_distribution[i], 1) << '%';
  }
  card << ". Sentence length averages " << format_fixed(profile.length_stats.mean, 1)
       << " tokens (5th-95th percentile " << format_fixed(profile.length_stats.p5, 0) << '-'
       << format_fixed(profile.length_stats.p95, 0) << ").";
  profile.data_card = card.str();
  profile.model_card =
      "Structure model: softmax regression over hashed word unigrams and bigrams. "
      "Style model: additive-smoothed n-gram language model scoring sentence perplexity.";
  return profile;
}

nlohmann::json to_json(const ConferenceProfile& profile) {
  nlohmann::json distribution = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumAspects; ++i) {
    distribution[std::string(to_string(aspect_at(i)))] = profile.label_distribution[i];
  }
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& p : profile.patterns) {
    nlohmann::json seq = nlohmann::json::array();
    for (auto label : p.sequence) seq.push_back(std::string(to_string(label)));
    patterns.push_back({{"sequence", seq}, {"support", p.support}});
  }
  return {{"format_version", kProfileFormatVersion},
          {"conference", profile.conference},
          {"quality_boundaries", profile.quality_boundaries},
          {"label_distribution", distribution},
          {"length_stats",
           {{"mean", profile.length_stats.mean},
            {"p5", profile.length_stats.p5},
            {"p95", profile.length_stats.p95}}},
          {"patterns", patterns},
          {"abstract_count", profile.abstract_count},
          {"sentence_count", profile.sentence_count},
          {"data_card", profile.data_card},
          {"model_card", profile.model_card}};
}

ConferenceProfile profile_from_json(const nlohmann::json& object) {
  if (object.value("format_version", -1) != kProfileFormatVersion) {
    throw ArtifactError("profile format_version mismatch (expected " +
                        std::to_string(kProfileFormatVersion) + ")");
  }
  try {
    ConferenceProfile p;
    p.conference = object.at("conference").get<std::string>();
    p.quality_boundaries = object.at("quality_boundaries").get<std::array<double, 4>>();
    for (std::size_t i = 0; i < kNumAspects; ++i) {
      p.label_distribution[i] =
          object.at("label_distribution").at(std::string(to_string(aspect_at(i)))).get<double>();
    }
    const auto& ls = object.at("length_stats");
    p.length_stats = {ls.at("mean").get<double>(), ls.at("p5").get<double>(),
                      ls.at("p95").get<double>()};
    for (const auto& entry : object.at("patterns")) {
      StructurePattern pattern;
      for (const auto& name : entry.at("sequence")) {
        auto label = parse_aspect(name.get<std::string>());
        if (!label) throw ArtifactError("unknown label in profile pattern");
        pattern.sequence.push_back(*label);
      }
      pattern.support = entry.at("support").get<std::size_t>();
      p.patterns.push_back(std::move(pattern));
    }
    p.abstract_count = object.at("abstract_count").get<std::size_t>();
    p.sentence_count = object.at("sentence_count").get<std::size_t>();
    p.data_card = object.at("data_card").get<std::string>();
    p.model_card = object.at("model_card").get<std::string>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed profile: ") + e.what());
  }
}

void save_profile(const ConferenceProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write profile '" + path.string() + "'");
  out << to_json(profile).dump(1) << '\n';
}

ConferenceProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot read profile '" + path.string() + "'");
  try {
    return profile_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ArtifactError("profile '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace convxai
