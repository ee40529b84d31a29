#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "convxai/aspect.hpp"
#include "convxai/corpus.hpp"
#include "json.hpp"

namespace convxai {

inline constexpr int kProfileFormatVersion = 1;

// A benchmark ordering of aspect labels for one conference.
struct StructurePattern {
  std::vector<AspectLabel> sequence;
  std::size_t support = 0;  // abstracts assigned to this pattern's cluster

  // Consecutive runs as (label, percentage of the sequence).
  std::vector<std::pair<AspectLabel, double>> runs() const;
  // e.g. "background (33.3%) -> purpose (16.7%) -> method (16.7%) -> finding (33.3%)"
  std::string display_form() const;
};

struct LengthStats {
  double mean = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

struct ConferenceProfile {
  std::string conference;
  std::array<double, 4> quality_boundaries{};  // 20/40/60/80-th percentile perplexities
  std::array<double, kNumAspects> label_distribution{};
  LengthStats length_stats;
  std::vector<StructurePattern> patterns;
  std::size_t abstract_count = 0;
  std::size_t sentence_count = 0;
  std::string data_card;
  std::string model_card;
};

struct ProfileOptions {
  std::size_t pattern_count = 5;
  std::size_t pattern_length = 12;
  std::uint64_t seed = 17;
};

using PerplexityFn = std::function<double(std::string_view)>;

// Value at 1-based rank ceil(percent * N / 100) of an ascending sample.
double nearest_rank_percentile(std::span<const double> sorted, int percent);

// Builds the statistics bundle for `conference`. Throws DegenerateInput with
// fewer than five sentences or when the four boundaries are not strictly
// ascending, InvalidInput on a non-finite or non-positive perplexity.
ConferenceProfile build_profile(const Corpus& corpus, std::string_view conference,
                                const PerplexityFn& perplexity,
                                const ProfileOptions& options = {});

// Index-mapping resample: output position j takes input[floor(j * n / length)].
std::vector<AspectLabel> resample_labels(std::span<const AspectLabel> labels, std::size_t length);

struct MedoidClustering {
  std::vector<std::size_t> medoids;     // indices into the input, ascending
  std::vector<std::size_t> assignment;  // input index -> position in `medoids`
  double cost = 0.0;                    // weighted sum of distances to medoids
};

// Weighted k-medoids (PAM build + swap, plus seeded random restarts) over a
// precomputed symmetric distance matrix. Deterministic for a given seed.
MedoidClustering k_medoids(const std::vector<std::vector<double>>& distances,
                           std::span<const double> weights, std::size_t k, std::uint64_t seed);

// Clusters the conference's abstracts (label sequences resampled to
// `length`) under 0/1-cost DTW and returns the medoid sequences, largest
// cluster first. Invariant to record order. When the conference has fewer
// than k distinct sequences, one pattern per distinct sequence is returned.
std::vector<StructurePattern> extract_patterns(const Corpus& corpus, std::string_view conference,
                                               std::size_t k, std::size_t length,
                                               std::uint64_t seed = 17);

nlohmann::json to_json(const ConferenceProfile& profile);
ConferenceProfile profile_from_json(const nlohmann::json& object);
void save_profile(const ConferenceProfile& profile, const std::filesystem::path& path);
ConferenceProfile load_profile(const std::filesystem::path& path);

}  // namespace convxai
