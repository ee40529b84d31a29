#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/aspect.hpp"
#include "convxai/corpus.hpp"
#include "convxai/random.hpp"

namespace convxai {

// Deterministic template-based abstracts for demos and tests. Each
// conference draws its abstracts from a few fixed structure groups and its
// own topic vocabulary, so profiles, patterns and style models differ.
struct SyntheticOptions {
  std::vector<std::string> conferences = {"ACL", "CHI", "ICLR"};
  std::size_t abstracts_per_conference = 60;
  std::uint64_t seed = 7;
  // Probability that an abstract repeats one of its sentences' aspects.
  double perturbation = 0.2;
};

Corpus synthetic_corpus(const SyntheticOptions& options = {});

// `sentences` distinct sentences with equal class counts (up to rounding),
// grouped into five-sentence abstracts of one conference.
Corpus separable_corpus(std::size_t sentences, std::uint64_t seed, std::string_view conference = "SYN");

// One sentence of aspect `label` in the vocabulary of `conference`.
std::string synthetic_sentence(AspectLabel label, Rng& rng, std::string_view conference);

// The structure groups abstracts of `conference` are drawn from.
std::vector<std::vector<AspectLabel>> structure_groups(std::string_view conference);

}  // namespace convxai
