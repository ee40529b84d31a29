#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/classifier.hpp"
#include "convxai/corpus.hpp"
#include "convxai/explain.hpp"
#include "convxai/nlu.hpp"
#include "convxai/profile.hpp"
#include "convxai/style_model.hpp"
#include "convxai/templates.hpp"

namespace convxai {

inline constexpr int kManifestFormatVersion = 1;

struct TrainOptions {
  ClassifierHyperparams classifier;
  std::size_t lm_order = 2;
  double lm_alpha = 0.1;
  ProfileOptions profile;
};

struct ConferenceArtifacts {
  StyleModel style_model{2, 0.1};
  ConferenceProfile profile;
  ExampleIndex index;
};

// Everything the service needs, trained once and shared read-only.
struct ArtifactBundle {
  AspectClassifier classifier;
  std::map<std::string, ConferenceArtifacts, std::less<>> conferences;
  TemplateStore templates = TemplateStore::builtin();
  PhrasingInventory phrasings = PhrasingInventory::builtin();

  std::vector<std::string> conference_names() const;
  // Throws NotFound naming the available conferences.
  const ConferenceArtifacts& conference(std::string_view name) const;

  // Writes manifest.json, classifier.json, templates.json, phrasings.json
  // and style_/profile_/index_<conference>.json into `directory`.
  void save(const std::filesystem::path& directory) const;
  // Index embeddings are recomputed from the loaded classifier.
  static ArtifactBundle load(const std::filesystem::path& directory);
};

// One classifier over the whole corpus; per conference a style model,
// profile and example index.
ArtifactBundle train_artifacts(const Corpus& corpus, const TrainOptions& options = {});

}  // namespace convxai
