#include "convxai/artifacts.hpp"

#include <fstream>

#include "convxai/error.hpp"

namespace convxai {

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw ArtifactError("failed writing " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArtifactError(path.string() + ": " + e.what());
  }
}

nlohmann::json index_to_json(const ExampleIndex& index) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : index.entries()) {
    entries.push_back({{"text", e.text},
                       {"label", std::string(to_string(e.label))},
                       {"perplexity", e.perplexity},
                       {"quality", e.quality}});
  }
  return {{"format_version", kManifestFormatVersion}, {"entries", entries}};
}

ExampleIndex index_from_json(const nlohmann::json& j, const AspectClassifier& classifier) {
  if (j.value("format_version", -1) != kManifestFormatVersion) {
    throw ArtifactError("example index format_version mismatch");
  }
  std::vector<IndexEntry> entries;
  try {
    for (const auto& e : j.at("entries")) {
      IndexEntry entry;
      entry.text = e.at("text").get<std::string>();
      auto label = parse_aspect(e.at("label").get<std::string>());
      if (!label) throw ArtifactError("example index: unknown label");
      entry.label = *label;
      entry.perplexity = e.at("perplexity").get<double>();
      entry.quality = e.at("quality").get<int>();
      entry.embedding = classifier.embed(entry.text);
      entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed example index: ") + e.what());
  }
  return ExampleIndex(std::move(entries));
}

}  // namespace

std::vector<std::string> ArtifactBundle::conference_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : conferences) names.push_back(name);
  return names;
}

const ConferenceArtifacts& ArtifactBundle::conference(std::string_view name) const {
  auto it = conferences.find(name);
  if (it == conferences.end()) {
    std::string available;
    for (const auto& n : conference_names()) available += (available.empty() ? "" : ", ") + n;
    throw NotFound("unknown conference '" + std::string(name) + "'; available: " + available);
  }
  return it->second;
}

void ArtifactBundle::save(const std::filesystem::path& directory) const {
  std::filesystem::create_directories(directory);
  write_json(directory / "classifier.json", classifier.to_json());
  write_json(directory / "templates.json", templates.to_json());
  write_json(directory / "phrasings.json", phrasings.to_json());
  for (const auto& [name, c] : conferences) {
    write_json(directory / ("style_" + name + ".json"), c.style_model.to_json());
    write_json(directory / ("profile_" + name + ".json"), to_json(c.profile));
    write_json(directory / ("index_" + name + ".json"), index_to_json(c.index));
  }
  // Written last so a partial directory never looks complete.
  write_json(directory / "manifest.json",
             {{"format_version", kManifestFormatVersion}, {"conferences", conference_names()}});
}

ArtifactBundle ArtifactBundle::load(const std::filesystem::path& directory) {
  const auto manifest = read_json(directory / "manifest.json");
  if (manifest.value("format_version", -1) != kManifestFormatVersion) {
    throw ArtifactError("manifest format_version mismatch");
  }
  ArtifactBundle bundle;
  bundle.classifier = AspectClassifier::from_json(read_json(directory / "classifier.json"));
  bundle.templates = TemplateStore::from_json(read_json(directory / "templates.json"));
  bundle.phrasings = PhrasingInventory::from_json(read_json(directory / "phrasings.json"));
  for (const auto& name : manifest.at("conferences")) {
    const auto conf = name.get<std::string>();
    ConferenceArtifacts c;
    c.style_model = StyleModel::from_json(read_json(directory / ("style_" + conf + ".json")));
    c.profile = profile_from_json(read_json(directory / ("profile_" + conf + ".json")));
    c.index = index_from_json(read_json(directory / ("index_" + conf + ".json")), bundle.classifier);
    bundle.conferences.emplace(conf, std::move(c));
  }
  if (bundle.conferences.empty()) throw ArtifactError("artifact bundle lists no conferences");
  return bundle;
}

ArtifactBundle train_artifacts(const Corpus& corpus, const TrainOptions& options) {
  if (corpus.empty()) throw DegenerateInput("cannot train on an empty corpus");
  ArtifactBundle bundle;
  bundle.classifier = train_classifier(corpus, options.classifier);
  for (const auto& name : corpus.conferences()) {
    const Corpus subset = corpus.filter(name);
    ConferenceArtifacts c;
    c.style_model = train_style_lm(subset, options.lm_order, options.lm_alpha);
    const auto& lm = c.style_model;
    c.profile = build_profile(
        subset, name, [&lm](std::string_view s) { return sentence_perplexity(lm, s); }, options.profile);
    c.index = ExampleIndex::build(subset, bundle.classifier, c.style_model, c.profile);
    bundle.conferences.emplace(name, std::move(c));
  }
  return bundle;
}

}  // namespace convxai
