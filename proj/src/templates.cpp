#include "convxai/templates.hpp"

#include <fstream>

#include "convxai/embedded_data.hpp"
#include "convxai/error.hpp"

namespace convxai {
namespace {

std::string sanitize(std::string_view value) {
  std::string out(value);
  for (auto& c : out) {
    if (c == '{') c = '(';
    if (c == '}') c = ')';
  }
  return out;
}

}  // namespace

const TemplateStore& TemplateStore::builtin() {
  static const TemplateStore store = from_json(nlohmann::json::parse(embedded::kTemplatesJson));
  return store;
}

TemplateStore TemplateStore::from_json(const nlohmann::json& object) {
  if (object.value("format_version", -1) != kTemplateFormatVersion) {
    throw ArtifactError("template file format_version mismatch (expected " +
                        std::to_string(kTemplateFormatVersion) + ")");
  }
  TemplateStore store;
  try {
    for (const auto& [id, text] : object.at("templates").items()) {
      store.templates_.emplace(id, text.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed template file: ") + e.what());
  }
  if (!store.contains(kFallbackTemplate)) {
    throw ArtifactError("template file lacks the 'fallback' template");
  }
  return store;
}

TemplateStore TemplateStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot read template file '" + path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ArtifactError("template file is not valid JSON: " + std::string(e.what()));
  }
}

nlohmann::json TemplateStore::to_json() const {
  nlohmann::json templates = nlohmann::json::object();
  for (const auto& [id, text] : templates_) templates[id] = text;
  return {{"format_version", kTemplateFormatVersion}, {"templates", templates}};
}

bool TemplateStore::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

const std::string& TemplateStore::raw(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw NotFound("no template '" + std::string(id) + "'");
  return it->second;
}

std::string TemplateStore::render(std::string_view id, const Slots& slots,
                                  std::vector<std::string>* diagnostics) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    if (diagnostics) diagnostics->push_back("missing template '" + std::string(id) + "'");
    it = templates_.find(kFallbackTemplate);
  }
  const std::string& text = it->second;
  std::string out;
  out.reserve(text.size() + 64);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string::npos) {
        const std::string_view name(text.data() + i + 1, close - i - 1);
        auto slot = slots.find(name);
        if (slot != slots.end()) {
          out += sanitize(slot->second);
        } else if (diagnostics) {
          diagnostics->push_back("template '" + it->first + "' slot '" + std::string(name) +
                                 "' has no value");
        }
        i = close + 1;
        continue;
      }
      out += '(';
      ++i;
      continue;
    }
    out += text[i] == '}' ? ')' : text[i];
    ++i;
  }
  return out;
}

}  // namespace convxai
