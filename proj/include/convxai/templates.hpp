#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace convxai {

inline constexpr int kTemplateFormatVersion = 1;
inline constexpr std::string_view kFallbackTemplate = "fallback";

using Slots = std::map<std::string, std::string, std::less<>>;

// Keyed text templates with `{name}` slots.
class TemplateStore {
 public:
  // The templates compiled into the library (data/templates.json).
  static const TemplateStore& builtin();

  static TemplateStore from_json(const nlohmann::json& object);
  static TemplateStore load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  bool contains(std::string_view id) const;
  const std::string& raw(std::string_view id) const;

  // Fills every `{name}` slot. Slot values have braces replaced by
  // parentheses so output never carries slot markers. A missing template
  // renders the fallback template; a missing slot renders empty. Both cases
  // append a line to `diagnostics` when given.
  std::string render(std::string_view id, const Slots& slots,
                     std::vector<std::string>* diagnostics = nullptr) const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace convxai
