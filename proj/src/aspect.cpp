#include "convxai/aspect.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace convxai {

std::string_view to_string(AspectLabel label) {
  switch (label) {
    case AspectLabel::Background: return "background";
    case AspectLabel::Purpose: return "purpose";
    case AspectLabel::Method: return "method";
    case AspectLabel::Finding: return "finding";
    case AspectLabel::Other: return "other";
  }
  return "other";
}

std::string_view display_name(AspectLabel label) {
  switch (label) {
    case AspectLabel::Background: return "Background";
    case AspectLabel::Purpose: return "Purpose";
    case AspectLabel::Method: return "Method";
    case AspectLabel::Finding: return "Finding";
    case AspectLabel::Other: return "Other";
  }
  return "Other";
}

char short_code(AspectLabel label) { return display_name(label).front(); }

std::optional<AspectLabel> parse_aspect(std::string_view text) {
  static constexpr std::pair<std::string_view, AspectLabel> kAliases[] = {
      {"background", AspectLabel::Background},
      {"purpose", AspectLabel::Purpose},
      {"method", AspectLabel::Method},
      {"methods", AspectLabel::Method},
      {"finding", AspectLabel::Finding},
      {"findings", AspectLabel::Finding},
      {"finding/contribution", AspectLabel::Finding},
      {"finding_contribution", AspectLabel::Finding},
      {"contribution", AspectLabel::Finding},
      {"other", AspectLabel::Other},
  };
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  for (const auto& [name, label] : kAliases) {
    if (lowered == name) return label;
  }
  return std::nullopt;
}

}  // namespace convxai
