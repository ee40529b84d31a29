#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace convxai {

// Rhetorical role of an abstract sentence.
enum class AspectLabel : int { Background = 0, Purpose, Method, Finding, Other };

inline constexpr std::size_t kNumAspects = 5;

inline constexpr std::array<AspectLabel, kNumAspects> kAllAspects = {
    AspectLabel::Background, AspectLabel::Purpose, AspectLabel::Method,
    AspectLabel::Finding, AspectLabel::Other};

constexpr std::size_t index_of(AspectLabel label) {
  return static_cast<std::size_t>(label);
}

constexpr AspectLabel aspect_at(std::size_t index) {
  return static_cast<AspectLabel>(static_cast<int>(index));
}

// Lower-case wire name ("background", "purpose", ...).
std::string_view to_string(AspectLabel label);

// Capitalised display name ("Background", ...).
std::string_view display_name(AspectLabel label);

// One-letter code used in compact pattern renderings (B, P, M, F, O).
char short_code(AspectLabel label);

// Accepts the five wire names plus a small alias table, case-insensitive.
// "finding/contribution" and "contribution" map to Finding.
std::optional<AspectLabel> parse_aspect(std::string_view text);

}  // namespace convxai
