#pragma once

// Default template and phrasing files compiled into the library
// (generated from data/*.json at build time).
namespace convxai::embedded {

extern const char* const kTemplatesJson;
extern const char* const kPhrasingsJson;

}  // namespace convxai::embedded
