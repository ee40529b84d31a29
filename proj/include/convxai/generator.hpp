#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <semaphore>
#include <string>

namespace convxai {

inline constexpr const char* kGeneratorUrlEnv = "CONVXAI_GENERATOR_URL";
inline constexpr const char* kGeneratorKeyEnv = "CONVXAI_GENERATOR_KEY";

struct GenerationRequest {
  std::string prompt;
  std::size_t max_length = 128;
};

struct GenerationResult {
  bool ok = false;
  std::string text;
  std::string error;
};

// A text-completion backend used for counterfactual rewrites.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual GenerationResult complete(const GenerationRequest& request) = 0;
};

struct HttpGeneratorConfig {
  std::string base_url;  // "http://host:port"
  std::string api_key;   // sent as a bearer token when non-empty
  std::string path = "/v1/completions";
  std::chrono::milliseconds timeout{5000};
  std::ptrdiff_t max_in_flight = 4;
};

// POSTs {"prompt", "max_length"} and reads {"completion"}. Never throws from
// complete(); transport failures, timeouts, non-200 responses and an
// exhausted in-flight budget are reported as !ok.
class HttpTextGenerator final : public TextGenerator {
 public:
  explicit HttpTextGenerator(HttpGeneratorConfig config);
  GenerationResult complete(const GenerationRequest& request) override;

  const HttpGeneratorConfig& config() const { return config_; }

  // Reads CONVXAI_GENERATOR_URL / CONVXAI_GENERATOR_KEY; nullptr when the
  // URL is unset or empty.
  static std::unique_ptr<HttpTextGenerator> from_environment();

 private:
  HttpGeneratorConfig config_;
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace convxai
