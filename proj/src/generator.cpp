#include "convxai/generator.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace convxai {

HttpTextGenerator::HttpTextGenerator(HttpGeneratorConfig config)
    : config_(std::move(config)), in_flight_(std::max<std::ptrdiff_t>(1, config_.max_in_flight)) {}

GenerationResult HttpTextGenerator::complete(const GenerationRequest& request) {
  GenerationResult result;
  if (!in_flight_.try_acquire_for(config_.timeout)) {
    result.error = "generator busy: in-flight limit reached";
    return result;
  }
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  try {
    httplib::Client client(config_.base_url);
    if (!client.is_valid()) {
      result.error = "unsupported generator URL '" + config_.base_url + "'";
      return result;
    }
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const nlohmann::json body = {{"prompt", request.prompt}, {"max_length", request.max_length}};
    auto response = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!response) {
      result.error = "generator request failed: " + httplib::to_string(response.error());
      return result;
    }
    if (response->status != 200) {
      result.error = "generator returned HTTP " + std::to_string(response->status);
      return result;
    }
    const auto parsed = nlohmann::json::parse(response->body);
    if (!parsed.contains("completion") || !parsed["completion"].is_string()) {
      result.error = "generator response lacks a 'completion' string";
      return result;
    }
    result.ok = true;
    result.text = parsed["completion"].get<std::string>();
  } catch (const std::exception& e) {
    result.error = std::string("generator error: ") + e.what();
  }
  return result;
}

std::unique_ptr<HttpTextGenerator> HttpTextGenerator::from_environment() {
  const char* url = std::getenv(kGeneratorUrlEnv);
  if (url == nullptr || *url == '\0') return nullptr;
  HttpGeneratorConfig config;
  config.base_url = url;
  if (const char* key = std::getenv(kGeneratorKeyEnv)) config.api_key = key;
  return std::make_unique<HttpTextGenerator>(std::move(config));
}

}  // namespace convxai
