#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unistd.h>

#include "convxai/artifacts.hpp"
#include "convxai/synthetic.hpp"

namespace convxai::testing {

// Artifacts trained once per process on the default synthetic corpus.
inline const ArtifactBundle& demo_bundle() {
  static const ArtifactBundle bundle = train_artifacts(synthetic_corpus());
  return bundle;
}

inline const Corpus& demo_corpus() {
  static const Corpus corpus = synthetic_corpus();
  return corpus;
}

// CHI abstract predicted purpose, background, method, finding. The closest
// CHI structure opens with background, so S1 gets a Structure item
// suggesting background.
inline constexpr const char* kWalkthroughAbstract =
    "We aim to understand how cognitive load affects writing support tools. "
    "Existing approaches to crowdsourcing often struggle with privacy concerns. "
    "We evaluate the system on a field deployment using user satisfaction as the main measure. "
    "Results indicate that engagement improves substantially over strong baselines.";

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("convxai_test_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Deterministic clock: 1000, 2000, 3000, ...
struct StepClock {
  std::shared_ptr<std::int64_t> now = std::make_shared<std::int64_t>(0);
  std::int64_t operator()() const { return *now += 1000; }
};

// Deterministic session ids: 000...001, 000...002, ...
struct CountingIds {
  std::shared_ptr<int> next = std::make_shared<int>(0);
  std::string operator()() const {
    std::string s = std::to_string(++*next);
    return std::string(32 - s.size(), '0') + s;
  }
};

}  // namespace convxai::testing
