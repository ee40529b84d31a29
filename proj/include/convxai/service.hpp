#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "convxai/artifacts.hpp"
#include "convxai/dialogue.hpp"
#include "convxai/document.hpp"
#include "convxai/generator.hpp"
#include "json.hpp"

namespace convxai {

inline constexpr int kEventFormatVersion = 1;
inline constexpr std::size_t kSessionIdLength = 32;

struct ServiceConfig {
  std::filesystem::path log_dir = "sessions";
  std::size_t max_abstract_chars = 10000;
  // Write <session>.snapshot.json after every this many events; 0 disables.
  std::size_t snapshot_every = 0;
  ExplainerLimits limits;
  ReviewConfig review;
};

// Milliseconds since the epoch; injectable for tests.
using Clock = std::function<std::int64_t()>;
// Produces session tokens; injectable for tests.
using IdSource = std::function<std::string()>;

std::int64_t system_clock_ms();
// 32 lower-case hex characters from std::random_device.
std::string random_session_id();

struct SubmitResult {
  AbstractDocument document;
  DialogueResponse summary;
};

// Everything a request can change; copied, mutated, logged, then committed.
struct SessionData {
  std::string conference;
  std::optional<AbstractDocument> document;
  DialogueState state;
  std::size_t revision = 0;
};

// Result of one request: the logged JSON plus the typed value.
struct RequestOutcome {
  nlohmann::json response;
  std::optional<SubmitResult> submitted;
  std::optional<DialogueResponse> dialogue;
  std::optional<TurnRecord> turn;
};

struct Session {
  std::string id;
  SessionData data;
  std::size_t next_seq = 0;
  std::mutex mutex;  // serializes requests of this session
};

// Session-oriented front end over shared, read-only artifacts. Every
// state-changing request is appended to the session's JSONL event log and
// flushed before its response is returned; state is committed only after
// the event is on disk.
class ConvXaiService {
 public:
  ConvXaiService(const ArtifactBundle& artifacts, ServiceConfig config,
                 TextGenerator* generator = nullptr, Clock clock = system_clock_ms,
                 IdSource ids = random_session_id);

  // Throws NotFound naming the available conferences.
  std::string create_session(std::string_view conference);
  // Throws InvalidInput for empty or oversize text; Unauthorized for an
  // unknown session.
  SubmitResult submit_abstract(std::string_view session_id, std::string_view text);
  // `index` is 0-based. Throws InvalidInput when no abstract was submitted
  // or the index is out of range.
  DialogueResponse select_sentence(std::string_view session_id, std::size_t index);
  DialogueResponse post_chat(std::string_view session_id, std::string_view utterance);

  // Events as persisted, in order.
  std::vector<nlohmann::json> session_log(std::string_view session_id) const;
  // Aggregated from the persisted logs: one session, or all when empty.
  UsageStats usage_stats(std::optional<std::string_view> session_id = std::nullopt) const;
  // Counts from the live dialogue state.
  UsageStats live_usage_stats(std::string_view session_id) const;

  std::vector<std::string> session_ids() const;
  std::vector<std::string> conferences() const { return artifacts_.conference_names(); }
  const ServiceConfig& config() const { return config_; }

  // Rebuilds every session found in log_dir (snapshot plus the events after
  // it, or the full log). Returns the number of sessions restored.
  std::size_t recover();

 private:
  std::shared_ptr<Session> find(std::string_view session_id) const;
  // Runs `request` on a copy of the session, logs it, then commits.
  RequestOutcome execute(Session& session, const nlohmann::json& request);
  void append_event(Session& session, const nlohmann::json& event) const;
  void maybe_snapshot(const Session& session) const;
  std::filesystem::path log_path(std::string_view session_id) const;
  std::filesystem::path snapshot_path(std::string_view session_id) const;

  const ArtifactBundle& artifacts_;
  ServiceConfig config_;
  TextGenerator* generator_;
  Clock clock_;
  IdSource ids_;
  IntentClassifier classifier_;
  DialogueEngine engine_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
};

std::vector<nlohmann::json> read_event_log(const std::filesystem::path& path);

struct ReplayResult {
  std::vector<nlohmann::json> responses;  // one per event, as the live service produced them
  std::vector<bool> matches;              // response equals the logged one
  UsageStats stats;
  DialogueState state;
  std::optional<AbstractDocument> document;

  bool all_match() const;
};

// Re-executes a session's events against `artifacts` with no external
// generator and compares each response with the logged one.
ReplayResult replay_events(const ArtifactBundle& artifacts, const std::vector<nlohmann::json>& events,
                           const ServiceConfig& config = {});

// Human-readable transcript of a replay.
std::string format_transcript(const std::vector<nlohmann::json>& events, const ReplayResult& replay);

}  // namespace convxai
