#include "convxai/service.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "convxai/error.hpp"
#include "convxai/text.hpp"

namespace convxai {

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_session_id() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device device;
  std::string id;
  id.reserve(kSessionIdLength);
  while (id.size() < kSessionIdLength) {
    std::uint32_t bits = device();
    for (int i = 0; i < 8 && id.size() < kSessionIdLength; ++i, bits >>= 4) id.push_back(kHex[bits & 0xf]);
  }
  return id;
}

namespace {

ExplainerContext make_context(const ArtifactBundle& artifacts, const ConferenceArtifacts& conf,
                              const ServiceConfig& config, TextGenerator* generator) {
  ExplainerContext ctx{artifacts.classifier, conf.style_model, conf.profile, conf.index, artifacts.templates};
  ctx.generator = generator;
  ctx.limits = config.limits;
  return ctx;
}

// The single code path shared by live requests and replay.
RequestOutcome apply_request(const ArtifactBundle& artifacts, const DialogueEngine& engine,
                             const ServiceConfig& config, TextGenerator* generator, SessionData& data,
                             const nlohmann::json& request, std::int64_t timestamp_ms) {
  const std::string type = request.at("type").get<std::string>();
  RequestOutcome out;
  if (type == "create") {
    data.conference = request.at("conference").get<std::string>();
    artifacts.conference(data.conference);
    out.response = {{"conference", data.conference}};
    return out;
  }
  const auto& conf = artifacts.conference(data.conference);
  const ExplainerContext ctx = make_context(artifacts, conf, config, generator);

  if (type == "submit") {
    const std::string text = request.at("text").get<std::string>();
    if (trim(text).empty()) throw InvalidInput("abstract text is empty");
    if (text.size() > config.max_abstract_chars) {
      throw InvalidInput("abstract is " + std::to_string(text.size()) + " characters; the limit is " +
                         std::to_string(config.max_abstract_chars));
    }
    SubmitResult result;
    result.document = analyze_abstract(text, data.revision + 1, artifacts.classifier, conf.style_model,
                                       conf.profile, config.review, artifacts.templates);
    data.revision += 1;
    result.summary = engine.on_submission(data.state, result.document);
    data.document = result.document;
    out.response = {{"document", to_json(result.document)}, {"summary", to_json(result.summary)}};
    out.submitted = std::move(result);
    return out;
  }
  if (type == "select") {
    if (!data.document) throw InvalidInput("no abstract has been submitted yet");
    const auto index = request.at("index").get<std::size_t>();
    auto response = engine.select_sentence(data.state, index, *data.document, ctx);
    out.response = to_json(response);
    out.dialogue = std::move(response);
    return out;
  }
  if (type == "chat") {
    const std::string utterance = request.at("utterance").get<std::string>();
    auto response = engine.respond(data.state, utterance, data.document ? &*data.document : nullptr, ctx,
                                   timestamp_ms);
    out.turn = data.state.history.back();
    out.response = to_json(response);
    out.dialogue = std::move(response);
    return out;
  }
  throw InvalidInput("unknown request type '" + type + "'");
}

std::optional<AspectLabel> optional_label(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  auto label = parse_aspect(j.get<std::string>());
  if (!label) throw ArtifactError("unknown label in snapshot");
  return label;
}

std::optional<Intent> optional_intent(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  auto intent = parse_intent(j.get<std::string>());
  if (!intent) throw ArtifactError("unknown intent in snapshot");
  return intent;
}

PendingContext pending_from_json(const nlohmann::json& j) {
  PendingContext p;
  p.suggested_label = optional_label(j.at("suggested_label"));
  p.last_intent = optional_intent(j.at("last_intent"));
  p.last_variables = variables_from_json(j.at("variables"));
  return p;
}

TurnRecord turn_from_json(const nlohmann::json& j) {
  TurnRecord t;
  t.turn_index = j.at("turn_index").get<std::size_t>();
  t.utterance = j.at("utterance").get<std::string>();
  t.resolved_intent = optional_intent(j.at("intent")).value_or(Intent::Fallback);
  t.variables = variables_from_json(j.at("variables"));
  t.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
  return t;
}

nlohmann::json snapshot_json(const std::string& id, std::size_t seq, const SessionData& data) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& t : data.state.history) history.push_back(to_json(t));
  return {{"format_version", kEventFormatVersion},
          {"session_id", id},
          {"seq", seq},
          {"conference", data.conference},
          {"revision", data.revision},
          {"raw_text", data.document ? nlohmann::json(data.document->raw_text) : nlohmann::json(nullptr)},
          {"selected_sentence", data.state.selected_sentence ? nlohmann::json(*data.state.selected_sentence)
                                                             : nlohmann::json(nullptr)},
          {"pending", to_json(data.state.pending)},
          {"history", history}};
}

SessionData data_from_snapshot(const ArtifactBundle& artifacts, const ServiceConfig& config,
                               const nlohmann::json& snap) {
  SessionData data;
  data.conference = snap.at("conference").get<std::string>();
  data.revision = snap.at("revision").get<std::size_t>();
  data.state.session_id = snap.at("session_id").get<std::string>();
  const auto& conf = artifacts.conference(data.conference);
  if (!snap.at("raw_text").is_null()) {
    data.document = analyze_abstract(snap.at("raw_text").get<std::string>(), data.revision,
                                     artifacts.classifier, conf.style_model, conf.profile, config.review,
                                     artifacts.templates);
    data.state.last_review = data.document->review;
  }
  if (!snap.at("selected_sentence").is_null()) {
    data.state.selected_sentence = snap.at("selected_sentence").get<std::size_t>();
  }
  data.state.pending = pending_from_json(snap.at("pending"));
  for (const auto& t : snap.at("history")) data.state.history.push_back(turn_from_json(t));
  return data;
}

UsageStats stats_from_events(const std::vector<nlohmann::json>& events) {
  std::vector<TurnRecord> turns;
  for (const auto& e : events) {
    if (e.contains("turn")) turns.push_back(turn_from_json(e.at("turn")));
  }
  return export_usage_stats(turns);
}

}  // namespace

ConvXaiService::ConvXaiService(const ArtifactBundle& artifacts, ServiceConfig config, TextGenerator* generator,
                               Clock clock, IdSource ids)
    : artifacts_(artifacts),
      config_(std::move(config)),
      generator_(generator),
      clock_(std::move(clock)),
      ids_(std::move(ids)),
      classifier_(artifacts.phrasings),
      engine_(classifier_, artifacts.templates, config_.review) {
  std::filesystem::create_directories(config_.log_dir);
}

std::filesystem::path ConvXaiService::log_path(std::string_view session_id) const {
  return config_.log_dir / (std::string(session_id) + ".jsonl");
}

std::filesystem::path ConvXaiService::snapshot_path(std::string_view session_id) const {
  return config_.log_dir / (std::string(session_id) + ".snapshot.json");
}

std::shared_ptr<Session> ConvXaiService::find(std::string_view session_id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Unauthorized("unknown or expired session token");
  return it->second;
}

void ConvXaiService::append_event(Session& session, const nlohmann::json& event) const {
  std::ofstream out(log_path(session.id), std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw ArtifactError("cannot append to the event log of session " + session.id);
}

void ConvXaiService::maybe_snapshot(const Session& session) const {
  if (config_.snapshot_every == 0 || session.next_seq % config_.snapshot_every != 0) return;
  const auto path = snapshot_path(session.id);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << snapshot_json(session.id, session.next_seq - 1, session.data).dump() << '\n';
    if (!out) throw ArtifactError("cannot write snapshot for session " + session.id);
  }
  std::filesystem::rename(tmp, path);
}

RequestOutcome ConvXaiService::execute(Session& session, const nlohmann::json& request) {
  const std::int64_t now = clock_();
  SessionData draft = session.data;
  RequestOutcome outcome = apply_request(artifacts_, engine_, config_, generator_, draft, request, now);
  nlohmann::json event = {{"format_version", kEventFormatVersion},
                          {"session_id", session.id},
                          {"seq", session.next_seq},
                          {"timestamp_ms", now},
                          {"request", request},
                          {"response", outcome.response}};
  if (outcome.turn) event["turn"] = to_json(*outcome.turn);
  append_event(session, event);
  session.data = std::move(draft);
  ++session.next_seq;
  maybe_snapshot(session);
  return outcome;
}

std::string ConvXaiService::create_session(std::string_view conference) {
  artifacts_.conference(conference);  // throws NotFound listing the options
  auto session = std::make_shared<Session>();
  {
    std::unique_lock lock(sessions_mutex_);
    do {
      session->id = ids_();
    } while (sessions_.contains(session->id) || std::filesystem::exists(log_path(session->id)));
    session->data.state.session_id = session->id;
    sessions_.emplace(session->id, session);
  }
  std::lock_guard guard(session->mutex);
  try {
    execute(*session, {{"type", "create"}, {"conference", std::string(conference)}});
  } catch (...) {
    std::unique_lock lock(sessions_mutex_);
    sessions_.erase(session->id);
    throw;
  }
  return session->id;
}

SubmitResult ConvXaiService::submit_abstract(std::string_view session_id, std::string_view text) {
  auto session = find(session_id);
  std::lock_guard guard(session->mutex);
  return std::move(*execute(*session, {{"type", "submit"}, {"text", std::string(text)}}).submitted);
}

DialogueResponse ConvXaiService::select_sentence(std::string_view session_id, std::size_t index) {
  auto session = find(session_id);
  std::lock_guard guard(session->mutex);
  return std::move(*execute(*session, {{"type", "select"}, {"index", index}}).dialogue);
}

DialogueResponse ConvXaiService::post_chat(std::string_view session_id, std::string_view utterance) {
  auto session = find(session_id);
  std::lock_guard guard(session->mutex);
  return std::move(*execute(*session, {{"type", "chat"}, {"utterance", std::string(utterance)}}).dialogue);
}

std::vector<nlohmann::json> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot read event log " + path.string());
  std::vector<nlohmann::json> events;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      events.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error&) {
      // A torn final line means the request never completed.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ArtifactError(path.string() + ": line " + std::to_string(number) + " is not valid JSON");
    }
  }
  return events;
}

std::vector<nlohmann::json> ConvXaiService::session_log(std::string_view session_id) const {
  auto session = find(session_id);
  std::lock_guard guard(session->mutex);
  return read_event_log(log_path(session->id));
}

UsageStats ConvXaiService::usage_stats(std::optional<std::string_view> session_id) const {
  if (session_id) return stats_from_events(session_log(*session_id));
  UsageStats total;
  for (const auto& id : session_ids()) total += stats_from_events(session_log(id));
  return total;
}

UsageStats ConvXaiService::live_usage_stats(std::string_view session_id) const {
  auto session = find(session_id);
  std::lock_guard guard(session->mutex);
  return export_usage_stats(session->data.state.history);
}

std::vector<std::string> ConvXaiService::session_ids() const {
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

std::size_t ConvXaiService::recover() {
  std::size_t restored = 0;
  if (!std::filesystem::exists(config_.log_dir)) return 0;
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(config_.log_dir)) {
    if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    const std::string id = path.stem().string();
    const auto events = read_event_log(path);
    if (events.empty()) continue;
    auto session = std::make_shared<Session>();
    session->id = id;
    std::size_t start = 0;
    if (std::filesystem::exists(snapshot_path(id))) {
      std::ifstream in(snapshot_path(id));
      const auto snap = nlohmann::json::parse(in);
      session->data = data_from_snapshot(artifacts_, config_, snap);
      start = snap.at("seq").get<std::size_t>() + 1;
    }
    session->data.state.session_id = id;
    for (const auto& e : events) {
      const auto seq = e.at("seq").get<std::size_t>();
      if (seq < start) continue;
      apply_request(artifacts_, engine_, config_, nullptr, session->data, e.at("request"),
                    e.at("timestamp_ms").get<std::int64_t>());
    }
    session->next_seq = events.back().at("seq").get<std::size_t>() + 1;
    std::unique_lock lock(sessions_mutex_);
    sessions_[id] = std::move(session);
    ++restored;
  }
  return restored;
}

bool ReplayResult::all_match() const {
  return std::all_of(matches.begin(), matches.end(), [](bool m) { return m; });
}

ReplayResult replay_events(const ArtifactBundle& artifacts, const std::vector<nlohmann::json>& events,
                           const ServiceConfig& config) {
  IntentClassifier classifier(artifacts.phrasings);
  DialogueEngine engine(classifier, artifacts.templates, config.review);
  SessionData data;
  if (!events.empty()) data.state.session_id = events.front().value("session_id", "");
  ReplayResult result;
  for (const auto& e : events) {
    RequestOutcome outcome = apply_request(artifacts, engine, config, nullptr, data, e.at("request"),
                                    e.at("timestamp_ms").get<std::int64_t>());
    result.matches.push_back(outcome.response == e.at("response"));
    result.responses.push_back(std::move(outcome.response));
  }
  result.stats = export_usage_stats(data.state.history);
  result.state = std::move(data.state);
  result.document = std::move(data.document);
  return result;
}

namespace {

// Continuation lines of multi-line agent text line up under the speaker.
std::string indented(const std::string& text) {
  std::string out;
  for (char c : text) {
    out += c;
    if (c == '\n') out += "    ";
  }
  return out;
}

}  // namespace

std::string format_transcript(const std::vector<nlohmann::json>& events, const ReplayResult& replay) {
  std::ostringstream out;
  for (std::size_t i = 0; i < events.size() && i < replay.responses.size(); ++i) {
    const auto& request = events[i].at("request");
    const auto& response = replay.responses[i];
    const std::string type = request.at("type").get<std::string>();
    out << "#" << events[i].at("seq").get<std::size_t>() << " " << type;
    if (type == "create") {
      out << " " << request.at("conference").get<std::string>() << "\n";
    } else if (type == "submit") {
      out << "\n";
      for (const auto& s : response.at("document").at("sentences")) {
        out << "  S" << s.at("index").get<std::size_t>() + 1 << " ["
            << s.at("prediction").at("label").get<std::string>() << ", q" << s.at("quality").get<int>() << "] "
            << s.at("text").get<std::string>() << "\n";
      }
      for (const auto& item : response.at("document").at("review").at("items")) {
        out << "  review: " << item.at("message").get<std::string>() << "\n";
      }
      out << "  agent: " << response.at("summary").at("payload").at("text").get<std::string>() << "\n";
    } else {
      if (type == "select") {
        out << " S" << request.at("index").get<std::size_t>() + 1 << "\n";
      } else {
        out << "\n  user: " << request.at("utterance").get<std::string>() << "\n";
      }
      const auto& payload = response.at("payload");
      out << "  agent [" << payload.at("intent").get<std::string>() << "]: "
          << indented(payload.at("text").get<std::string>()) << "\n";
      for (const auto& notice : payload.at("notices")) out << "  note: " << notice.get<std::string>() << "\n";
      std::vector<std::string> replies;
      for (const auto& q : response.at("quick_replies")) replies.push_back(q.at("label").get<std::string>());
      if (!replies.empty()) {
        out << "  buttons:";
        for (const auto& r : replies) out << " [" << r << "]";
        out << "\n";
      }
    }
    if (i < replay.matches.size() && !replay.matches[i]) out << "  (differs from the logged response)\n";
  }
  return out.str();
}

}  // namespace convxai
