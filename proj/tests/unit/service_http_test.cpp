#include <doctest.h>

#include <fstream>
#include <thread>

#include "httplib.h"

#include "convxai/error.hpp"
#include "convxai/http_api.hpp"
#include "convxai/service.hpp"
#include "../support.hpp"

using namespace convxai;

namespace {

ServiceConfig config_in(const std::filesystem::path& dir, std::size_t snapshot_every = 0) {
  ServiceConfig c;
  c.log_dir = dir;
  c.snapshot_every = snapshot_every;
  return c;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

const std::vector<std::string> kScript = {"S1", "How confident is the model?", "rewrite it", "2 + background",
                                          "Which words are most important?", "top 2", "blorp", "S3",
                                          "Show me similar examples"};

}  // namespace

TEST_CASE("every request is persisted before its response returns") {
  const auto dir = testing::scratch_dir("wal");
  ConvXaiService svc(testing::demo_bundle(), config_in(dir), nullptr, testing::StepClock{}, testing::CountingIds{});
  const auto id = svc.create_session("CHI");
  CHECK(id.size() == kSessionIdLength);
  const auto log = dir / (id + ".jsonl");
  CHECK(line_count(log) == 1);
  const auto sub = svc.submit_abstract(id, testing::kWalkthroughAbstract);
  CHECK(line_count(log) == 2);
  const auto r = svc.post_chat(id, "S1");
  CHECK(line_count(log) == 3);
  const auto events = svc.session_log(id);
  REQUIRE(events.size() == 3);
  CHECK(events[2].at("response") == to_json(r));
  CHECK(events[2].at("turn").at("intent") == "suggestion");
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(events[i].at("seq") == i);
    CHECK(events[i].at("session_id") == id);
    CHECK(events[i].at("format_version") == kEventFormatVersion);
    CHECK(events[i].at("timestamp_ms") == static_cast<std::int64_t>(1000 * (i + 1)));
  }
}

TEST_CASE("failed requests are not logged and change nothing") {
  const auto dir = testing::scratch_dir("reject");
  ServiceConfig cfg = config_in(dir);
  cfg.max_abstract_chars = 200;
  ConvXaiService svc(testing::demo_bundle(), cfg, nullptr, testing::StepClock{}, testing::CountingIds{});
  const auto id = svc.create_session("CHI");
  CHECK_THROWS_AS(svc.create_session("NEURIPS"), NotFound);
  CHECK_THROWS_AS(svc.post_chat("deadbeef", "hi"), Unauthorized);
  CHECK_THROWS_AS(svc.submit_abstract(id, "   \n "), InvalidInput);
  CHECK_THROWS_AS(svc.submit_abstract(id, std::string(201, 'a')), InvalidInput);
  CHECK_THROWS_AS(svc.select_sentence(id, 0), InvalidInput);
  svc.submit_abstract(id, "We study writing. We find gains.");
  CHECK_THROWS_AS(svc.select_sentence(id, 2), InvalidInput);
  CHECK(svc.session_log(id).size() == 2);
  CHECK(svc.live_usage_stats(id).total() == 0);
  CHECK(svc.session_ids().size() == 1);
}

TEST_CASE("replay reproduces every logged response and the usage stats") {
  const auto dir = testing::scratch_dir("replay");
  ConvXaiService svc(testing::demo_bundle(), config_in(dir), nullptr, testing::StepClock{}, testing::CountingIds{});
  const auto id = svc.create_session("CHI");
  svc.submit_abstract(id, testing::kWalkthroughAbstract);
  for (const auto& u : kScript) svc.post_chat(id, u);
  svc.select_sentence(id, 1);
  svc.submit_abstract(id, "Writers struggle with feedback. We propose a tool. Results show gains.");
  svc.post_chat(id, "S2");
  const auto events = read_event_log(dir / (id + ".jsonl"));
  const auto replay = replay_events(testing::demo_bundle(), events);
  CHECK(replay.all_match());
  CHECK(replay.stats == svc.live_usage_stats(id));
  CHECK(replay.stats == svc.usage_stats(id));
  CHECK(replay.stats.total() == kScript.size() + 1);
  CHECK(replay.stats.fallback == 1);
  CHECK(!format_transcript(events, replay).empty());

  auto tampered = events;
  tampered[3]["response"]["payload"]["text"] = "something else";
  CHECK(!replay_events(testing::demo_bundle(), tampered).all_match());
}

TEST_CASE("aggregate stats are the sum of per-session stats") {
  const auto dir = testing::scratch_dir("stats");
  ConvXaiService svc(testing::demo_bundle(), config_in(dir), nullptr, testing::StepClock{}, testing::CountingIds{});
  const auto a = svc.create_session("CHI");
  const auto b = svc.create_session("ACL");
  svc.submit_abstract(a, testing::kWalkthroughAbstract);
  svc.submit_abstract(b, "We study parsing. We propose a parser. Results improve accuracy.");
  for (std::size_t i = 0; i < kScript.size(); ++i) svc.post_chat(i % 2 ? a : b, kScript[i]);
  auto sum = svc.usage_stats(a);
  sum += svc.usage_stats(b);
  CHECK(svc.usage_stats() == sum);
  CHECK(svc.usage_stats().total() == kScript.size());
}

TEST_CASE("a torn final log line is ignored") {
  const auto dir = testing::scratch_dir("torn");
  {
    ConvXaiService svc(testing::demo_bundle(), config_in(dir), nullptr, testing::StepClock{}, testing::CountingIds{});
    const auto id = svc.create_session("CHI");
    svc.submit_abstract(id, testing::kWalkthroughAbstract);
  }
  const auto log = dir / (testing::CountingIds{}() + ".jsonl");
  { std::ofstream(log, std::ios::app) << "{\"format_version\":1,\"seq\":2,\"req"; }
  CHECK(read_event_log(log).size() == 2);
}

TEST_CASE("recovery restores sessions with and without snapshots") {
  for (std::size_t every : {0, 3}) {
    const auto dir = testing::scratch_dir("recover");
    testing::StepClock clock;
    std::string id;
    nlohmann::json expected_next;
    {
      ConvXaiService svc(testing::demo_bundle(), config_in(dir, every), nullptr, clock, testing::CountingIds{});
      id = svc.create_session("CHI");
      svc.submit_abstract(id, testing::kWalkthroughAbstract);
      for (std::size_t i = 0; i < 5; ++i) svc.post_chat(id, kScript[i]);
      // Reference: what the uninterrupted service says next.
      const auto dir2 = testing::scratch_dir("recover_ref");
      ConvXaiService ref(testing::demo_bundle(), config_in(dir2), nullptr, testing::StepClock{}, testing::CountingIds{});
      const auto rid = ref.create_session("CHI");
      ref.submit_abstract(rid, testing::kWalkthroughAbstract);
      for (std::size_t i = 0; i < 5; ++i) ref.post_chat(rid, kScript[i]);
      expected_next = to_json(ref.post_chat(rid, "top 2"));
    }
    CHECK(std::filesystem::exists(dir / (id + ".snapshot.json")) == (every != 0));
    ConvXaiService restored(testing::demo_bundle(), config_in(dir, every), nullptr, clock, testing::CountingIds{});
    CHECK(restored.recover() == 1);
    CHECK(restored.live_usage_stats(id).total() == 5);
    CHECK(to_json(restored.post_chat(id, "top 2")) == expected_next);
    CHECK(restored.session_log(id).back().at("seq") == 7);
    // A new session does not reuse a recovered id.
    CHECK(restored.create_session("ACL") != id);
  }
}

TEST_CASE("concurrent sessions do not interfere") {
  const auto dir = testing::scratch_dir("concurrent");
  ConvXaiService svc(testing::demo_bundle(), config_in(dir), nullptr, system_clock_ms, random_session_id);
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(svc.create_session("CHI"));
  std::vector<std::thread> threads;
  for (const auto& id : ids) {
    threads.emplace_back([&svc, id] {
      svc.submit_abstract(id, testing::kWalkthroughAbstract);
      for (const auto& u : kScript) svc.post_chat(id, u);
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& id : ids) {
    const auto replay = replay_events(testing::demo_bundle(), svc.session_log(id));
    CHECK(replay.all_match());
    CHECK(replay.stats.total() == kScript.size());
  }
}

TEST_CASE("http api: routes, status codes and error bodies") {
  const auto dir = testing::scratch_dir("http");
  ConvXaiService svc(testing::demo_bundle(), config_in(dir), nullptr, testing::StepClock{}, testing::CountingIds{});
  auto server = make_http_server(svc);
  const int port = server->bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server->listen_after_bind(); });
  server->wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto post = [&](const std::string& path, const nlohmann::json& body) {
    return client.Post(path, body.dump(), "application/json");
  };

  auto health = client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(nlohmann::json::parse(health->body).at("schema_version") == kWireSchemaVersion);

  auto created = post("/v1/sessions", {{"conference", "CHI"}});
  REQUIRE(created);
  CHECK(created->status == 201);
  const auto id = nlohmann::json::parse(created->body).at("session_id").get<std::string>();
  const auto base = "/v1/sessions/" + id;

  auto bad_conf = post("/v1/sessions", {{"conference", "NOPE"}});
  CHECK(bad_conf->status == 404);
  CHECK(nlohmann::json::parse(bad_conf->body).at("error").at("code") == "not_found");

  auto submitted = post(base + "/abstract", {{"text", testing::kWalkthroughAbstract}});
  CHECK(submitted->status == 200);
  const auto doc = nlohmann::json::parse(submitted->body).at("document");
  CHECK(doc.at("sentences").size() == 4);

  auto selected = post(base + "/select", {{"index", 0}});
  CHECK(selected->status == 200);
  CHECK(nlohmann::json::parse(selected->body).at("payload").at("intent") == "suggestion");

  auto chat = post(base + "/chat", {{"utterance", "How confident is the model?"}});
  CHECK(chat->status == 200);
  CHECK(nlohmann::json::parse(chat->body).at("match").at("intent") == "confidence");

  CHECK(post("/v1/sessions/unknown/chat", {{"utterance", "hi"}})->status == 403);
  CHECK(post(base + "/chat", {{"text", "hi"}})->status == 400);
  CHECK(client.Post(base + "/chat", "not json", "application/json")->status == 400);
  CHECK(post(base + "/select", {{"index", 12}})->status == 400);
  CHECK(post(base + "/select", {{"index", -1}})->status == 400);
  CHECK(post(base + "/abstract", {{"text", ""}})->status == 400);

  auto log = client.Get(base + "/log");
  CHECK(log->status == 200);
  CHECK(nlohmann::json::parse(log->body).at("events").size() == 4);

  auto stats = client.Get("/v1/stats?session=" + id);
  const auto sj = nlohmann::json::parse(stats->body);
  CHECK(sj.at("intents").at("confidence") == 1);
  CHECK(sj.at("scope") == id);
  CHECK(nlohmann::json::parse(client.Get("/v1/stats")->body).at("scope") == "all");
  CHECK(client.Get("/v1/stats?session=nope")->status == 403);

  server->stop();
  thread.join();
}
