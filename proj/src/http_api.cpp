#include "convxai/http_api.hpp"

#include <httplib.h>

#include <iostream>

#include "convxai/error.hpp"

namespace convxai {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

nlohmann::json parse_body(const httplib::Request& req) {
  auto body = nlohmann::json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw InvalidInput("request body must be a JSON object");
  return body;
}

template <typename T>
T required(const nlohmann::json& body, const char* field) {
  if (!body.contains(field)) throw InvalidInput(std::string("missing field '") + field + "'");
  try {
    return body.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidInput(std::string("field '") + field + "' has the wrong type");
  }
}

// Maps library errors onto HTTP statuses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Unauthorized& e) {
      send_error(res, 403, "unauthorized", e.what());
    } catch (const NotFound& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const InvalidInput& e) {
      send_error(res, 400, "invalid_input", e.what());
    } catch (const DegenerateInput& e) {
      send_error(res, 422, "degenerate_input", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

nlohmann::json stats_json(const UsageStats& stats, const std::string& scope) {
  auto j = stats.to_json();
  j["scope"] = scope;
  return j;
}

}  // namespace

std::unique_ptr<httplib::Server> make_http_server(ConvXaiService& service) {
  auto server = std::make_unique<httplib::Server>();
  auto& s = *server;

  s.Get("/health", guarded([&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"}, {"schema_version", kWireSchemaVersion}, {"conferences", service.conferences()}});
  }));

  s.Post("/v1/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto conference = required<std::string>(body, "conference");
    const auto id = service.create_session(conference);
    send_json(res, 201, {{"session_id", id}, {"conference", conference}});
  }));

  s.Post(R"(/v1/sessions/([^/]+)/abstract)",
         guarded([&service](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           const auto result = service.submit_abstract(req.matches[1].str(), required<std::string>(body, "text"));
           send_json(res, 200, {{"document", to_json(result.document)}, {"summary", to_json(result.summary)}});
         }));

  s.Post(R"(/v1/sessions/([^/]+)/select)",
         guarded([&service](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           const auto index = required<long long>(body, "index");
           if (index < 0) throw InvalidInput("index must be non-negative");
           send_json(res, 200, to_json(service.select_sentence(req.matches[1].str(), static_cast<std::size_t>(index))));
         }));

  s.Post(R"(/v1/sessions/([^/]+)/chat)",
         guarded([&service](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           send_json(res, 200,
                     to_json(service.post_chat(req.matches[1].str(), required<std::string>(body, "utterance"))));
         }));

  s.Get(R"(/v1/sessions/([^/]+)/log)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, {{"events", service.session_log(req.matches[1].str())}});
        }));

  s.Get("/v1/stats", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    if (req.has_param("session")) {
      const auto id = req.get_param_value("session");
      send_json(res, 200, stats_json(service.usage_stats(id), id));
    } else {
      send_json(res, 200, stats_json(service.usage_stats(), "all"));
    }
  }));

  return server;
}

bool serve_http(ConvXaiService& service, const std::string& host, int port) {
  auto server = make_http_server(service);
  std::cerr << "listening on " << host << ":" << port << "\n";
  return server->listen(host, port);
}

}  // namespace convxai
