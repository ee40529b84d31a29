#pragma once

#include <memory>
#include <string>

#include "convxai/service.hpp"

namespace httplib {
class Server;
}

namespace convxai {

inline constexpr int kWireSchemaVersion = 1;

// Registers the JSON endpoints of `service` on a new server (see
// schema/wire.schema.json). The service must outlive the server.
std::unique_ptr<httplib::Server> make_http_server(ConvXaiService& service);

// Blocks serving on host:port until the server is stopped.
bool serve_http(ConvXaiService& service, const std::string& host, int port);

}  // namespace convxai
