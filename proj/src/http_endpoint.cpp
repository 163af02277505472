#include <algorithm>
#include <regex>

#include <httplib.h>

#include "pragrad/errors.hpp"
#include "pragrad/remote.hpp"

namespace pragrad {

ParsedUrl parse_endpoint_url(const std::string& url) {
  static const std::regex pattern(R"(^http://([A-Za-z0-9.\-]+|\[[0-9a-fA-F:]+\])(?::(\d{1,5}))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) {
    throw RemoteError("unsupported endpoint URL '" + url + "' (expected http://host[:port]/path)");
  }
  ParsedUrl parsed;
  parsed.host = m[1].str();
  if (m[2].matched) parsed.port = std::stoi(m[2].str());
  parsed.path = m[3].matched ? m[3].str() : "/";
  return parsed;
}

nlohmann::json post_json(const EndpointConfig& endpoint, const nlohmann::json& body, int attempts) {
  const auto url = parse_endpoint_url(endpoint.url);
  httplib::Client client(url.host, url.port);
  const auto timeout = std::chrono::duration<double>(endpoint.timeout_seconds);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  client.set_connection_timeout(micros);
  client.set_read_timeout(micros);
  client.set_write_timeout(micros);
  if (!endpoint.token.empty()) client.set_bearer_token_auth(endpoint.token);

  std::string last_error;
  const std::string payload = body.dump();
  for (int attempt = 0; attempt < std::max(1, attempts); ++attempt) {
    auto res = client.Post(url.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP status " + std::to_string(res->status);
      if (res->status >= 400 && res->status < 500) break;
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      last_error = "malformed JSON response";
      break;
    }
  }
  throw RemoteError("endpoint " + endpoint.url + ": " + last_error);
}

}  // namespace pragrad
