#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pragrad/cleaning.hpp"
#include "pragrad/generator.hpp"

namespace pragrad {

struct EndpointConfig {
  // http://host[:port]/path
  std::string url;
  std::string token;
  double timeout_seconds = 30.0;
  // Extra attempts after a failed request (cleaning only).
  int retries = 2;
  int max_in_flight = 4;
};

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path;
};

// Only plain http:// URLs are accepted; throws RemoteError otherwise.
ParsedUrl parse_endpoint_url(const std::string& url);

// POSTs a JSON body and returns the parsed JSON response. Transport errors,
// non-2xx statuses and malformed bodies raise RemoteError naming the URL.
// `attempts` counts the first try.
nlohmann::json post_json(const EndpointConfig& endpoint, const nlohmann::json& body, int attempts);

// Sends {rule_id, prompt, sentence, temperature: 0} and reads {rewritten}.
class RemoteRewriteBackend final : public RewriteBackend {
 public:
  explicit RemoteRewriteBackend(EndpointConfig endpoint);
  std::string rewrite(const CleaningRule& rule, std::string_view sentence) override;
  std::string name() const override { return "remote"; }

 private:
  EndpointConfig endpoint_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

struct RemoteGeneration {
  std::string text;
  std::string prompt;
  double latency_ms = 0.0;
};

// Sends {study_id, prompt, temperature: 0} once and returns the normalized
// {completion}. Errors name the request id and endpoint.
RemoteGeneration generate_remote(const GenerationRequest& request, const EndpointConfig& endpoint);

}  // namespace pragrad
