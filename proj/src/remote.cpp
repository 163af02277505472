#include "pragrad/remote.hpp"

#include <algorithm>

#include "pragrad/errors.hpp"
#include "pragrad/text.hpp"

namespace pragrad {

namespace {

std::string string_field(const nlohmann::json& j, const char* name, const std::string& url) {
  if (!j.is_object() || !j.contains(name) || !j[name].is_string()) {
    throw RemoteError("endpoint " + url + ": response lacks string field '" + name + "'");
  }
  return j[name].get<std::string>();
}

}  // namespace

RemoteRewriteBackend::RemoteRewriteBackend(EndpointConfig endpoint)
    : endpoint_(std::move(endpoint)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(1, endpoint_.max_in_flight))) {
  parse_endpoint_url(endpoint_.url);
}

std::string RemoteRewriteBackend::rewrite(const CleaningRule& rule, std::string_view sentence) {
  nlohmann::json body = {{"rule_id", rule.id},
                         {"prompt", build_rule_prompt(rule, sentence)},
                         {"sentence", std::string(sentence)},
                         {"temperature", 0}};
  in_flight_->acquire();
  nlohmann::json response;
  try {
    response = post_json(endpoint_, body, 1 + std::max(0, endpoint_.retries));
  } catch (...) {
    in_flight_->release();
    throw;
  }
  in_flight_->release();
  return string_field(response, "rewritten", endpoint_.url);
}

RemoteGeneration generate_remote(const GenerationRequest& request, const EndpointConfig& endpoint) {
  RemoteGeneration out;
  out.prompt = build_generation_prompt(request);
  nlohmann::json body = {{"study_id", request.study_id}, {"prompt", out.prompt}, {"temperature", 0}};
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto response = post_json(endpoint, body, 1);
    out.text = normalize_text(string_field(response, "completion", endpoint.url));
  } catch (const RemoteError& e) {
    throw RemoteError("request '" + request.study_id + "': " + e.what());
  }
  out.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace pragrad
