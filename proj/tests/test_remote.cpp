#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pragrad/cleaning.hpp"
#include "pragrad/cli.hpp"
#include "pragrad/errors.hpp"
#include "pragrad/labeler.hpp"
#include "pragrad/remote.hpp"

using namespace pragrad;

namespace {

// Local HTTP server on an ephemeral port, torn down with the fixture.
class MockServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit MockServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mutex_);
        bodies_.push_back(nlohmann::json::parse(req.body));
        auth_.push_back(req.get_header_value("Authorization"));
      }
      ++hits;
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path = "/v1/rewrite") const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  std::vector<nlohmann::json> bodies() {
    std::lock_guard lock(mutex_);
    return bodies_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mutex_);
    return auth_;
  }

  std::atomic<int> hits{0};

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mutex_;
  std::vector<nlohmann::json> bodies_;
  std::vector<std::string> auth_;
};

void reply(httplib::Response& res, const nlohmann::json& j) {
  res.set_content(j.dump(), "application/json");
}

// A port with nothing listening: bind, read the port, close.
std::string dead_url() {
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");
  probe.stop();
  return "http://127.0.0.1:" + std::to_string(port) + "/v1/rewrite";
}

}  // namespace

TEST_SUITE("remote") {
  TEST_CASE("endpoint URLs") {
    const auto u = parse_endpoint_url("http://localhost:8080/v1/rewrite");
    CHECK(u.host == "localhost");
    CHECK(u.port == 8080);
    CHECK(u.path == "/v1/rewrite");
    CHECK(parse_endpoint_url("http://example.org").port == 80);
    CHECK(parse_endpoint_url("http://example.org").path == "/");
    CHECK_THROWS_AS(parse_endpoint_url("https://example.org/x"), RemoteError);
    CHECK_THROWS_AS(parse_endpoint_url("example.org"), RemoteError);
  }

  TEST_CASE("rewrite backend sends the rule prompt with temperature 0 and a bearer token") {
    MockServer server([](const httplib::Request& req, httplib::Response& res) {
      const auto j = nlohmann::json::parse(req.body);
      reply(res, {{"rewritten", j["rule_id"] == 5 ? "Large right pneumothorax" : j["sentence"]}});
    });
    RemoteRewriteBackend backend({server.url(), "s3cret", 5.0, 0, 2});
    CHECK(clean_sentence("New large right pneumothorax", cleaning_rules(), backend, Lexicon::builtin()) ==
          "Large right pneumothorax");
    const auto bodies = server.bodies();
    REQUIRE(bodies.size() == 1);  // only rule 5 triggers
    CHECK(bodies[0]["rule_id"] == 5);
    CHECK(bodies[0]["temperature"] == 0);
    CHECK(bodies[0]["sentence"] == "New large right pneumothorax");
    CHECK(bodies[0]["prompt"] == build_rule_prompt(cleaning_rule(5), "New large right pneumothorax"));
    CHECK(server.auth()[0] == "Bearer s3cret");
  }

  TEST_CASE("server errors are retried, client errors are not") {
    std::atomic<int> calls{0};
    MockServer flaky([&](const httplib::Request&, httplib::Response& res) {
      if (calls++ < 2) {
        res.status = 503;
        return;
      }
      reply(res, {{"rewritten", "ok"}});
    });
    CHECK(post_json({flaky.url(), "", 5.0, 2, 1}, {{"x", 1}}, 3)["rewritten"] == "ok");
    CHECK(flaky.hits == 3);

    MockServer rejecting([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    try {
      post_json({rejecting.url(), "", 5.0, 2, 1}, {{"x", 1}}, 3);
      FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
      CHECK(std::string(e.what()).find("HTTP status 401") != std::string::npos);
    }
    CHECK(rejecting.hits == 1);
  }

  TEST_CASE("malformed responses are errors") {
    MockServer garbage([](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    CHECK_THROWS_AS(post_json({garbage.url(), "", 5.0, 0, 1}, {}, 1), RemoteError);
    MockServer missing([](const httplib::Request&, httplib::Response& res) { reply(res, {{"other", 1}}); });
    RemoteRewriteBackend backend({missing.url(), "", 5.0, 0, 1});
    CHECK_THROWS_AS(backend.rewrite(cleaning_rule(5), "New edema"), RemoteError);
  }

  TEST_CASE("unreachable endpoint errors name the endpoint") {
    const auto url = dead_url();
    RemoteRewriteBackend backend({url, "", 1.0, 1, 1});
    try {
      backend.rewrite(cleaning_rule(5), "New edema");
      FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
      CHECK(std::string(e.what()).find(url) != std::string::npos);
    }
  }

  TEST_CASE("remote generation returns the normalized completion") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
      reply(res, {{"completion", "  No acute   process. "}});
    });
    const GenerationRequest req{"g1", "cough", {Condition::kPleuralEffusion}};
    const auto out = generate_remote(req, {server.url("/v1/generate"), "", 5.0, 0, 1});
    CHECK(out.text == "No acute process.");
    CHECK(out.prompt == build_generation_prompt(req));
    CHECK(out.latency_ms >= 0.0);
    const auto bodies = server.bodies();
    REQUIRE(bodies.size() == 1);
    CHECK(bodies[0]["study_id"] == "g1");
    CHECK(bodies[0]["temperature"] == 0);
    CHECK(bodies[0]["prompt"] == build_generation_prompt(req));
  }

  TEST_CASE("remote generation is sent once and failures name the request") {
    MockServer failing([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    try {
      generate_remote({"g7", "", {}}, {failing.url("/gen"), "", 5.0, 5, 1});
      FAIL("expected RemoteError");
    } catch (const RemoteError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("'g7'") != std::string::npos);
      CHECK(msg.find(failing.url("/gen")) != std::string::npos);
    }
    CHECK(failing.hits == 1);
  }

  TEST_CASE("in-flight limit bounds concurrent requests") {
    std::atomic<int> active{0}, peak{0};
    MockServer slow([&](const httplib::Request& req, httplib::Response& res) {
      const int now = ++active;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --active;
      reply(res, {{"rewritten", nlohmann::json::parse(req.body)["sentence"]}});
    });
    RemoteRewriteBackend backend({slow.url(), "", 5.0, 0, 2});
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) {
      threads.emplace_back([&] { backend.rewrite(cleaning_rule(5), "New edema"); });
    }
    for (auto& t : threads) t.join();
    CHECK(slow.hits == 6);
    CHECK(peak <= 2);
  }

  TEST_CASE("CLI clean against a failing endpoint exits 2") {
    const auto dir = std::filesystem::temp_directory_path() / "pragrad_remote_cli";
    std::filesystem::create_directories(dir);
    {
      std::ofstream in(dir / "in.jsonl");
      in << R"({"study_id":"s1","indication":"","impression":"New large right pneumothorax."})" << '\n';
    }
    std::ostringstream out, err;
    const int code = run("clean",
                         {"--in", (dir / "in.jsonl").string(), "--out", (dir / "out.jsonl").string(),
                          "--backend", "remote", "--endpoint", dead_url(), "--timeout", "1",
                          "--retries", "0"},
                         RunContext{out, err, [](const std::string&) { return std::nullopt; }});
    CHECK(code == 2);
    CHECK(err.str().find("remote error") != std::string::npos);
    CHECK(err.str().find("s1") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "out.jsonl"));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("CLI clean through a mock endpoint") {
    MockServer server([](const httplib::Request& req, httplib::Response& res) {
      const auto j = nlohmann::json::parse(req.body);
      reply(res, {{"rewritten", j["rule_id"] == 2 ? "REMOVED" : j["sentence"]}});
    });
    const auto dir = std::filesystem::temp_directory_path() / "pragrad_remote_cli_ok";
    std::filesystem::create_directories(dir);
    {
      std::ofstream in(dir / "in.jsonl");
      in << R"({"study_id":"s1","indication":"","impression":"No edema. Findings discussed with Dr. ___ by phone."})"
         << '\n';
    }
    std::ostringstream out, err;
    auto env = [&](const std::string& name) -> std::optional<std::string> {
      if (name == "PRAGRAD_CLEAN_ENDPOINT") return server.url();
      if (name == "PRAGRAD_CLEAN_TOKEN") return std::string("tok");
      return std::nullopt;
    };
    const int code = run("clean",
                         {"--in", (dir / "in.jsonl").string(), "--out", (dir / "out.jsonl").string(),
                          "--backend", "remote"},
                         RunContext{out, err, env});
    REQUIRE(code == 0);
    const auto cleaned = read_report_jsonl(dir / "out.jsonl");
    CHECK(cleaned[0].impression == "No edema.");
    CHECK(server.auth().front() == "Bearer tok");
    std::ifstream cfg(dir / "out.jsonl.config.json");
    const auto j = nlohmann::json::parse(cfg);
    CHECK(j["config"]["clean_endpoint"]["token"] != "tok");
    std::filesystem::remove_all(dir);
  }
}
