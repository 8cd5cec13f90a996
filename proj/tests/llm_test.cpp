//
// Copyright 2026 The NL2KQL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include "nl2kql/llm.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <doctest/doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

using namespace nl2kql;
using nlohmann::json;

namespace {

// In-process chat endpoint; each test case installs its own handler.
struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~TestServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }

  std::string endpoint(const std::string& path = "") const {
    return "http://127.0.0.1:" + std::to_string(port) + path;
  }
};

std::string ok_body(const std::string& content) {
  json body;
  body["choices"] = json::array({json{{"message", {{"content", content}}}}});
  return body.dump();
}

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("request_key is a stable fingerprint of the message list") {
  // Hand-computed FNV-1a 64 over the length-prefixed role/content records.
  CHECK(llm::request_key({{"user", "hello"}}) == "58f627935b7a5d5b");
  CHECK(llm::request_key({{"system", "you"}, {"user", "hello"}}) ==
        "90c3b1ffd20bae2c");

  // Any change to role, content, or order changes the key.
  auto base = llm::request_key({{"user", "hello"}});
  CHECK(llm::request_key({{"assistant", "hello"}}) != base);
  CHECK(llm::request_key({{"user", "hello!"}}) != base);
  CHECK(llm::request_key({{"user", "hello"}, {"user", "hello"}}) != base);
  CHECK(base.size() == 16);
}

TEST_CASE("scripted client replays responses by request key") {
  llm::ScriptedChatClient client({});
  client.add_response({{"user", "hi"}}, "scripted reply");
  CHECK(client.size() == 1);
  CHECK(client.complete({{"user", "hi"}}) == "scripted reply");

  // Unknown request: the error carries the key to add to the fixture.
  CHECK_THROWS_WITH_AS(
      client.complete({{"user", "hello"}}),
      ("no scripted response for request " +
       llm::request_key({{"user", "hello"}}))
          .c_str(),
      llm::TransportError);
}

TEST_CASE("scripted client loads transcript files") {
  SUBCASE("round trip through a transcript file") {
    json doc;
    doc["responses"][llm::request_key({{"user", "hi"}})] = "from file";
    auto path = write_temp("nl2kql_transcript_ok.json", doc.dump());
    auto client = llm::ScriptedChatClient::from_file(path.string());
    CHECK(client.size() == 1);
    CHECK(client.complete({{"user", "hi"}}) == "from file");
  }

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(
        llm::ScriptedChatClient::from_file("/nonexistent/transcript.json"),
        "cannot read transcript '/nonexistent/transcript.json'",
        llm::TransportError);
  }

  SUBCASE("unparseable transcript") {
    auto path = write_temp("nl2kql_transcript_bad.json", "{nope");
    CHECK_THROWS_AS(llm::ScriptedChatClient::from_file(path.string()),
                    llm::TransportError);
  }

  SUBCASE("wrong shape") {
    auto path = write_temp("nl2kql_transcript_shape.json", "[1, 2]");
    CHECK_THROWS_AS(llm::ScriptedChatClient::from_file(path.string()),
                    llm::TransportError);
  }

  SUBCASE("non-string response") {
    auto path = write_temp("nl2kql_transcript_value.json",
                           R"({"responses": {"k": 42}})");
    CHECK_THROWS_AS(llm::ScriptedChatClient::from_file(path.string()),
                    llm::TransportError);
  }
}

TEST_CASE("http client posts an OpenAI-style completion request") {
  TestServer ts;
  json seen_body;
  std::string seen_auth;
  ts.server.Post("/v1/chat/completions",
                 [&](const httplib::Request& req, httplib::Response& res) {
                   seen_body = json::parse(req.body);
                   seen_auth = req.get_header_value("Authorization");
                   res.set_content(ok_body("hello back"), "application/json");
                 });
  ts.start();

  llm::HttpChatOptions options;
  options.endpoint = ts.endpoint();  // no path: default is used
  options.model = "test-model";
  options.api_key = "sekrit";
  llm::HttpChatClient client(options);

  CHECK(client.complete({{"system", "be brief"}, {"user", "hi"}}) ==
        "hello back");
  CHECK(seen_auth == "Bearer sekrit");
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["temperature"] == 0);
  REQUIRE(seen_body["messages"].size() == 2);
  CHECK(seen_body["messages"][0]["role"] == "system");
  CHECK(seen_body["messages"][1]["content"] == "hi");
}

TEST_CASE("http client honors a custom endpoint path") {
  TestServer ts;
  ts.server.Post("/custom/chat",
                 [&](const httplib::Request&, httplib::Response& res) {
                   res.set_content(ok_body("custom"), "application/json");
                 });
  ts.start();

  llm::HttpChatOptions options;
  options.endpoint = ts.endpoint("/custom/chat");
  llm::HttpChatClient client(options);
  CHECK(client.complete({{"user", "q"}}) == "custom");
}

TEST_CASE("http client retries transient failures with backoff") {
  std::atomic<int> calls{0};

  SUBCASE("500 then success") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     if (++calls == 1) {
                       res.status = 500;
                       return;
                     }
                     res.set_content(ok_body("recovered"), "application/json");
                   });
    ts.start();

    llm::HttpChatOptions options;
    options.endpoint = ts.endpoint();
    options.initial_backoff_ms = 1;
    llm::HttpChatClient client(options);
    CHECK(client.complete({{"user", "q"}}) == "recovered");
    CHECK(calls == 2);
  }

  SUBCASE("429 then success") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     if (++calls == 1) {
                       res.status = 429;
                       return;
                     }
                     res.set_content(ok_body("throttled ok"),
                                     "application/json");
                   });
    ts.start();

    llm::HttpChatOptions options;
    options.endpoint = ts.endpoint();
    options.initial_backoff_ms = 1;
    llm::HttpChatClient client(options);
    CHECK(client.complete({{"user", "q"}}) == "throttled ok");
    CHECK(calls == 2);
  }

  SUBCASE("every attempt fails") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     ++calls;
                     res.status = 503;
                   });
    ts.start();

    llm::HttpChatOptions options;
    options.endpoint = ts.endpoint();
    options.max_attempts = 2;
    options.initial_backoff_ms = 1;
    llm::HttpChatClient client(options);
    CHECK_THROWS_WITH_AS(client.complete({{"user", "q"}}),
                         doctest::Contains("gave up after 2 attempts"),
                         llm::TransportError);
    CHECK(calls == 2);
  }
}

TEST_CASE("http client fails fast on deterministic errors") {
  std::atomic<int> calls{0};

  SUBCASE("client error status") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     ++calls;
                     res.status = 400;
                     res.set_content("bad request", "text/plain");
                   });
    ts.start();

    llm::HttpChatOptions options;
    options.endpoint = ts.endpoint();
    llm::HttpChatClient client(options);
    CHECK_THROWS_WITH_AS(client.complete({{"user", "q"}}),
                         doctest::Contains("status 400"), llm::TransportError);
    CHECK(calls == 1);
  }

  SUBCASE("unparseable success body") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     ++calls;
                     res.set_content("not json", "text/plain");
                   });
    ts.start();

    llm::HttpChatOptions options;
    options.endpoint = ts.endpoint();
    llm::HttpChatClient client(options);
    CHECK_THROWS_WITH_AS(client.complete({{"user", "q"}}),
                         doctest::Contains("malformed completion body"),
                         llm::TransportError);
    CHECK(calls == 1);
  }

  SUBCASE("success body without choices") {
    TestServer ts;
    ts.server.Post("/v1/chat/completions",
                   [&](const httplib::Request&, httplib::Response& res) {
                     ++calls;
                     res.set_content("{}", "application/json");
                   });
    ts.start();

    llm::HttpChatOptions options;
    options.endpoint = ts.endpoint();
    llm::HttpChatClient client(options);
    CHECK_THROWS_WITH_AS(
        client.complete({{"user", "q"}}),
        "completion body has no choices[0].message.content",
        llm::TransportError);
    CHECK(calls == 1);
  }
}

TEST_CASE("http client rejects an endpoint without a scheme") {
  llm::HttpChatOptions options;
  options.endpoint = "localhost:8080";
  CHECK_THROWS_WITH_AS(
      llm::HttpChatClient client(options),
      "endpoint 'localhost:8080' has no scheme "
      "(expected http://host[:port][/path])",
      llm::TransportError);
}

TEST_CASE("http client options come from the environment") {
  ::setenv("LLM_ENDPOINT", "http://example.test:9999/v2/chat", 1);
  ::setenv("LLM_MODEL", "env-model", 1);
  ::setenv("LLM_API_KEY", "env-key", 1);
  auto options = llm::HttpChatClient::options_from_env();
  CHECK(options.endpoint == "http://example.test:9999/v2/chat");
  CHECK(options.model == "env-model");
  CHECK(options.api_key == "env-key");
  CHECK(options.max_attempts == 3);
  CHECK(options.initial_backoff_ms == 250);

  ::unsetenv("LLM_ENDPOINT");
  ::unsetenv("LLM_MODEL");
  ::unsetenv("LLM_API_KEY");
  CHECK_THROWS_WITH_AS(llm::HttpChatClient::options_from_env(),
                       "LLM_ENDPOINT is not set", llm::TransportError);
}
