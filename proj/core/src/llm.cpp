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

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

#include "fnv1a.hpp"
#include "httplib.h"
#include "json.hpp"

namespace nl2kql::llm {
namespace {

using nlohmann::json;

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value != nullptr ? std::string(value) : fallback;
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::string request_key(const std::vector<ChatMessage>& messages) {
  // Role and content are length-prefixed so no message split can collide
  // with another list serializing to the same bytes.
  std::string buffer;
  for (const ChatMessage& message : messages) {
    buffer += std::to_string(message.role.size()) + ":" + message.role;
    buffer += std::to_string(message.content.size()) + ":" + message.content;
  }
  return hex64(detail::fnv1a64(buffer));
}

ScriptedChatClient::ScriptedChatClient(
    std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

ScriptedChatClient ScriptedChatClient::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot read transcript '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw TransportError("transcript '" + path + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("responses") ||
      !doc["responses"].is_object()) {
    throw TransportError("transcript '" + path +
                         "': expected an object with a 'responses' map");
  }
  std::map<std::string, std::string> responses;
  for (const auto& [key, value] : doc["responses"].items()) {
    if (!value.is_string()) {
      throw TransportError("transcript '" + path + "': response for key '" +
                           key + "' is not a string");
    }
    responses[key] = value.get<std::string>();
  }
  return ScriptedChatClient(std::move(responses));
}

std::string ScriptedChatClient::complete(
    const std::vector<ChatMessage>& messages) {
  const std::string key = request_key(messages);
  const auto it = responses_.find(key);
  if (it == responses_.end()) {
    throw TransportError("no scripted response for request " + key);
  }
  return it->second;
}

void ScriptedChatClient::add_response(const std::vector<ChatMessage>& messages,
                                      std::string response) {
  responses_[request_key(messages)] = std::move(response);
}

HttpChatClient::HttpChatClient(HttpChatOptions options)
    : options_(std::move(options)) {
  const std::string& endpoint = options_.endpoint;
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError("endpoint '" + endpoint +
                         "' has no scheme (expected http://host[:port][/path])");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    host_ = endpoint;
    path_ = "/v1/chat/completions";
  } else {
    host_ = endpoint.substr(0, path_start);
    path_ = endpoint.substr(path_start);
  }
}

HttpChatOptions HttpChatClient::options_from_env() {
  HttpChatOptions options;
  options.endpoint = env_or("LLM_ENDPOINT", "");
  if (options.endpoint.empty()) {
    throw TransportError("LLM_ENDPOINT is not set");
  }
  options.model = env_or("LLM_MODEL", "");
  options.api_key = env_or("LLM_API_KEY", "");
  return options;
}

std::string HttpChatClient::complete(
    const std::vector<ChatMessage>& messages) {
  json body;
  body["model"] = options_.model;
  body["temperature"] = 0;
  body["messages"] = json::array();
  for (const ChatMessage& message : messages) {
    body["messages"].push_back(
        {{"role", message.role}, {"content", message.content}});
  }
  const std::string payload = body.dump();

  httplib::Client client(host_);
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }

  std::string last_error;
  int backoff_ms = options_.initial_backoff_ms;
  const int attempts = options_.max_attempts < 1 ? 1 : options_.max_attempts;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    httplib::Result result =
        client.Post(path_, headers, payload, "application/json");
    if (!result) {
      last_error = "connection to " + host_ + " failed: " +
                   httplib::to_string(result.error());
      continue;
    }
    if (retryable_status(result->status)) {
      last_error = "status " + std::to_string(result->status) + " from " +
                   host_ + path_;
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      throw TransportError("status " + std::to_string(result->status) +
                           " from " + host_ + path_ + ": " + result->body);
    }
    json reply;
    try {
      reply = json::parse(result->body);
    } catch (const json::parse_error& e) {
      throw TransportError(std::string("malformed completion body: ") +
                           e.what());
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() ||
        !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string()) {
      throw TransportError(
          "completion body has no choices[0].message.content");
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
  }
  throw TransportError("gave up after " + std::to_string(attempts) +
                       " attempts; last error: " + last_error);
}

}  // namespace nl2kql::llm
