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
#ifndef NL2KQL_LLM_HPP_
#define NL2KQL_LLM_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nl2kql::llm {

class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& message)
      : std::runtime_error(message) {}
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

// Chat-completion provider. Implementations must be deterministic for equal
// inputs when temperature is 0 (the only mode this project uses).
class ChatClient {
 public:
  virtual ~ChatClient() = default;

  // Returns the assistant message content. Throws TransportError when the
  // provider is unreachable or answers with a non-success status.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// Stable fingerprint of a message list (FNV-1a 64, hex). Keys transcript
// files, so equal conversations replay the same scripted response.
std::string request_key(const std::vector<ChatMessage>& messages);

// Offline stand-in replaying a transcript: request_key -> assistant text.
// Unknown requests throw TransportError naming the missing key, which is the
// string to add when extending a fixture.
class ScriptedChatClient : public ChatClient {
 public:
  explicit ScriptedChatClient(std::map<std::string, std::string> responses);
  // Transcript JSON: {"responses": {"<key>": "<assistant text>", ...}}.
  static ScriptedChatClient from_file(const std::string& path);

  std::string complete(const std::vector<ChatMessage>& messages) override;

  void add_response(const std::vector<ChatMessage>& messages,
                    std::string response);
  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, std::string> responses_;
};

struct HttpChatOptions {
  // http://host[:port][/path]; path defaults to /v1/chat/completions.
  std::string endpoint;
  std::string model;
  std::string api_key;  // sent as a Bearer token when non-empty
  int max_attempts = 3;
  // Doubled after each failed attempt.
  int initial_backoff_ms = 250;
};

// OpenAI-compatible chat-completions client, always at temperature 0.
// Connection failures, 5xx, and 429 are retried with exponential backoff up
// to max_attempts; other statuses and malformed bodies fail immediately
// (a deterministic request would just fail the same way again).
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatOptions options);

  // Reads LLM_ENDPOINT, LLM_MODEL, LLM_API_KEY; throws TransportError when
  // LLM_ENDPOINT is unset.
  static HttpChatOptions options_from_env();

  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  HttpChatOptions options_;
  std::string host_;  // scheme://host:port
  std::string path_;
};

}  // namespace nl2kql::llm

#endif  // NL2KQL_LLM_HPP_
