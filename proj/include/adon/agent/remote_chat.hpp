// Copyright 2026 The ADON Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADON_AGENT_REMOTE_CHAT_HPP_
#define ADON_AGENT_REMOTE_CHAT_HPP_

#include <cstdlib>
#include <fstream>
#include <regex>
#include <string>

#include <httplib.h>
// <resolv.h> (pulled in by httplib) defines _res as a macro, which breaks
// Eigen headers included after this one.
#ifdef _res
#undef _res
#endif
#include <nlohmann/json.hpp>

#include "adon/agent/backend.hpp"
#include "adon/core/error.hpp"

namespace adon::agent {

class BackendError : public Error {
 public:
  using Error::Error;
};

struct RemoteChatConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model;
  std::string api_key_env = "ADON_LLM_API_KEY";
  int timeout_s = 60;

  static RemoteChatConfig from_json(const nlohmann::json& j) {
    RemoteChatConfig c;
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    return c;
  }

  static RemoteChatConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open backend config " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("backend config " + path + ": " + e.what());
    }
  }
};

// Chat-completions style HTTP endpoint (plain http only). The reply text is
// returned verbatim for the grammar parser.
class RemoteChat : public LlmBackend {
 public:
  explicit RemoteChat(RemoteChatConfig cfg) : cfg_(std::move(cfg)) {
    static const std::regex kUrl(R"(^http://([^/:]+)(?::(\d+))?(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg_.endpoint, m, kUrl))
      throw ValidationError("endpoint must look like http://host[:port]/path, got " + cfg_.endpoint);
    host_ = m[1].str();
    port_ = m[2].matched ? std::stoi(m[2].str()) : 80;
    path_ = m[3].matched ? m[3].str() : "/";
  }

  std::string name() const override { return "remote:" + cfg_.model; }

  std::string complete(const Prompt& p) override {
    httplib::Client cli(host_, port_);
    cli.set_connection_timeout(cfg_.timeout_s, 0);
    cli.set_read_timeout(cfg_.timeout_s, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
    const nlohmann::json body = {
        {"model", cfg_.model},
        {"temperature", 0},
        {"messages", {{{"role", "system"}, {"content", "You operate an optical line system through tool actions."}},
                      {{"role", "user"}, {"content", render_prompt(p)}}}}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw BackendError("request to " + cfg_.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw BackendError("endpoint answered HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      return nlohmann::json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("unexpected response shape: ") + e.what());
    }
  }

 private:
  RemoteChatConfig cfg_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

}  // namespace adon::agent

#endif  // ADON_AGENT_REMOTE_CHAT_HPP_
