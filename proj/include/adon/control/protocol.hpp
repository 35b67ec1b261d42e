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


#ifndef ADON_CONTROL_PROTOCOL_HPP_
#define ADON_CONTROL_PROTOCOL_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "adon/control/service.hpp"
#include "adon/core/error.hpp"
#include "adon/scenario/scenario.hpp"
#include "adon/telemetry/json.hpp"

namespace adon::control {

// Wire error codes, borrowed from HTTP.
enum ErrorCode : int {
  kBadRequest = 400,
  kNotFound = 404,
  kConflict = 409,
  kBacklogOverflow = 429,
  kInternal = 500,
};

struct Request {
  std::uint64_t id = 0;
  std::string method;
  nlohmann::json params = nlohmann::json::object();

  bool operator==(const Request&) const = default;
};

struct ErrorBody {
  int code = 0;
  std::string message;

  bool operator==(const ErrorBody&) const = default;
};

struct Response {
  std::uint64_t id = 0;
  std::optional<nlohmann::json> result;
  std::optional<ErrorBody> error;

  static Response ok(std::uint64_t id, nlohmann::json result) { return {id, std::move(result), std::nullopt}; }
  static Response fail(std::uint64_t id, int code, std::string message) {
    return {id, std::nullopt, ErrorBody{code, std::move(message)}};
  }
  bool operator==(const Response&) const = default;
};

// Canonical encoding: fixed top-level field order, compact separators,
// nested objects with sorted keys. No trailing newline.
inline std::string encode(const Request& r) {
  return "{\"id\":" + std::to_string(r.id) + ",\"method\":" + nlohmann::json(r.method).dump() +
         ",\"params\":" + r.params.dump() + "}";
}

inline std::string encode(const Response& r) {
  std::string s = "{\"id\":" + std::to_string(r.id);
  if (r.error) {
    s += ",\"error\":{\"code\":" + std::to_string(r.error->code) +
         ",\"message\":" + nlohmann::json(r.error->message).dump() + "}}";
  } else {
    s += ",\"result\":" + r.result.value_or(nlohmann::json::object()).dump() + "}";
  }
  return s;
}

namespace detail {

inline nlohmann::json parse_object(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError::at_offset(std::string("malformed message: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!j.is_object()) throw ParseError::at_offset("message is not a JSON object", 0);
  return j;
}

inline std::uint64_t parse_id(const nlohmann::json& j) {
  if (!j.contains("id") || !j.at("id").is_number_unsigned()) throw ValidationError("id must be an unsigned integer");
  return j.at("id").get<std::uint64_t>();
}

}  // namespace detail

inline Request decode_request(std::string_view line) {
  const auto j = detail::parse_object(line);
  if (j.size() != 3 || !j.contains("method") || !j.contains("params"))
    throw ValidationError("request needs exactly id, method and params");
  Request r;
  r.id = detail::parse_id(j);
  if (!j.at("method").is_string()) throw ValidationError("method must be a string");
  if (!j.at("params").is_object()) throw ValidationError("params must be an object");
  r.method = j.at("method").get<std::string>();
  r.params = j.at("params");
  return r;
}

inline Response decode_response(std::string_view line) {
  const auto j = detail::parse_object(line);
  if (j.size() != 2) throw ValidationError("response needs exactly id and one of result, error");
  Response r;
  r.id = detail::parse_id(j);
  if (j.contains("result")) {
    if (!j.at("result").is_object()) throw ValidationError("result must be an object");
    r.result = j.at("result");
  } else if (j.contains("error")) {
    const auto& e = j.at("error");
    if (!e.is_object() || e.size() != 2 || !e.contains("code") || !e.contains("message") ||
        !e.at("code").is_number_integer() || !e.at("message").is_string())
      throw ValidationError("error must be {code, message}");
    r.error = ErrorBody{e.at("code").get<int>(), e.at("message").get<std::string>()};
  } else {
    throw ValidationError("response needs result or error");
  }
  return r;
}

inline int error_code(const std::exception& e) {
  if (dynamic_cast<const Conflict*>(&e)) return kConflict;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e))
    return kBadRequest;
  return kInternal;
}

// Maps requests onto a NetworkService. Transport-free so the TCP session and
// the tests share it. A subscribe request hands back the subscription for
// the caller to drain; its stream items reuse the request id.
class Dispatcher {
 public:
  explicit Dispatcher(NetworkService& service, std::string source = "control")
      : service_(service), source_(std::move(source)) {}

  struct Outcome {
    Response response;
    std::shared_ptr<Subscription> subscription;
  };

  Outcome handle(const Request& req) {
    try {
      return dispatch(req);
    } catch (const std::exception& e) {
      return {Response::fail(req.id, error_code(e), e.what()), nullptr};
    }
  }

  // Decodes, dispatches and encodes one line. Undecodable input answers
  // with id 0 since there is no id to echo.
  std::pair<std::string, std::shared_ptr<Subscription>> handle_line(std::string_view line) {
    Request req;
    try {
      req = decode_request(line);
    } catch (const std::exception& e) {
      std::uint64_t id = 0;
      try {
        id = detail::parse_id(nlohmann::json::parse(line));
      } catch (const std::exception&) {
      }
      return {encode(Response::fail(id, kBadRequest, e.what())), nullptr};
    }
    auto out = handle(req);
    return {encode(out.response), std::move(out.subscription)};
  }

  static Response stream_item(std::uint64_t request_id, nlohmann::json record) {
    return Response::ok(request_id, {{"telemetry", std::move(record)}});
  }

  static Response overflow(std::uint64_t request_id) {
    return Response::fail(request_id, kBacklogOverflow, "subscription dropped: backlog overflow");
  }

 private:
  Outcome dispatch(const Request& req) {
    const auto& p = req.params;
    if (req.method == "get-config") return {Response::ok(req.id, service_.get_config()), nullptr};
    if (req.method == "edit-config") return {Response::ok(req.id, service_.edit_config(p, source_)), nullptr};
    if (req.method == "subscribe-telemetry") {
      auto sub = service_.subscribe(telemetry::TelemetryFilter::from_json(p.value("filter", nlohmann::json::object())));
      return {Response::ok(req.id, {{"subscription", sub->id()}, {"tick", service_.tick()}}), sub};
    }
    if (req.method == "inject-event") {
      auto e = scenario::event_from_json(p.at("event"));
      service_.inject_event(e);
      return {Response::ok(req.id, {{"accepted", true}, {"tick", service_.tick()}}), nullptr};
    }
    if (req.method == "get-logs") {
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& e : service_.get_logs(p.at("from").get<int>(), p.at("to").get<int>()))
        entries.push_back(to_json(e));
      return {Response::ok(req.id, {{"entries", entries}}), nullptr};
    }
    return {Response::fail(req.id, kNotFound, "unknown method '" + req.method + "'"), nullptr};
  }

  NetworkService& service_;
  std::string source_;
};

}  // namespace adon::control

#endif  // ADON_CONTROL_PROTOCOL_HPP_
