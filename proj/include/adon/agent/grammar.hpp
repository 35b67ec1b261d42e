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

#ifndef ADON_AGENT_GRAMMAR_HPP_
#define ADON_AGENT_GRAMMAR_HPP_

#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"

namespace adon::agent {

// Backend output that does not follow the action grammar.
class MalformedAction : public Error {
 public:
  using Error::Error;
};

// Grammar, one directive per line:
//   THOUGHT: <free text>
//   ACTION: <name> [<args>]
// <name> is [a-z_]+. Blank lines are allowed; anything else is malformed.
struct Action {
  std::string name;
  std::string args;
  std::string thought;  // THOUGHT lines since the previous action
  std::string line;     // the ACTION line verbatim
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline std::vector<Action> parse_actions(const std::string& text) {
  std::vector<Action> out;
  std::string thought;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.rfind("THOUGHT:", 0) == 0) {
      if (!thought.empty()) thought += ' ';
      thought += detail::trim(line.substr(8));
      continue;
    }
    if (line.rfind("ACTION:", 0) != 0)
      throw MalformedAction("line " + std::to_string(line_no) + " is neither THOUGHT nor ACTION: '" +
                            std::string(line) + "'");
    const std::string_view body = detail::trim(line.substr(7));
    std::size_t end = 0;
    while (end < body.size() && (std::islower(static_cast<unsigned char>(body[end])) || body[end] == '_')) ++end;
    if (end == 0 || (end < body.size() && body[end] != ' '))
      throw MalformedAction("bad action name on line " + std::to_string(line_no) + ": '" +
                            std::string(body) + "'");
    Action a;
    a.name = std::string(body.substr(0, end));
    a.args = std::string(detail::trim(body.substr(end)));
    a.thought = std::move(thought);
    a.line = std::string(line);
    thought.clear();
    out.push_back(std::move(a));
  }
  return out;
}

inline Action parse_single_action(const std::string& text) {
  auto actions = parse_actions(text);
  if (actions.size() != 1)
    throw MalformedAction("expected exactly one ACTION, got " + std::to_string(actions.size()));
  return actions.front();
}

// key=value tokens separated by spaces; values may be double-quoted.
inline std::map<std::string, std::string> parse_kv(std::string_view args) {
  std::map<std::string, std::string> out;
  std::size_t i = 0;
  auto skip = [&] { while (i < args.size() && args[i] == ' ') ++i; };
  skip();
  while (i < args.size()) {
    const std::size_t eq = args.find('=', i);
    if (eq == std::string_view::npos) throw MalformedAction("expected key=value in '" + std::string(args) + "'");
    const std::string key(args.substr(i, eq - i));
    if (key.empty() || key.find(' ') != std::string::npos)
      throw MalformedAction("bad argument name in '" + std::string(args) + "'");
    i = eq + 1;
    std::string value;
    if (i < args.size() && args[i] == '"') {
      const std::size_t close = args.find('"', i + 1);
      if (close == std::string_view::npos) throw MalformedAction("unterminated quote in '" + std::string(args) + "'");
      value = std::string(args.substr(i + 1, close - i - 1));
      i = close + 1;
      if (i < args.size() && args[i] != ' ') throw MalformedAction("junk after quoted value");
    } else {
      const std::size_t sp = std::min(args.find(' ', i), args.size());
      value = std::string(args.substr(i, sp - i));
      i = sp;
    }
    if (!out.emplace(key, value).second) throw MalformedAction("duplicate argument '" + key + "'");
    skip();
  }
  return out;
}

inline double parse_number(std::string_view s) {
  s = detail::trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw MalformedAction("not a number: '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s) {
  s = detail::trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw MalformedAction("not an integer: '" + std::string(s) + "'");
  return v;
}

// Six comma-separated numbers, one per amplifier.
inline std::array<double, kAmplifierCount> parse_six(std::string_view args) {
  std::array<double, kAmplifierCount> v{};
  std::size_t start = 0;
  for (std::size_t k = 0; k < kAmplifierCount; ++k) {
    const std::size_t comma = args.find(',', start);
    if ((comma == std::string_view::npos) != (k + 1 == kAmplifierCount))
      throw MalformedAction("expected six comma-separated values, got '" + std::string(args) + "'");
    v[k] = parse_number(args.substr(start, comma == std::string_view::npos ? args.size() - start : comma - start));
    start = comma + 1;
  }
  return v;
}

inline std::string format_six(const std::array<double, kAmplifierCount>& v) { return GainConfig::join(v); }

}  // namespace adon::agent

#endif  // ADON_AGENT_GRAMMAR_HPP_
