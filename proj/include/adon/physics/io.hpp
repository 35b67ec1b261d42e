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

#ifndef ADON_PHYSICS_IO_HPP_
#define ADON_PHYSICS_IO_HPP_

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "adon/core/error.hpp"
#include "adon/physics/link.hpp"
#include "adon/physics/propagation.hpp"

namespace adon::physics {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view text, std::size_t line, std::size_t col) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("expected a number, got '" + std::string(text) + "'", line, col);
  return v;
}

}  // namespace detail

// Plain-text link description, one "key = value" per line, '#' comments.
//
//   launch_power_dbm = -18
//   grid.spacing_hz = 75e9
//   span.*.attenuation_db_per_km = 0.2     (all spans)
//   span.2.length_km = 95
//   amp.0.noise_figure_db = 5.5
//
// Unspecified keys keep the nominal defaults.
inline LinkTopology parse_link_config(std::string_view text) {
  LinkTopology link;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, 1);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view raw = detail::trim(line.substr(eq + 1));
    const std::size_t vcol = static_cast<std::size_t>(raw.data() - line.data()) + 1;
    const double v = detail::parse_number(raw, line_no, vcol);

    auto indexed = [&](std::string_view prefix, std::size_t count, auto&& assign) -> bool {
      if (key.rfind(prefix, 0) != 0) return false;
      const std::string rest = key.substr(prefix.size());
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw ParseError("missing field in '" + key + "'", line_no, 1);
      const std::string idx = rest.substr(0, dot);
      const std::string field = rest.substr(dot + 1);
      if (idx == "*") {
        for (std::size_t i = 0; i < count; ++i) assign(i, field);
        return true;
      }
      std::size_t i = 0;
      auto r = std::from_chars(idx.data(), idx.data() + idx.size(), i);
      if (r.ec != std::errc() || r.ptr != idx.data() + idx.size() || i >= count)
        throw ParseError("bad index in '" + key + "'", line_no, prefix.size() + 1);
      assign(i, field);
      return true;
    };
    auto unknown = [&]() { throw ParseError("unknown key '" + key + "'", line_no, 1); };

    if (key == "launch_power_dbm") link.launch_power_dbm = v;
    else if (key == "q_offset_db") link.q_offset_db = v;
    else if (key == "gsnr_cap_db") link.gsnr_cap_db = v;
    else if (key == "constants.planck") link.constants.planck = v;
    else if (key == "constants.reference_bandwidth_hz") link.constants.reference_bandwidth_hz = v;
    else if (key == "grid.spacing_hz") link.grid.spacing_hz = v;
    else if (key == "grid.anchor_hz") link.grid.anchor_hz = v;
    else if (key == "grid.channel_bandwidth_hz") link.grid.channel_bandwidth_hz = v;
    else if (indexed("span.", link.spans.size(), [&](std::size_t i, const std::string& f) {
               Span& s = link.spans[i];
               if (f == "length_km") s.length_km = v;
               else if (f == "attenuation_db_per_km") s.attenuation_db_per_km = v;
               else if (f == "extra_loss_db") s.extra_loss_db = v;
               else if (f == "beta2_ps2_per_km") s.beta2_ps2_per_km = v;
               else if (f == "gamma_per_w_km") s.gamma_per_w_km = v;
               else unknown();
             })) {
    } else if (indexed("amp.", link.amplifiers.size(), [&](std::size_t i, const std::string& f) {
                 Amplifier& a = link.amplifiers[i];
                 if (f == "gain_db") a.gain_db = v;
                 else if (f == "tilt_db") a.tilt_db = v;
                 else if (f == "noise_figure_db") a.noise_figure_db = v;
                 else unknown();
               })) {
    } else {
      unknown();
    }
    if (eol == text.size()) break;
  }
  link.validate();
  return link;
}

inline LinkTopology load_link_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open link config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_link_config(ss.str());
}

inline nlohmann::json to_json(const LinkSnapshot& snap) {
  using nlohmann::json;
  json channels = json::array();
  for (const auto& c : snap.channels) {
    json j;
    j["slot"] = c.slot;
    j["is_real"] = c.is_real;
    j["received_power_w"] = c.received_power_w;
    j["ase_power_w"] = c.ase_power_w;
    j["nli_power_w"] = c.nli_power_w;
    j["gsnr_db"] = c.gsnr_db ? json(*c.gsnr_db) : json(nullptr);
    j["q_factor_db"] = c.q_factor_db ? json(*c.q_factor_db) : json(nullptr);
    channels.push_back(j);
  }
  json out;
  out["channels"] = channels;
  out["amp_input_power_w"] = snap.amp_input_power_w;
  out["amp_output_power_w"] = snap.amp_output_power_w;
  out["span_cut"] = snap.span_cut;
  return out;
}

}  // namespace adon::physics

#endif  // ADON_PHYSICS_IO_HPP_
