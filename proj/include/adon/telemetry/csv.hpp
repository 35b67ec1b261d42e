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

#ifndef ADON_TELEMETRY_CSV_HPP_
#define ADON_TELEMETRY_CSV_HPP_

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adon/core/error.hpp"
#include "adon/core/gain_config.hpp"
#include "adon/telemetry/analytics.hpp"
#include "adon/telemetry/record.hpp"

namespace adon::telemetry {

// Column order:
//   tick, epoch, gain_0..5, tilt_0..5, active, real,
//   amp_in_0..5, amp_out_0..5, osc_0..3, rx_00..rx_NN, q_00..q_NN
// `active` and `real` are one character per slot ('1'/'0'). Measurements
// carry six decimals; an empty cell means "not measured".
inline std::string csv_header(int slots = 30) {
  std::string h = "tick,epoch";
  auto add = [&](const std::string& name) { h += "," + name; };
  for (std::size_t i = 0; i < kAmplifierCount; ++i) add("gain_" + std::to_string(i));
  for (std::size_t i = 0; i < kAmplifierCount; ++i) add("tilt_" + std::to_string(i));
  add("active");
  add("real");
  for (std::size_t i = 0; i < kAmplifierCount; ++i) add("amp_in_" + std::to_string(i));
  for (std::size_t i = 0; i < kAmplifierCount; ++i) add("amp_out_" + std::to_string(i));
  for (std::size_t i = 0; i < kSpanCount; ++i) add("osc_" + std::to_string(i));
  char buf[16];
  for (int i = 0; i < slots; ++i) {
    std::snprintf(buf, sizeof buf, "rx_%02d", i);
    add(buf);
  }
  for (int i = 0; i < slots; ++i) {
    std::snprintf(buf, sizeof buf, "q_%02d", i);
    add(buf);
  }
  return h;
}

namespace detail {

inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

inline std::string bits(const std::vector<bool>& v) {
  std::string s;
  for (bool b : v) s += b ? '1' : '0';
  return s;
}

}  // namespace detail

inline std::string to_csv_row(const TelemetryRecord& r) {
  std::string row = std::to_string(r.tick) + "," + std::to_string(r.epoch);
  for (double g : r.config.gains_db) row += "," + format_double(g);
  for (double t : r.config.tilts_db) row += "," + format_double(t);
  row += "," + detail::bits(r.active) + "," + detail::bits(r.real);
  for (double p : r.amp_in_dbm) row += "," + detail::fixed6(p);
  for (double p : r.amp_out_dbm) row += "," + detail::fixed6(p);
  for (bool b : r.osc_alive) row += b ? ",1" : ",0";
  for (const auto& v : r.rx_dbm) row += "," + (v ? detail::fixed6(*v) : std::string());
  for (const auto& v : r.q_db) row += "," + (v ? detail::fixed6(*v) : std::string());
  return row;
}

inline void write_csv(std::ostream& os, const std::vector<TelemetryRecord>& records,
                      int slots = 30) {
  os << csv_header(slots) << '\n';
  for (const auto& r : records) os << to_csv_row(r) << '\n';
}

namespace detail {

class CsvCursor {
 public:
  CsvCursor(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  std::string_view next() {
    if (pos_ > line_.size()) throw ParseError("too few columns", line_no_, line_.size() + 1);
    const std::size_t start = pos_;
    std::size_t end = line_.find(',', pos_);
    if (end == std::string_view::npos) end = line_.size();
    pos_ = end + 1;
    column_ = start + 1;
    return line_.substr(start, end - start);
  }

  bool done() const { return pos_ > line_.size(); }

  double number(std::string_view cell) const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty())
      throw ParseError("expected a number, got '" + std::string(cell) + "'", line_no_, column_);
    return v;
  }

  long long integer(std::string_view cell) const {
    long long v = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty())
      throw ParseError("expected an integer, got '" + std::string(cell) + "'", line_no_, column_);
    return v;
  }

  std::vector<bool> bitstring(std::string_view cell) const {
    std::vector<bool> out;
    for (char c : cell) {
      if (c != '0' && c != '1') throw ParseError("expected a 0/1 string", line_no_, column_);
      out.push_back(c == '1');
    }
    return out;
  }

  std::optional<double> optional_number(std::string_view cell) const {
    if (cell.empty()) return std::nullopt;
    return number(cell);
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
  std::size_t column_ = 1;
};

}  // namespace detail

inline std::vector<TelemetryRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  const std::string header = line;
  const int slots = [&] {
    int n = 0;
    for (std::size_t p = header.find(",rx_"); p != std::string::npos; p = header.find(",rx_", p + 1)) ++n;
    return n;
  }();
  if (header != csv_header(slots)) throw ParseError("unexpected telemetry header", 1, 1);

  std::vector<TelemetryRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    detail::CsvCursor c(line, line_no);
    TelemetryRecord r;
    r.tick = static_cast<int>(c.integer(c.next()));
    r.epoch = static_cast<std::uint64_t>(c.integer(c.next()));
    for (auto& g : r.config.gains_db) g = c.number(c.next());
    for (auto& t : r.config.tilts_db) t = c.number(c.next());
    r.active = c.bitstring(c.next());
    r.real = c.bitstring(c.next());
    if (static_cast<int>(r.active.size()) != slots || static_cast<int>(r.real.size()) != slots)
      throw ParseError("occupancy string has the wrong length", line_no, 1);
    for (auto& p : r.amp_in_dbm) p = c.number(c.next());
    for (auto& p : r.amp_out_dbm) p = c.number(c.next());
    for (std::size_t s = 0; s < kSpanCount; ++s) r.osc_alive[s] = c.integer(c.next()) != 0;
    r.rx_dbm.resize(slots);
    r.q_db.resize(slots);
    for (auto& v : r.rx_dbm) v = c.optional_number(c.next());
    for (auto& v : r.q_db) v = c.optional_number(c.next());
    if (!c.done()) throw ParseError("too many columns", line_no, line.size());
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_alarms_jsonl(std::ostream& os, const std::vector<Alarm>& alarms) {
  for (const auto& a : alarms) os << a.to_json().dump() << '\n';
}

}  // namespace adon::telemetry

#endif  // ADON_TELEMETRY_CSV_HPP_
