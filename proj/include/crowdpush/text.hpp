// Copyright 2026 The crowdpush Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "crowdpush/error.hpp"

namespace crowdpush::text {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Splits on single commas. Fields are trimmed; no quoting.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

/// Finite doubles only.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

/// Shortest representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw ValidationError("cannot format number");
  return std::string(buf, ptr);
}

inline std::string zero_pad(std::int64_t value, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << value;
  return os.str();
}

/// Header-indexed CSV table. Blank lines are skipped; the first
/// non-blank line is the header.
class CsvTable {
 public:
  static CsvTable parse(std::istream& in, const std::string& source) {
    CsvTable table;
    table.source_ = source;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      auto fields = split_csv(line);
      if (!have_header) {
        for (std::size_t i = 0; i < fields.size(); ++i) table.columns_[fields[i]] = i;
        table.header_ = std::move(fields);
        have_header = true;
        continue;
      }
      if (fields.size() != table.header_.size()) {
        throw ParseError(line_no, source + ": expected " + std::to_string(table.header_.size()) +
                                      " fields, got " + std::to_string(fields.size()));
      }
      table.rows_.push_back(std::move(fields));
      table.lines_.push_back(line_no);
    }
    if (!have_header) throw ValidationError(source + ": missing header row");
    return table;
  }

  static CsvTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse(in, path.string());
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  bool has(const std::string& column) const { return columns_.count(column) != 0; }

  std::size_t column(const std::string& name) const {
    const auto it = columns_.find(name);
    if (it == columns_.end()) throw ValidationError(source_ + ": missing column '" + name + "'");
    return it->second;
  }

  const std::string& at(std::size_t row, const std::string& name) const {
    return rows_.at(row).at(column(name));
  }
  const std::vector<std::string>& row(std::size_t r) const { return rows_.at(r); }
  std::size_t line_of(std::size_t row) const { return lines_.at(row); }

  template <typename Int>
  Int int_at(std::size_t row, const std::string& name) const {
    const auto v = parse_int<Int>(at(row, name));
    if (!v) throw ParseError(line_of(row), source_ + ": column '" + name + "' is not an integer");
    return *v;
  }

  double double_at(std::size_t row, const std::string& name) const {
    const auto v = parse_double(at(row, name));
    if (!v) throw ParseError(line_of(row), source_ + ": column '" + name + "' is not a number");
    return *v;
  }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::map<std::string, std::size_t> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace crowdpush::text
