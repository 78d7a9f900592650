// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "tdgemm/error.hpp"

namespace tdgemm::csv {

// Shortest text that reads back to the same double; "inf"/"-inf"/"nan" for
// non-finite values.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("malformed number '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("malformed integer '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// A versioned table file: "# key value" comment lines, one header line,
// then data rows.
struct Document {
  std::vector<std::pair<std::string, std::string>> meta;
  std::string header;
  std::vector<std::string> rows;

  const std::string* meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return &v;
    return nullptr;
  }
};

inline Document read_document(const std::filesystem::path& path, std::string_view expected_header, int version) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  Document doc;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string_view rest = std::string_view(line).substr(1);
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      const std::size_t sp = rest.find(' ');
      doc.meta.emplace_back(std::string(rest.substr(0, sp)),
                            sp == std::string_view::npos ? std::string() : std::string(rest.substr(sp + 1)));
      continue;
    }
    if (doc.header.empty()) {
      doc.header = line;
      continue;
    }
    doc.rows.push_back(line);
  }
  const std::string* v = doc.meta_value("version");
  if (v == nullptr) throw FormatError(path.string() + ": missing '# version' line");
  if (parse_int<int>(*v) != version)
    throw VersionError(path.string() + ": format version " + *v + ", expected " + std::to_string(version));
  if (doc.header != expected_header) throw FormatError(path.string() + ": unexpected header '" + doc.header + "'");
  return doc;
}

inline void write_document(const std::filesystem::path& path, const Document& doc, int version) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "# version " << version << '\n';
  for (const auto& [k, v] : doc.meta) out << "# " << k << ' ' << v << '\n';
  out << doc.header << '\n';
  for (const auto& r : doc.rows) out << r << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace tdgemm::csv
