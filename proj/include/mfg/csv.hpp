#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mfg::csv {

/// Shortest round-trip decimal representation, identical on every run.
inline std::string num(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string num(std::size_t x) { return std::to_string(x); }

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("csv: cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }

  Writer& header(const std::vector<std::string>& cols) {
    row_strings(cols);
    return *this;
  }

  template <class... Cells>
  Writer& row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
    return *this;
  }

  Writer& row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    return *this;
  }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(std::size_t x) { return num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::ofstream out_;
};

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace mfg::csv
