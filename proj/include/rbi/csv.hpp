#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rbi::csv {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class Writer {
 public:
  explicit Writer(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  Writer& field(std::string_view s) { return push(quote(s)); }
  Writer& field(double x) { return push(format_double(x)); }
  Writer& field(std::size_t n) { return push(std::to_string(n)); }
  Writer& empty() { return push(""); }

  void end_row() {
    if (current_ != columns_) throw std::logic_error("csv::Writer: row has the wrong number of fields");
    out_ << '\n';
    current_ = 0;
  }

  std::string str() const { return out_.str(); }

 private:
  void row_strings(const std::vector<std::string>& v) {
    for (const auto& s : v) field(s);
    end_row();
  }

  Writer& push(const std::string& s) {
    if (current_ == columns_) throw std::logic_error("csv::Writer: too many fields");
    if (current_ > 0) out_ << ',';
    out_ << s;
    ++current_;
    return *this;
  }

  std::size_t columns_;
  std::size_t current_ = 0;
  std::ostringstream out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error("csv: missing column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_line(line));
    if (t.rows.back().size() != t.header.size()) throw std::runtime_error("csv: ragged row in " + path);
  }
  return t;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("csv: bad number '" + s + "'");
  return x;
}

}  // namespace rbi::csv
