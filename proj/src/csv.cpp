#include "trendcycle/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "trendcycle/errors.hpp"

namespace tc::csv {

std::string format(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}
}  // namespace

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  bool quoted = false;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i < line.size() && line[i] == '"') quoted = !quoted;
    if (i == line.size() || (line[i] == sep && !quoted)) {
      out.emplace_back(trim(line.substr(begin, i - begin)));
      begin = i + 1;
    }
  }
  return out;
}

double parse_number(std::string_view text, bool decimal_comma) {
  std::string s(trim(text));
  if (decimal_comma) {
    for (char& c : s)
      if (c == ',') c = '.';
  }
  if (s == "NA" || s == "NaN" || s == "nan" || s.empty()) return std::nan("");
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw DataError("non-numeric value '" + s + "'");
  return v;
}

}  // namespace tc::csv
