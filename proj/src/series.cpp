#include "trendcycle/series.hpp"

#include <charconv>
#include <cstdio>

#include "trendcycle/errors.hpp"

namespace tc {

Period Period::from_index(long idx) {
  long year = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
  long month = idx - year * 12;
  return Period{static_cast<int>(year), static_cast<int>(month) + 1};
}

Period Period::parse(std::string_view text) {
  auto bad = [&] { return DataError("invalid period '" + std::string(text) + "', expected YYYY-MM"); };
  if (text.size() < 6) throw bad();
  auto dash = text.find('-');
  if (dash == std::string_view::npos || dash == 0) throw bad();
  int year = 0;
  int month = 0;
  auto ys = text.substr(0, dash);
  auto ms = text.substr(dash + 1);
  // Accept "YYYY-MM-DD" by ignoring the day part.
  if (auto d2 = ms.find('-'); d2 != std::string_view::npos) ms = ms.substr(0, d2);
  auto r1 = std::from_chars(ys.data(), ys.data() + ys.size(), year);
  auto r2 = std::from_chars(ms.data(), ms.data() + ms.size(), month);
  if (r1.ec != std::errc{} || r1.ptr != ys.data() + ys.size()) throw bad();
  if (r2.ec != std::errc{} || r2.ptr != ms.data() + ms.size()) throw bad();
  if (month < 1 || month > 12) throw bad();
  return Period{year, month};
}

std::string Period::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

TimeSeries::TimeSeries(Period start, std::vector<double> values)
    : start_(start), values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("time series must contain at least one observation");
  // Missing markers allowed only in leading/trailing runs.
  std::size_t first = 0;
  while (first < values_.size() && is_missing(values_[first])) ++first;
  std::size_t last = values_.size();
  while (last > first && is_missing(values_[last - 1])) --last;
  for (std::size_t i = first; i < last; ++i) {
    if (is_missing(values_[i]))
      throw DataError("missing value inside the series at " + period(i).str());
  }
}

std::optional<std::size_t> TimeSeries::position(Period p) const {
  long off = p - start_;
  if (off < 0 || off >= static_cast<long>(values_.size())) return std::nullopt;
  return static_cast<std::size_t>(off);
}

TimeSeries TimeSeries::truncate(Period last) const { return window(start_, last); }

TimeSeries TimeSeries::window(Period first, Period last) const {
  auto a = position(first);
  auto b = position(last);
  if (!a || !b || *b < *a)
    throw InvalidArgument("window " + first.str() + ".." + last.str() + " outside series span");
  return TimeSeries(first, std::vector<double>(values_.begin() + static_cast<long>(*a),
                                               values_.begin() + static_cast<long>(*b) + 1));
}

bool TimeSeries::has_missing() const {
  for (double v : values_)
    if (is_missing(v)) return true;
  return false;
}

bool operator==(const TimeSeries& a, const TimeSeries& b) {
  if (a.start_ != b.start_ || a.values_.size() != b.values_.size()) return false;
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    double x = a.values_[i];
    double y = b.values_[i];
    if (is_missing(x) != is_missing(y)) return false;
    if (!is_missing(x) && x != y) return false;
  }
  return true;
}

}  // namespace tc
