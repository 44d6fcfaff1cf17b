#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tc {

/// A calendar month.
struct Period {
  int year = 2000;
  int month = 1;  // 1..12

  /// Months since year 0, January.
  [[nodiscard]] long index() const { return static_cast<long>(year) * 12 + (month - 1); }
  [[nodiscard]] static Period from_index(long idx);

  [[nodiscard]] Period operator+(long months) const { return from_index(index() + months); }
  [[nodiscard]] Period operator-(long months) const { return from_index(index() - months); }
  [[nodiscard]] long operator-(const Period& other) const { return index() - other.index(); }

  friend bool operator==(const Period&, const Period&) = default;
  friend auto operator<=>(const Period& a, const Period& b) { return a.index() <=> b.index(); }

  /// Parses "YYYY-MM". Throws DataError.
  static Period parse(std::string_view text);
  [[nodiscard]] std::string str() const;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Monthly series. Missing values (NaN) are only allowed as leading or
/// trailing runs.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(Period start, std::vector<double> values);

  [[nodiscard]] Period start() const { return start_; }
  [[nodiscard]] Period end() const { return start_ + static_cast<long>(values_.size()) - 1; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] Period period(std::size_t i) const { return start_ + static_cast<long>(i); }

  /// Position of a period in the series, or nullopt when out of span.
  [[nodiscard]] std::optional<std::size_t> position(Period p) const;

  /// Keeps the periods [start(), last] (inclusive).
  [[nodiscard]] TimeSeries truncate(Period last) const;
  /// Sub-series of the periods [first, last].
  [[nodiscard]] TimeSeries window(Period first, Period last) const;

  [[nodiscard]] bool has_missing() const;

  friend bool operator==(const TimeSeries& a, const TimeSeries& b);

 private:
  Period start_{};
  std::vector<double> values_;
};

/// Point estimates with the identity of the estimator used at each period.
struct TrendEstimate {
  Period start{};
  std::vector<double> values;
  std::vector<std::string> filter_id;

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] Period period(std::size_t i) const { return start + static_cast<long>(i); }
};

}  // namespace tc
