#pragma once

#include <iosfwd>
#include <string>

#include "trendcycle/series.hpp"

namespace tc {

struct CsvOptions {
  std::string date_column = "date";
  std::string value_column = "value";
  char separator = ',';
  bool decimal_comma = false;
};

/// Reads a monthly series from a CSV with a header row. Errors (DataError)
/// name the source and line: bad dates, non-numeric values, gaps, duplicates.
TimeSeries read_series_csv(std::istream& in, const CsvOptions& opt, const std::string& source = "<input>");
TimeSeries ingest_csv(const std::string& path, const CsvOptions& opt = {});

/// "date,value" rows at full precision; read_series_csv gives the series back.
void write_series_csv(std::ostream& out, const TimeSeries& series, const CsvOptions& opt = {});

}  // namespace tc
