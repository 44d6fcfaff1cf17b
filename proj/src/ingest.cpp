#include "trendcycle/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "trendcycle/csv.hpp"
#include "trendcycle/errors.hpp"

namespace tc {

namespace {

std::size_t find_column(const std::vector<std::string>& header, const std::string& name, const std::string& where) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError(where + ": no column named '" + name + "' in the header");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

TimeSeries read_series_csv(std::istream& in, const CsvOptions& opt, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = csv::split(line, opt.separator);
    break;
  }
  if (header.empty()) throw DataError(source + ": empty file");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  const std::size_t dc = find_column(header, opt.date_column, source + ":" + std::to_string(lineno));
  const std::size_t vc = find_column(header, opt.value_column, source + ":" + std::to_string(lineno));

  std::optional<Period> start;
  Period prev{};
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto cells = csv::split(line, opt.separator);
    if (cells.size() <= std::max(dc, vc))
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    Period p;
    double v;
    try {
      p = Period::parse(cells[dc]);
      v = csv::parse_number(cells[vc], opt.decimal_comma);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (start) {
      if (p <= prev) throw DataError(where + ": period " + p.str() + " does not follow " + prev.str());
      if (p != prev + 1) throw DataError(where + ": gap in the series, " + (prev + 1).str() + " is missing");
    } else {
      start = p;
    }
    prev = p;
    values.push_back(v);
  }
  if (!start) throw DataError(source + ": no observations");
  try {
    return TimeSeries(*start, std::move(values));
  } catch (const std::exception& e) {
    throw DataError(source + ": " + e.what());
  }
}

TimeSeries ingest_csv(const std::string& path, const CsvOptions& opt) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return read_series_csv(in, opt, path);
}

void write_series_csv(std::ostream& out, const TimeSeries& series, const CsvOptions& opt) {
  out << opt.date_column << opt.separator << opt.value_column << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::string v = csv::format(series[i]);
    if (opt.decimal_comma) std::replace(v.begin(), v.end(), '.', ',');
    out << series.period(i).str() << opt.separator << v << '\n';
  }
}

}  // namespace tc
