#include "trendcycle/evaluation.hpp"

#include <cmath>
#include <json.hpp>
#include <ostream>

#include "trendcycle/csv.hpp"
#include "trendcycle/errors.hpp"

namespace tc {

std::string_view to_string(ShockKind k) { return k == ShockKind::AO ? "ao" : "ls"; }

ShockKind parse_shock_kind(std::string_view text) {
  if (text == "ao") return ShockKind::AO;
  if (text == "ls") return ShockKind::LS;
  throw InvalidArgument("unknown shock kind '" + std::string(text) + "' (expected ao or ls)");
}

std::string_view to_string(ShockScale s) {
  switch (s) {
    case ShockScale::Relative: return "relative";
    case ShockScale::Multiplicative: return "multiplicative";
    case ShockScale::Absolute: return "absolute";
  }
  return "?";
}

ShockScale parse_shock_scale(std::string_view text) {
  for (auto s : {ShockScale::Relative, ShockScale::Multiplicative, ShockScale::Absolute})
    if (text == to_string(s)) return s;
  throw InvalidArgument("unknown shock scale '" + std::string(text) + "'");
}

double ScenarioSpec::trend_at(Period p) const {
  switch (trend_degree) {
    case 0: return level;
    case 1: return level + slope * static_cast<double>(p - start_date);
    default: {
      const double d = static_cast<double>(p - vertex);
      return level + curvature * d * d;
    }
  }
}

void ScenarioSpec::validate() const {
  if (trend_degree < 0 || trend_degree > 2) throw InvalidArgument("trend degree must be 0, 1 or 2");
  if (length == 0) throw InvalidArgument("scenario length must be positive");
  const Period end = start_date + static_cast<long>(length) - 1;
  if (shock_date < start_date || shock_date > end)
    throw InvalidArgument("shock date " + shock_date.str() + " outside " + start_date.str() + ".." + end.str());
  if (!std::isfinite(level) || !std::isfinite(slope) || !std::isfinite(curvature) || !std::isfinite(shock_size))
    throw InvalidArgument("scenario coefficients must be finite");
}

TimeSeries scenario_trend(const ScenarioSpec& spec) {
  spec.validate();
  std::vector<double> v(spec.length);
  for (std::size_t i = 0; i < spec.length; ++i) v[i] = spec.trend_at(spec.start_date + static_cast<long>(i));
  return TimeSeries(spec.start_date, std::move(v));
}

TimeSeries simulate(const ScenarioSpec& spec) {
  TimeSeries trend = scenario_trend(spec);
  std::vector<double> v = trend.values();
  const double base = spec.trend_at(spec.shock_date);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Period p = spec.start_date + static_cast<long>(i);
    const bool hit = spec.shock_kind == ShockKind::AO ? p == spec.shock_date : p >= spec.shock_date;
    if (!hit) continue;
    switch (spec.shock_scale) {
      case ShockScale::Relative: v[i] += spec.shock_size * base; break;
      case ShockScale::Multiplicative: v[i] *= 1.0 + spec.shock_size; break;
      case ShockScale::Absolute: v[i] += spec.shock_size; break;
    }
  }
  return TimeSeries(spec.start_date, std::move(v));
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json j;
  j["trend_degree"] = spec.trend_degree;
  j["shock_kind"] = std::string(to_string(spec.shock_kind));
  j["shock_size"] = spec.shock_size;
  j["shock_scale"] = std::string(to_string(spec.shock_scale));
  j["shock_date"] = spec.shock_date.str();
  j["start_date"] = spec.start_date.str();
  j["length"] = spec.length;
  j["level"] = spec.level;
  j["slope"] = spec.slope;
  j["curvature"] = spec.curvature;
  j["vertex"] = spec.vertex.str();
  return j.dump(2);
}

ScenarioSpec scenario_from_json(std::string_view text) {
  ScenarioSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("scenario JSON must be an object");
    for (const auto& [key, val] : j.items()) {
      if (key == "trend_degree") spec.trend_degree = val.get<int>();
      else if (key == "shock_kind") spec.shock_kind = parse_shock_kind(val.get<std::string>());
      else if (key == "shock_size") spec.shock_size = val.get<double>();
      else if (key == "shock_scale") spec.shock_scale = parse_shock_scale(val.get<std::string>());
      else if (key == "shock_date") spec.shock_date = Period::parse(val.get<std::string>());
      else if (key == "start_date") spec.start_date = Period::parse(val.get<std::string>());
      else if (key == "length") spec.length = val.get<std::size_t>();
      else if (key == "level") spec.level = val.get<double>();
      else if (key == "slope") spec.slope = val.get<double>();
      else if (key == "curvature") spec.curvature = val.get<double>();
      else if (key == "vertex") spec.vertex = Period::parse(val.get<std::string>());
      else throw ConfigError("unknown scenario field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
  return spec;
}

double VintageMatrix::cell(Period vintage, Period t) const {
  for (std::size_t k = 0; k < publication.size(); ++k) {
    if (publication[k] != vintage) continue;
    const long i = t - series_start;
    if (i < 0 || i >= static_cast<long>(rows[k].size())) return kMissing;
    return rows[k][static_cast<std::size_t>(i)];
  }
  return kMissing;
}

VintageMatrix vintages(const TimeSeries& series, const Estimator& estimator, Period first_vintage) {
  if (first_vintage < series.start() || first_vintage > series.end())
    throw InvalidArgument("first vintage " + first_vintage.str() + " outside the series span");
  VintageMatrix vm;
  vm.series_start = series.start();
  for (Period v = first_vintage; v <= series.end(); v = v + 1) {
    const std::size_t len = static_cast<std::size_t>(v - series.start()) + 1;
    std::vector<double> row(len, kMissing);
    try {
      const TrendEstimate est = estimator(series.truncate(v));
      for (std::size_t i = 0; i < len && i < est.size(); ++i) row[i] = est.values[i];
    } catch (const std::exception& e) {
      vm.diagnostics.push_back("vintage " + v.str() + ": " + e.what());
    }
    vm.publication.push_back(v);
    vm.rows.push_back(std::move(row));
  }
  return vm;
}

RevisionMetrics revision_metrics(const VintageMatrix& vm, int horizon) {
  if (horizon < 0) throw InvalidArgument("revision horizon must be non-negative");
  RevisionMetrics out;
  if (vm.size() == 0) return out;
  const auto& fin = vm.final_row();
  double sum = 0.0;
  for (std::size_t i = 0; i < fin.size(); ++i) {
    const Period t = vm.series_start + static_cast<long>(i);
    if (t < vm.publication.front()) continue;
    std::vector<double> rev(static_cast<std::size_t>(horizon) + 1, kMissing);
    const std::size_t k0 = static_cast<std::size_t>(t - vm.publication.front());
    for (int q = 0; q <= horizon; ++q) {
      const std::size_t k = k0 + static_cast<std::size_t>(q);
      if (k >= vm.size()) break;
      const double e = vm.rows[k][i];
      if (is_missing(e) || is_missing(fin[i])) continue;
      const double r = e - fin[i];
      rev[static_cast<std::size_t>(q)] = r;
      sum += std::abs(r);
      out.max_abs = std::max(out.max_abs, std::abs(r));
      ++out.count;
    }
    out.periods.push_back(t);
    out.revisions.push_back(std::move(rev));
  }
  out.mean_abs = out.count ? sum / static_cast<double>(out.count) : 0.0;
  return out;
}

std::string_view to_string(TurningKind k) { return k == TurningKind::Upturn ? "upturn" : "downturn"; }

std::vector<TurningPoint> turning_points(const TrendEstimate& tc) {
  std::vector<TurningPoint> out;
  const auto& x = tc.values;
  for (std::size_t t = 3; t + 1 < x.size(); ++t) {
    bool any_missing = false;
    for (std::size_t k = t - 3; k <= t + 1; ++k) any_missing = any_missing || is_missing(x[k]);
    if (any_missing) continue;
    const bool up = x[t - 3] >= x[t - 2] && x[t - 2] >= x[t - 1] && x[t - 1] < x[t] && x[t] <= x[t + 1];
    const bool down = x[t - 3] <= x[t - 2] && x[t - 2] <= x[t - 1] && x[t - 1] > x[t] && x[t] >= x[t + 1];
    if (up || down)
      out.push_back(TurningPoint{tc.period(t - 1), tc.period(t), up ? TurningKind::Upturn : TurningKind::Downturn});
  }
  return out;
}

SegmentSide parse_segment_side(std::string_view text) {
  if (text == "left") return SegmentSide::Left;
  if (text == "right") return SegmentSide::Right;
  if (text == "both") return SegmentSide::Both;
  throw InvalidArgument("unknown segment side '" + std::string(text) + "' (expected left, right or both)");
}

TrendEstimate segmented_estimate(const TimeSeries& series, Period break_date, const FilterSet& fs,
                                 SegmentSide side) {
  TrendEstimate out = apply_filter_set(series, fs);
  if (break_date > series.end()) return out;
  if (break_date <= series.start()) throw InvalidArgument("break date must fall after the first period");
  const std::size_t seg_len = static_cast<std::size_t>(2 * fs.h + 1);
  const std::size_t cut = static_cast<std::size_t>(break_date - series.start());

  auto splice = [&](Period first, Period last, bool cut_at_end) {
    const TimeSeries seg = series.window(first, last);
    if (seg.size() < seg_len)
      throw InvalidArgument("segment " + first.str() + ".." + last.str() + " shorter than " +
                            std::to_string(seg_len) + " periods");
    TrendEstimate est = apply_filter_set(seg, fs);
    const std::size_t off = static_cast<std::size_t>(first - series.start());
    for (std::size_t i = 0; i < seg.size(); ++i) {
      out.values[off + i] = est.values[i];
      out.filter_id[off + i] = est.filter_id[i];
      const bool near_cut = cut_at_end ? seg.size() - 1 - i < static_cast<std::size_t>(fs.h)
                                       : i < static_cast<std::size_t>(fs.h);
      if (near_cut) out.filter_id[off + i] += ":cut";
    }
  };
  if (side == SegmentSide::Left || side == SegmentSide::Both) splice(break_date, series.end(), false);
  if (side == SegmentSide::Right || side == SegmentSide::Both) splice(series.start(), series.period(cut - 1), true);
  return out;
}

void write_vintages_csv(std::ostream& out, const VintageMatrix& vm) {
  out << "publication_date,period,estimate\n";
  for (std::size_t k = 0; k < vm.size(); ++k)
    for (std::size_t i = 0; i < vm.rows[k].size(); ++i)
      out << vm.publication[k].str() << ',' << (vm.series_start + static_cast<long>(i)).str() << ','
          << csv::format(vm.rows[k][i]) << '\n';
}

void write_turning_points_csv(std::ostream& out, const std::vector<TurningPoint>& tps) {
  out << "date,signal,kind\n";
  for (const auto& tp : tps) out << tp.date.str() << ',' << tp.signal.str() << ',' << to_string(tp.kind) << '\n';
}

}  // namespace tc
