#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trendcycle/filters.hpp"
#include "trendcycle/series.hpp"

namespace tc {

enum class ShockKind { AO, LS };

/// How shock_size turns into a shift.
enum class ShockScale {
  Relative,        // size * trend(shock_date), added (AO: one period, LS: from shock_date on)
  Multiplicative,  // affected periods multiplied by (1 + size)
  Absolute,        // size added as is
};

struct ScenarioSpec {
  int trend_degree = 0;  // 0, 1 or 2
  ShockKind shock_kind = ShockKind::AO;
  double shock_size = 0.10;
  ShockScale shock_scale = ShockScale::Relative;
  Period shock_date{2022, 1};
  Period start_date{2018, 1};
  std::size_t length = 72;
  // Degree 1: level + slope*(t - start_date); degree 2:
  // level + curvature*(t - vertex)^2.
  double level = 100.0;
  double slope = 0.5;
  double curvature = 0.01;
  Period vertex{2021, 1};

  [[nodiscard]] double trend_at(Period p) const;
  void validate() const;
};

std::string_view to_string(ShockKind k);
ShockKind parse_shock_kind(std::string_view text);
std::string_view to_string(ShockScale s);
ShockScale parse_shock_scale(std::string_view text);

/// Zero-irregular trend plus shock.
TimeSeries simulate(const ScenarioSpec& spec);
/// Trend without the shock.
TimeSeries scenario_trend(const ScenarioSpec& spec);

/// JSON object with the ScenarioSpec fields (periods as "YYYY-MM").
std::string scenario_to_json(const ScenarioSpec& spec);
/// Missing fields keep their defaults. Throws ConfigError.
ScenarioSpec scenario_from_json(std::string_view json);

using Estimator = std::function<TrendEstimate(const TimeSeries&)>;

/// Row v holds the estimates computed from the series truncated at
/// publication date v; cell (v, t) exists for t <= v.
struct VintageMatrix {
  Period series_start{};
  std::vector<Period> publication;
  std::vector<std::vector<double>> rows;  // rows[k][i]: period series_start + i; NaN when absent
  std::vector<std::string> diagnostics;

  [[nodiscard]] std::size_t size() const { return publication.size(); }
  /// NaN when the cell is absent.
  [[nodiscard]] double cell(Period vintage, Period t) const;
  [[nodiscard]] const std::vector<double>& final_row() const { return rows.back(); }
};

/// Re-runs `estimator` on every truncation from `first_vintage` to the end.
/// A failing vintage is recorded as absent with a diagnostic.
VintageMatrix vintages(const TimeSeries& series, const Estimator& estimator, Period first_vintage);

struct RevisionMetrics {
  std::vector<Period> periods;
  /// revisions[i][q] = estimate_{t+q}(t) - final(t), NaN when unavailable.
  std::vector<std::vector<double>> revisions;
  double mean_abs = 0.0;
  double max_abs = 0.0;
  std::size_t count = 0;
};

/// Revisions relative to the final row for q = 0..horizon.
RevisionMetrics revision_metrics(const VintageMatrix& vm, int horizon);

enum class TurningKind { Upturn, Downturn };
std::string_view to_string(TurningKind k);

struct TurningPoint {
  Period date{};    // the extremum: trough for an upturn, peak for a downturn
  Period signal{};  // first period of the reversal
  TurningKind kind = TurningKind::Upturn;
};

/// Upturn when x[t-3] >= x[t-2] >= x[t-1] < x[t] <= x[t+1], downturn for the
/// mirrored pattern; the point is dated at t-1. Missing values never match.
std::vector<TurningPoint> turning_points(const TrendEstimate& tc);

enum class SegmentSide {
  Left,   // full-sample estimates before the break, segment from the break on
  Right,  // segment ending before the break, full-sample estimates from the break on
  Both,   // both segments estimated separately
};
SegmentSide parse_segment_side(std::string_view text);

/// Estimates with the series cut at `break_date` (first period after the
/// break). Estimates using an end filter because of the cut get ":cut" in
/// their filter id. A break after the last period gives the plain estimate.
TrendEstimate segmented_estimate(const TimeSeries& series, Period break_date, const FilterSet& fs,
                                 SegmentSide side);

/// CSV "publication_date,period,estimate".
void write_vintages_csv(std::ostream& out, const VintageMatrix& vm);
/// CSV "date,signal,kind".
void write_turning_points_csv(std::ostream& out, const std::vector<TurningPoint>& tps);

}  // namespace tc
