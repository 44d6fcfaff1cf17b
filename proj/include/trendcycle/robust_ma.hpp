#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "trendcycle/filters.hpp"
#include "trendcycle/series.hpp"

namespace tc {

enum class OutlierKind {
  AdditiveIrregular,  // "ao": one-period shock assigned to the irregular
  AdditiveTrend,      // "ao_trend": one-period shock assigned to the trend-cycle
  LevelShift,         // "ls": permanent step assigned to the trend-cycle
};

struct OutlierSpec {
  OutlierKind kind = OutlierKind::AdditiveIrregular;
  Period t0{};

  friend bool operator==(const OutlierSpec&, const OutlierSpec&) = default;

  /// Parses "kind:YYYY-MM".
  static OutlierSpec parse(std::string_view text);
  [[nodiscard]] std::string str() const;
};

std::string_view to_string(OutlierKind kind);
OutlierKind parse_outlier_kind(std::string_view text);

/// Parses a JSON array [{"kind": "ao", "date": "2020-03"}, ...].
std::vector<OutlierSpec> parse_outlier_json(std::string_view json);

/// Throws InvalidArgument on duplicate (kind, t0) pairs.
void validate_outliers(const std::vector<OutlierSpec>& specs);

/// Regressor column of one spec for evaluation period t over offsets
/// j = lo..hi. LS columns vanish at j = 0, so the intercept carries the
/// shifted level from t0 on.
Eigen::VectorXd regressor_column(const OutlierSpec& spec, Period t, int h, int lo, int hi);

/// Columns of the specs that are active at t over j = lo..hi: zero columns
/// and columns repeating a polynomial or earlier column are dropped.
/// `dropped` (optional) receives a note per collinear drop.
Eigen::MatrixXd regressor_columns(const std::vector<OutlierSpec>& specs, Period t, int h, int lo, int hi,
                                  std::vector<std::string>* dropped = nullptr);

struct RobustConfig {
  int h = 6;
  int degree = 3;  // local polynomial degree of the symmetric filter
  double R = 3.5;  // I-C ratio fixing the end filters' slope ratio
  std::vector<OutlierSpec> specs;
};

/// theta^(r)_t = K (X O)((X O)'K(X O))^-1 e1. Equal to the Henderson filter
/// when no regressor is active. Throws TooManyOutliers on rank loss.
MovingAverage robust_symmetric_filter(const RobustConfig& cfg, Period t);

enum class FilterRegion { Symmetric, End, Start };

struct PlannedFilter {
  Period period{};
  MovingAverage filter;
  FilterRegion region = FilterRegion::Symmetric;
  int q = 0;              // future (End) or past (Start) observations available; h when symmetric
  bool robust = false;    // at least one regressor shaped the filter
  bool fallback = false;  // the linear reference filter replaced an infeasible robust one
};

/// Filter used at t when only offsets j = lo..hi are observed (lo = -h or
/// hi = h). Infeasible robust constraints fall back to the linear
/// Henderson/Musgrave member with `fallback` set.
PlannedFilter robust_filter_at(const RobustConfig& cfg, Period t, int lo, int hi,
                               std::vector<std::string>* diagnostics = nullptr);

/// Constrained asymmetric robust filter for the end of a series (p = h, f = q).
MovingAverage robust_asym_filter(const RobustConfig& cfg, Period t, int q);

struct RobustFilterPlan {
  RobustConfig config;
  Period start{};
  std::vector<PlannedFilter> rows;
  std::vector<std::string> diagnostics;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
};

/// Per-period filters for a series of n observations starting at `start`.
/// The plan depends on the dates only.
RobustFilterPlan build_robust_plan(const RobustConfig& cfg, Period start, std::size_t n);

TrendEstimate apply_plan(const TimeSeries& series, const RobustFilterPlan& plan);

struct RobustResult {
  TrendEstimate estimate;
  RobustFilterPlan plan;
};

RobustResult robust_apply(const TimeSeries& series, const RobustConfig& cfg);

std::string_view to_string(FilterRegion region);
/// CSV rows "period,filter_kind,q,fallback_flag".
void write_plan_csv(std::ostream& out, const RobustFilterPlan& plan);
/// Coefficients in the filters-core export layout, one filter per period.
void write_plan_coefficients_csv(std::ostream& out, const RobustFilterPlan& plan);

}  // namespace tc
