#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trendcycle/series.hpp"

namespace tc {

enum class RobustMethod { Med, Rm, Lms, Lts, Lqd, Dr };

std::string_view to_string(RobustMethod m);
/// "med", "rm", "lms", "lts", "lqd", "dr".
RobustMethod parse_robust_method(std::string_view text);

/// Observations of one window; x holds offsets relative to the evaluation
/// period (missing values are simply absent).
struct Window {
  std::vector<double> x;
  std::vector<double> y;

  [[nodiscard]] std::size_t size() const { return x.size(); }
  /// Window over offsets -h..h of a span of values (NaN = absent).
  static Window centered(std::span<const double> values);
  /// Window over offsets -h..h around position t of `values`, clipped to
  /// the available range.
  static Window around(std::span<const double> values, std::size_t t, int h);
};

/// Local polynomial fit level + slope*i + curvature*i^2.
struct WindowFit {
  double level = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
  int degree = 1;
  RobustMethod method = RobustMethod::Med;

  [[nodiscard]] double value_at(double i) const { return level + slope * i + curvature * i * i; }
};

double median(std::vector<double> v);

std::optional<double> med_window(std::span<const double> values);
std::optional<WindowFit> rm_window(const Window& w);
std::optional<WindowFit> lms_window(const Window& w, int degree = 1);
/// Coverage defaults to floor((n + p + 1) / 2), p = number of non-constant regressors.
std::optional<WindowFit> lts_window(const Window& w, int degree = 1, std::optional<int> coverage = std::nullopt);
std::optional<WindowFit> lqd_window(const Window& w);
std::optional<WindowFit> dr_window(const Window& w);

// Objectives, exposed for verification.

/// Order statistic used by LMS: the (floor(n/2)+1)-th smallest squared residual.
double lms_objective(const WindowFit& fit, const Window& w);
/// Sum of the `coverage` smallest squared residuals.
double lts_objective(const WindowFit& fit, const Window& w, int coverage);
int default_coverage(std::size_t n, int degree);
/// C(h_p, 2)-th smallest |r_i - r_j| over i < j for the given slope.
double lqd_objective(double slope, const Window& w);
/// Regression depth of the line b0 + b1*x.
int rdepth(double b0, double b1, const Window& w);

std::optional<WindowFit> fit_window(RobustMethod m, const Window& w, int degree = 1);

enum class Boundary { NaPad, Extrapolate };
Boundary parse_boundary(std::string_view text);

/// Slides the window estimator over the series.
TrendEstimate robust_smooth(const TimeSeries& series, RobustMethod method, int h, int degree = 1,
                            Boundary boundary = Boundary::NaPad);

}  // namespace tc
