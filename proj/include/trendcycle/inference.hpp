#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trendcycle/filters.hpp"
#include "trendcycle/robust_ma.hpp"
#include "trendcycle/series.hpp"

namespace tc {

/// Quantities derived from one filter applied uniformly to n observations.
/// Delta = (I - H)'(I - H) restricted to the n - p - f rows the filter covers.
struct SmootherSpectrum {
  std::vector<double> w;  // w_i = 1{i=0} - theta_i, i = -p..f
  std::vector<double> L;  // L_k = sum_i w_i w_{i-k}, k = 0..p+f
  double trace_delta = 0.0;
  double trace_delta2 = 0.0;
  double nu = 0.0;   // tr(Delta)^2 / tr(Delta^2)
  double nu1 = 0.0;  // tr(H) = (n-p-f) theta_0
  double nu2 = 0.0;  // tr(H'H) = (n-p-f) sum theta_i^2
};

/// Requires n > 2(p+f).
SmootherSpectrum smoother_spectrum(const MovingAverage& theta, std::size_t n);

/// (n-p-f)(1 - 2 theta_0 + sum theta_i^2). Requires n > p+f.
double trace_delta(const MovingAverage& theta, std::size_t n);
/// tr(Delta^2) from the convolution sequence L. Requires n > 2(p+f).
double trace_delta2_fast(const MovingAverage& theta, std::size_t n);

/// Rows p..n-f-1 of the uniform hat matrix ((n-p-f) x n).
Eigen::MatrixXd uniform_hat_matrix(const MovingAverage& theta, std::size_t n);
/// Gamma = S - H, where S selects the rows' own periods; `row_period[r]` is
/// the column of the observation estimated by row r.
Eigen::MatrixXd residual_operator(const Eigen::MatrixXd& H, const std::vector<std::size_t>& row_period);

struct DenseTraces {
  double trace_delta = 0.0;
  double trace_delta2 = 0.0;
};
/// tr(Delta) and tr(Delta^2) for Delta = Gamma'Gamma.
DenseTraces dense_traces(const Eigen::MatrixXd& gamma);

/// exact: tr(Delta)^2 / tr(Delta^2); otherwise tr(Delta).
double degrees_of_freedom(const MovingAverage& theta, std::size_t n, bool exact = true);

enum class VarianceForm {
  Consistent,  // denominator (n-p-f)(1 - 2 theta_0 + sum theta^2) = tr(Delta)
  Literal,     // theta_0 squared in place of theta_0, for comparison only
};

/// Residual variance from a uniform application of theta to the series.
double sigma2_hat(std::span<const double> values, const MovingAverage& theta,
                  VarianceForm form = VarianceForm::Consistent);

/// Upper quantile of Student's t with nu (possibly fractional) degrees of freedom.
double student_quantile(double prob, double nu);

struct IntervalSeries {
  Period start{};
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> sigma2;
  std::vector<double> df;
  std::vector<std::string> filter_id;

  [[nodiscard]] std::size_t size() const { return estimate.size(); }
  [[nodiscard]] Period period(std::size_t i) const { return start + static_cast<long>(i); }
};

/// Intervals for a filter set applied to the series. Each member gets the
/// variance and degrees of freedom of its own uniform application.
IntervalSeries confint_uniform(const TimeSeries& series, const FilterSet& fs, double alpha = 0.05,
                               bool exact = true);

/// Intervals for a robust filter plan. The interior uses the hat matrix
/// rebuilt from the plan's symmetric rows; each end/start horizon uses a
/// fictive hat matrix where every period gets the filter it would have at
/// that horizon (linear filter where the robust one is infeasible).
IntervalSeries confint_robust(const TimeSeries& series, const RobustFilterPlan& plan, double alpha = 0.05,
                              bool exact = true);

/// CSV "period,estimate,lower,upper,df,sigma2,filter_id".
void write_intervals_csv(std::ostream& out, const IntervalSeries& iv);

}  // namespace tc
