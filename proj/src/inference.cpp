#include "trendcycle/inference.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <ostream>

#include "trendcycle/csv.hpp"
#include "trendcycle/errors.hpp"

namespace tc {

namespace {

std::size_t span_of(const MovingAverage& theta) {
  return static_cast<std::size_t>(theta.lower() + theta.upper());
}

void require_rows(const MovingAverage& theta, std::size_t n) {
  if (n <= span_of(theta))
    throw InvalidArgument("series of " + std::to_string(n) + " observations too short for a filter spanning " +
                          std::to_string(span_of(theta) + 1) + " periods");
}

void require_fast(const MovingAverage& theta, std::size_t n) {
  if (n <= 2 * span_of(theta))
    throw InvalidArgument("tr(Delta^2) identity needs n > 2(p+f); got n = " + std::to_string(n));
}

double residual_weight(const MovingAverage& theta, int j) { return (j == 0 ? 1.0 : 0.0) - theta.at(j); }

}  // namespace

double trace_delta(const MovingAverage& theta, std::size_t n) {
  require_rows(theta, n);
  const double m = static_cast<double>(n - span_of(theta));
  return m * (1.0 - 2.0 * theta.at(0) + theta.sum_of_squares());
}

double trace_delta2_fast(const MovingAverage& theta, std::size_t n) {
  require_fast(theta, n);
  const int p = theta.lower();
  const int f = theta.upper();
  const int s = p + f;
  const double m = static_cast<double>(n) - s;
  const auto& wt = theta.weights();
  double total = 0.0;
  for (int k = 0; k <= s; ++k) {
    double lk = 0.0;
    for (int a = k; a <= s; ++a) {
      const double wa = (a == p ? 1.0 : 0.0) - wt[static_cast<std::size_t>(a)];
      const double wb = (a - k == p ? 1.0 : 0.0) - wt[static_cast<std::size_t>(a - k)];
      lk += wa * wb;
    }
    total += (k == 0 ? m : 2.0 * (m - k)) * lk * lk;
  }
  return total;
}

SmootherSpectrum smoother_spectrum(const MovingAverage& theta, std::size_t n) {
  require_fast(theta, n);
  SmootherSpectrum sp;
  const int p = theta.lower();
  const int f = theta.upper();
  for (int j = -p; j <= f; ++j) sp.w.push_back(residual_weight(theta, j));
  const int s = p + f;
  for (int k = 0; k <= s; ++k) {
    double lk = 0.0;
    for (int a = k; a <= s; ++a) lk += sp.w[static_cast<std::size_t>(a)] * sp.w[static_cast<std::size_t>(a - k)];
    sp.L.push_back(lk);
  }
  const double m = static_cast<double>(n) - s;
  sp.trace_delta = trace_delta(theta, n);
  sp.trace_delta2 = trace_delta2_fast(theta, n);
  sp.nu = sp.trace_delta * sp.trace_delta / sp.trace_delta2;
  sp.nu1 = m * theta.at(0);
  sp.nu2 = m * theta.sum_of_squares();
  return sp;
}

Eigen::MatrixXd uniform_hat_matrix(const MovingAverage& theta, std::size_t n) {
  require_rows(theta, n);
  const int p = theta.lower();
  const std::size_t m = n - span_of(theta);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < m; ++r)
    for (int j = -theta.lower(); j <= theta.upper(); ++j)
      H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(static_cast<int>(r) + p + j)) = theta.at(j);
  return H;
}

Eigen::MatrixXd residual_operator(const Eigen::MatrixXd& H, const std::vector<std::size_t>& row_period) {
  Eigen::MatrixXd G = -H;
  for (std::size_t r = 0; r < row_period.size(); ++r)
    G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(row_period[r])) += 1.0;
  return G;
}

DenseTraces dense_traces(const Eigen::MatrixXd& gamma) {
  // tr(G'G) = |G|_F^2 and tr((G'G)^2) = |G G'|_F^2.
  const Eigen::MatrixXd gg = gamma * gamma.transpose();
  return DenseTraces{gamma.squaredNorm(), gg.squaredNorm()};
}

double degrees_of_freedom(const MovingAverage& theta, std::size_t n, bool exact) {
  const double td = trace_delta(theta, n);
  if (!exact) return td;
  const double td2 = trace_delta2_fast(theta, n);
  if (td2 <= 0.0) throw DegenerateError("tr(Delta^2) vanishes: the filter interpolates the data");
  return td * td / td2;
}

double sigma2_hat(std::span<const double> values, const MovingAverage& theta, VarianceForm form) {
  const std::size_t n = values.size();
  require_rows(theta, n);
  const int p = theta.lower();
  const std::size_t m = n - span_of(theta);
  double ss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t t = r + static_cast<std::size_t>(p);
    const double e = values[t] - theta.apply_at(values, t);
    ss += e * e;
  }
  // The consistent denominator is tr(Delta), i.e. m(1 - 2 nu1/m + nu2/m).
  const double t0 = form == VarianceForm::Consistent ? theta.at(0) : theta.at(0) * theta.at(0);
  const double denom = static_cast<double>(m) * (1.0 - 2.0 * t0 + theta.sum_of_squares());
  if (!(denom > 0.0)) throw DegenerateError("non-positive variance denominator");
  return ss / denom;
}

double student_quantile(double prob, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DegenerateError("degrees of freedom must be positive and finite");
  if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("quantile probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), prob);
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
}

struct Moments {
  double sigma2 = 0.0;
  double nu = 0.0;
};

IntervalSeries empty_intervals(const TrendEstimate& est) {
  const std::size_t n = est.size();
  IntervalSeries iv;
  iv.start = est.start;
  iv.estimate = est.values;
  iv.lower.resize(n);
  iv.upper.resize(n);
  iv.sigma2.resize(n);
  iv.df.resize(n);
  iv.filter_id = est.filter_id;
  return iv;
}

void fill(IntervalSeries& iv, std::size_t i, const Moments& mo, double ssq, double alpha) {
  const double half = student_quantile(1.0 - alpha / 2.0, mo.nu) * std::sqrt(mo.sigma2 * ssq);
  iv.lower[i] = iv.estimate[i] - half;
  iv.upper[i] = iv.estimate[i] + half;
  iv.sigma2[i] = mo.sigma2;
  iv.df[i] = mo.nu;
}

// Variance and degrees of freedom from the rows of a (possibly fictive) hat
// matrix; row r estimates period row_period[r] with filters[r].
Moments dense_moments(std::span<const double> y, const std::vector<MovingAverage>& filters,
                      const std::vector<std::size_t>& row_period, bool exact) {
  const std::size_t n = y.size();
  const std::size_t m = filters.size();
  if (m == 0) throw InvalidArgument("no rows to estimate the variance from");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  double ss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const auto t = static_cast<long>(row_period[r]);
    for (int j = -filters[r].lower(); j <= filters[r].upper(); ++j)
      G(static_cast<Eigen::Index>(r), t + j) -= filters[r].at(j);
    G(static_cast<Eigen::Index>(r), t) += 1.0;
    const double e = y[row_period[r]] - filters[r].apply_at(y, row_period[r]);
    ss += e * e;
  }
  Moments mo;
  const double td = G.squaredNorm();
  if (!(td > 0.0)) throw DegenerateError("tr(Delta) vanishes for the robust hat matrix");
  mo.sigma2 = ss / td;
  if (exact) {
    const double td2 = (G * G.transpose()).squaredNorm();
    mo.nu = td * td / td2;
  } else {
    mo.nu = td;
  }
  return mo;
}

}  // namespace

IntervalSeries confint_uniform(const TimeSeries& series, const FilterSet& fs, double alpha, bool exact) {
  check_alpha(alpha);
  const TrendEstimate est = apply_filter_set(series, fs);
  IntervalSeries iv = empty_intervals(est);
  const std::size_t n = series.size();
  const auto& y = series.values();
  const int h = fs.h;

  auto moments = [&](const MovingAverage& ma) {
    return Moments{sigma2_hat(y, ma), degrees_of_freedom(ma, n, exact)};
  };
  const Moments sym = moments(fs.symmetric);
  std::map<int, Moments> end_m;
  std::map<int, Moments> start_m;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t before = i;
    const std::size_t after = n - 1 - i;
    if (after < static_cast<std::size_t>(h)) {
      const int q = static_cast<int>(after);
      const MovingAverage& ma = fs.asymmetric[static_cast<std::size_t>(q)];
      if (!end_m.contains(q)) end_m[q] = moments(ma);
      fill(iv, i, end_m[q], ma.sum_of_squares(), alpha);
    } else if (before < static_cast<std::size_t>(h)) {
      const int q = static_cast<int>(before);
      const MovingAverage ma = fs.asymmetric[static_cast<std::size_t>(q)].reversed();
      if (!start_m.contains(q)) start_m[q] = moments(ma);
      fill(iv, i, start_m[q], ma.sum_of_squares(), alpha);
    } else {
      fill(iv, i, sym, fs.symmetric.sum_of_squares(), alpha);
    }
  }
  return iv;
}

IntervalSeries confint_robust(const TimeSeries& series, const RobustFilterPlan& plan, double alpha, bool exact) {
  check_alpha(alpha);
  const TrendEstimate est = apply_plan(series, plan);
  IntervalSeries iv = empty_intervals(est);
  const std::size_t n = series.size();
  const auto& y = series.values();
  const RobustConfig& cfg = plan.config;
  const int h = cfg.h;

  std::vector<MovingAverage> filters;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n; ++i)
    if (plan.rows[i].region == FilterRegion::Symmetric) {
      filters.push_back(plan.rows[i].filter);
      rows.push_back(i);
    }
  const Moments interior = dense_moments(y, filters, rows, exact);

  // Fictive hat matrix: every period estimated as if only q observations
  // were available on the open side.
  auto horizon_moments = [&](FilterRegion region, int q) {
    std::vector<MovingAverage> fl;
    std::vector<std::size_t> rp;
    const std::size_t first = region == FilterRegion::End ? static_cast<std::size_t>(h) : static_cast<std::size_t>(q);
    const std::size_t last = region == FilterRegion::End ? n - 1 - static_cast<std::size_t>(q) : n - 1 - static_cast<std::size_t>(h);
    for (std::size_t s = first; s <= last; ++s) {
      const int lo = region == FilterRegion::End ? -h : -q;
      const int hi = region == FilterRegion::End ? q : h;
      fl.push_back(robust_filter_at(cfg, plan.start + static_cast<long>(s), lo, hi).filter);
      rp.push_back(s);
    }
    return dense_moments(y, fl, rp, exact);
  };

  std::map<int, Moments> end_m;
  std::map<int, Moments> start_m;
  for (std::size_t i = 0; i < n; ++i) {
    const PlannedFilter& row = plan.rows[i];
    const double ssq = row.filter.sum_of_squares();
    switch (row.region) {
      case FilterRegion::Symmetric: fill(iv, i, interior, ssq, alpha); break;
      case FilterRegion::End:
        if (!end_m.contains(row.q)) end_m[row.q] = horizon_moments(FilterRegion::End, row.q);
        fill(iv, i, end_m[row.q], ssq, alpha);
        break;
      case FilterRegion::Start:
        if (!start_m.contains(row.q)) start_m[row.q] = horizon_moments(FilterRegion::Start, row.q);
        fill(iv, i, start_m[row.q], ssq, alpha);
        break;
    }
  }
  return iv;
}

void write_intervals_csv(std::ostream& out, const IntervalSeries& iv) {
  out << "period,estimate,lower,upper,df,sigma2,filter_id\n";
  for (std::size_t i = 0; i < iv.size(); ++i)
    out << iv.period(i).str() << ',' << csv::format(iv.estimate[i]) << ',' << csv::format(iv.lower[i]) << ','
        << csv::format(iv.upper[i]) << ',' << csv::format(iv.df[i]) << ',' << csv::format(iv.sigma2[i]) << ','
        << iv.filter_id[i] << '\n';
}

}  // namespace tc
