#include "trendcycle/robust_ma.hpp"

#include <json.hpp>
#include <ostream>
#include <set>

#include "trendcycle/csv.hpp"
#include "trendcycle/errors.hpp"

namespace tc {

std::string_view to_string(OutlierKind kind) {
  switch (kind) {
    case OutlierKind::AdditiveIrregular: return "ao";
    case OutlierKind::AdditiveTrend: return "ao_trend";
    case OutlierKind::LevelShift: return "ls";
  }
  return "?";
}

OutlierKind parse_outlier_kind(std::string_view text) {
  if (text == "ao") return OutlierKind::AdditiveIrregular;
  if (text == "ao_trend") return OutlierKind::AdditiveTrend;
  if (text == "ls") return OutlierKind::LevelShift;
  throw InvalidArgument("unknown outlier kind '" + std::string(text) + "' (expected ao, ao_trend or ls)");
}

OutlierSpec OutlierSpec::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw InvalidArgument("outlier '" + std::string(text) + "' must look like kind:YYYY-MM");
  OutlierSpec spec;
  spec.kind = parse_outlier_kind(text.substr(0, colon));
  try {
    spec.t0 = Period::parse(text.substr(colon + 1));
  } catch (const DataError& e) {
    throw InvalidArgument("outlier '" + std::string(text) + "': " + e.what());
  }
  return spec;
}

std::string OutlierSpec::str() const { return std::string(to_string(kind)) + ":" + t0.str(); }

std::vector<OutlierSpec> parse_outlier_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("outlier JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ConfigError("outlier JSON must be an array");
  std::vector<OutlierSpec> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    if (!item.is_object() || !item.contains("kind") || !item.contains("date") || !item["kind"].is_string() ||
        !item["date"].is_string())
      throw ConfigError("outlier JSON entry " + std::to_string(i) + " needs string fields kind and date");
    try {
      out.push_back(OutlierSpec{parse_outlier_kind(item["kind"].get<std::string>()),
                                Period::parse(item["date"].get<std::string>())});
    } catch (const std::exception& e) {
      throw ConfigError("outlier JSON entry " + std::to_string(i) + ": " + e.what());
    }
  }
  validate_outliers(out);
  return out;
}

void validate_outliers(const std::vector<OutlierSpec>& specs) {
  std::set<std::pair<int, long>> seen;
  for (const auto& s : specs) {
    if (!seen.emplace(static_cast<int>(s.kind), s.t0.index()).second)
      throw InvalidArgument("duplicate outlier " + s.str());
  }
}

Eigen::VectorXd regressor_column(const OutlierSpec& spec, Period t, int h, int lo, int hi) {
  const long shock = spec.t0 - t;  // offset of t0 relative to t
  Eigen::VectorXd col = Eigen::VectorXd::Zero(hi - lo + 1);
  for (int j = lo; j <= hi; ++j) {
    double v = 0.0;
    switch (spec.kind) {
      case OutlierKind::AdditiveIrregular:
        v = j == shock ? 1.0 : 0.0;
        break;
      case OutlierKind::LevelShift:
        // Before t0 the intercept is the pre-shift level; from t0 on the
        // column is zero at j = 0 so the intercept is the shifted level.
        if (shock > 0)
          v = j >= shock ? 1.0 : 0.0;
        else
          v = j < shock ? -1.0 : 0.0;
        break;
      case OutlierKind::AdditiveTrend:
        if (shock > 0 || shock == -h)
          v = j == shock ? 1.0 : 0.0;
        else if (shock <= 0 && shock > -h)
          v = j != shock ? 1.0 : 0.0;
        else
          v = 0.0;  // t > t0 + h: t0 has left the window
        break;
    }
    col(j - lo) = v;
  }
  return col;
}

namespace {

bool is_zero(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff() == 0.0; }

bool proportional(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return false;
  return std::abs(std::abs(a.dot(b)) - na * nb) <= 1e-12 * na * nb;
}

struct ActiveColumns {
  Eigen::MatrixXd full;  // rows j = -h..h
  std::vector<std::string> dropped;
};

// Keeps the columns that are non-zero on the observed rows and not a repeat
// of a preserved polynomial column or an earlier kept column there.
ActiveColumns active_columns(const std::vector<OutlierSpec>& specs, Period t, int h, int lo, int hi,
                             const Eigen::MatrixXd& observed_poly) {
  ActiveColumns out;
  std::vector<Eigen::VectorXd> kept_full;
  std::vector<Eigen::VectorXd> kept_obs;
  for (const auto& s : specs) {
    Eigen::VectorXd full = regressor_column(s, t, h, -h, h);
    Eigen::VectorXd obs = full.segment(lo + h, hi - lo + 1);
    if (is_zero(obs)) continue;
    bool dup = false;
    for (Eigen::Index c = 0; c < observed_poly.cols() && !dup; ++c) dup = proportional(obs, observed_poly.col(c));
    for (const auto& k : kept_obs)
      if (!dup) dup = proportional(obs, k);
    if (dup) {
      out.dropped.push_back(s.str() + " collinear with the design at " + t.str() + ", inactive");
      continue;
    }
    kept_full.push_back(full);
    kept_obs.push_back(obs);
  }
  out.full.resize(2 * h + 1, static_cast<Eigen::Index>(kept_full.size()));
  for (std::size_t c = 0; c < kept_full.size(); ++c) out.full.col(static_cast<Eigen::Index>(c)) = kept_full[c];
  return out;
}

// Augmented WLS filter K D (D'KD)^-1 e1 with D = [X O].
MovingAverage augmented_filter(int h, int degree, const Eigen::MatrixXd& O) {
  const Eigen::VectorXd kernel = henderson_kernel(h);
  const Eigen::MatrixXd X = polynomial_design(-h, h, degree);
  Eigen::MatrixXd D(2 * h + 1, X.cols() + O.cols());
  D << X, O;
  const Eigen::MatrixXd KD = kernel.asDiagonal() * D;
  const Eigen::MatrixXd normal = D.transpose() * KD;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
  qr.setThreshold(1e-12);
  if (qr.rank() < normal.cols()) throw TooManyOutliers("augmented design is rank deficient");
  const Eigen::VectorXd theta = KD * qr.solve(Eigen::VectorXd::Unit(normal.cols(), 0));
  return MovingAverage(h, h, std::vector<double>(theta.data(), theta.data() + theta.size()));
}

MovingAverage linear_member(const RobustConfig& cfg, int lo, int hi) {
  const int h = cfg.h;
  MovingAverage sym = local_poly_filter(h, cfg.degree, henderson_kernel(h));
  if (lo == -h && hi == h) return sym;
  const double ratio = slope_ratio_from_icr(cfg.R);
  if (lo == -h) return mmsre_asym_filter(sym, MmsreSpec{1, 0, ratio, hi});
  return mmsre_asym_filter(sym, MmsreSpec{1, 0, ratio, -lo}).reversed();
}

void check_config(const RobustConfig& cfg) {
  if (cfg.h < 1) throw InvalidArgument("robust filters need h >= 1");
  if (cfg.degree < 2 || cfg.degree > 3) throw InvalidArgument("robust symmetric degree must be 2 or 3");
  validate_outliers(cfg.specs);
}

}  // namespace

Eigen::MatrixXd regressor_columns(const std::vector<OutlierSpec>& specs, Period t, int h, int lo, int hi,
                                  std::vector<std::string>* dropped) {
  const Eigen::MatrixXd X = polynomial_design(lo, hi, 3);
  // The observed-row comparison only needs the constant column when the
  // window is asymmetric; the symmetric design carries the full polynomial.
  const Eigen::MatrixXd poly = (lo == -h && hi == h) ? X : X.leftCols(1);
  ActiveColumns ac = active_columns(specs, t, h, lo, hi, poly);
  if (dropped) dropped->insert(dropped->end(), ac.dropped.begin(), ac.dropped.end());
  return ac.full.middleRows(lo + h, hi - lo + 1);
}

MovingAverage robust_symmetric_filter(const RobustConfig& cfg, Period t) {
  check_config(cfg);
  const int h = cfg.h;
  const Eigen::MatrixXd poly = polynomial_design(-h, h, cfg.degree);
  ActiveColumns ac = active_columns(cfg.specs, t, h, -h, h, poly);
  if (ac.full.cols() == 0) return linear_member(cfg, -h, h);
  return augmented_filter(h, cfg.degree, ac.full);
}

PlannedFilter robust_filter_at(const RobustConfig& cfg, Period t, int lo, int hi,
                               std::vector<std::string>* diagnostics) {
  check_config(cfg);
  const int h = cfg.h;
  if (!((lo == -h && hi >= 0 && hi <= h) || (hi == h && lo <= 0 && lo >= -h)))
    throw InvalidArgument("observed range must reach one end of the window");

  PlannedFilter pf;
  pf.period = t;
  if (lo == -h && hi == h) {
    pf.region = FilterRegion::Symmetric;
    pf.q = h;
  } else if (lo == -h) {
    pf.region = FilterRegion::End;
    pf.q = hi;
  } else {
    pf.region = FilterRegion::Start;
    pf.q = -lo;
  }

  const Eigen::MatrixXd poly_full = polynomial_design(-h, h, cfg.degree);
  const Eigen::MatrixXd poly_obs = pf.region == FilterRegion::Symmetric
                                       ? poly_full
                                       : Eigen::MatrixXd(Eigen::MatrixXd::Ones(hi - lo + 1, 1));
  ActiveColumns ac = active_columns(cfg.specs, t, h, lo, hi, poly_obs);
  if (diagnostics) diagnostics->insert(diagnostics->end(), ac.dropped.begin(), ac.dropped.end());

  auto fall_back = [&](const std::string& why) {
    pf.filter = linear_member(cfg, lo, hi);
    pf.robust = false;
    pf.fallback = true;
    if (diagnostics) diagnostics->push_back(t.str() + ": " + why + ", linear filter used");
    return pf;
  };

  if (ac.full.cols() == 0) {
    pf.filter = linear_member(cfg, lo, hi);
    return pf;
  }

  MovingAverage target;
  try {
    target = augmented_filter(h, cfg.degree, ac.full);
  } catch (const TooManyOutliers&) {
    return fall_back("too many outliers for the symmetric robust filter");
  }
  if (pf.region == FilterRegion::Symmetric) {
    pf.filter = target;
    pf.robust = true;
    return pf;
  }

  // Preserved columns: constant plus the outlier regressors; the slope is the
  // biased column with delta/sigma = 2/(R sqrt(pi)).
  Eigen::MatrixXd U(2 * h + 1, 1 + ac.full.cols());
  U << Eigen::VectorXd::Ones(2 * h + 1), ac.full;
  const Eigen::MatrixXd Z = polynomial_design(-h, h, 1).rightCols(1);
  Eigen::VectorXd ratios(1);
  ratios << slope_ratio_from_icr(cfg.R);

  const Eigen::MatrixXd Up = U.middleRows(lo + h, hi - lo + 1);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Up);
  qr.setThreshold(1e-12);
  if (qr.rank() < Up.cols()) return fall_back("rank-deficient robust constraints");
  try {
    const Eigen::Map<const Eigen::VectorXd> tv(target.weights().data(), 2 * h + 1);
    pf.filter = mmsre_filter(tv, h, lo, hi, U, Z, ratios);
  } catch (const InvalidArgument&) {
    return fall_back("singular robust KKT system");
  }
  pf.robust = true;
  return pf;
}

MovingAverage robust_asym_filter(const RobustConfig& cfg, Period t, int q) {
  if (q < 0 || q > cfg.h) throw InvalidArgument("future horizon q must lie in [0, h]");
  return robust_filter_at(cfg, t, -cfg.h, q).filter;
}

RobustFilterPlan build_robust_plan(const RobustConfig& cfg, Period start, std::size_t n) {
  check_config(cfg);
  const int h = cfg.h;
  if (n < static_cast<std::size_t>(2 * h + 1)) throw InvalidArgument("series shorter than the symmetric filter");
  const Period end = start + static_cast<long>(n) - 1;
  for (const auto& s : cfg.specs)
    if (s.t0 < start || s.t0 > end) throw InvalidArgument("outlier " + s.str() + " outside the series span");

  RobustFilterPlan plan;
  plan.config = cfg;
  plan.start = start;
  plan.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long before = static_cast<long>(i);
    const long after = static_cast<long>(n - 1 - i);
    int lo = -h;
    int hi = h;
    if (after < h)
      hi = static_cast<int>(after);
    else if (before < h)
      lo = -static_cast<int>(before);
    plan.rows.push_back(robust_filter_at(cfg, start + before, lo, hi, &plan.diagnostics));
  }
  return plan;
}

TrendEstimate apply_plan(const TimeSeries& series, const RobustFilterPlan& plan) {
  if (series.start() != plan.start || series.size() != plan.size())
    throw InvalidArgument("filter plan does not cover the series");
  if (series.has_missing()) throw InvalidArgument("linear filters need a series without missing values");
  TrendEstimate out{series.start(), std::vector<double>(series.size()), std::vector<std::string>(series.size())};
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& row = plan.rows[i];
    out.values[i] = row.filter.apply_at(series.values(), i);
    std::string id = std::string(row.robust ? "robust_" : "") +
                     filter_label("henderson", row.q, row.region == FilterRegion::Start, plan.config.h);
    if (row.fallback) id += ":fallback";
    out.filter_id[i] = id;
  }
  return out;
}

RobustResult robust_apply(const TimeSeries& series, const RobustConfig& cfg) {
  RobustFilterPlan plan = build_robust_plan(cfg, series.start(), series.size());
  TrendEstimate est = apply_plan(series, plan);
  return RobustResult{std::move(est), std::move(plan)};
}

std::string_view to_string(FilterRegion region) {
  switch (region) {
    case FilterRegion::Symmetric: return "symmetric";
    case FilterRegion::End: return "end";
    case FilterRegion::Start: return "start";
  }
  return "?";
}

namespace {
std::string plan_kind(const PlannedFilter& row) {
  std::string kind = row.robust ? "robust_" : "";
  kind += row.region == FilterRegion::Symmetric ? "henderson" : "musgrave";
  if (row.region == FilterRegion::Start) kind += "_start";
  return kind;
}
}  // namespace

void write_plan_csv(std::ostream& out, const RobustFilterPlan& plan) {
  out << "period,filter_kind,q,fallback_flag\n";
  for (const auto& row : plan.rows)
    out << row.period.str() << ',' << plan_kind(row) << ',' << row.q << ',' << (row.fallback ? 1 : 0) << '\n';
}

void write_plan_coefficients_csv(std::ostream& out, const RobustFilterPlan& plan) {
  out << "filter_id,q,j,weight\n";
  for (const auto& row : plan.rows) {
    const std::string id = row.period.str() + ":" + plan_kind(row);
    for (int j = -row.filter.lower(); j <= row.filter.upper(); ++j)
      out << id << ',' << row.q << ',' << j << ',' << csv::format(row.filter.at(j)) << '\n';
  }
}

}  // namespace tc
