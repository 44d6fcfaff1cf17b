#include "trendcycle/filters.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "trendcycle/csv.hpp"
#include "trendcycle/errors.hpp"

namespace tc {

MovingAverage::MovingAverage(int lower, int upper, std::vector<double> weights)
    : lower_(lower), upper_(upper), weights_(std::move(weights)) {
  if (lower_ < 0 || upper_ < 0) throw InvalidArgument("moving average spans must be non-negative");
  if (weights_.size() != static_cast<std::size_t>(lower_ + upper_ + 1))
    throw InvalidArgument("moving average needs lower + upper + 1 weights");
}

double MovingAverage::at(int j) const {
  if (j < -lower_ || j > upper_) return 0.0;
  return weights_[static_cast<std::size_t>(j + lower_)];
}

double MovingAverage::sum() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double MovingAverage::sum_of_squares() const {
  double s = 0.0;
  for (double w : weights_) s += w * w;
  return s;
}

bool MovingAverage::is_symmetric(double tol) const {
  if (lower_ != upper_) return false;
  for (int j = 1; j <= upper_; ++j)
    if (std::abs(at(j) - at(-j)) > tol) return false;
  return true;
}

MovingAverage MovingAverage::reversed() const {
  return MovingAverage(upper_, lower_, std::vector<double>(weights_.rbegin(), weights_.rend()));
}

double MovingAverage::apply_at(std::span<const double> values, std::size_t t) const {
  double s = 0.0;
  std::size_t first = t - static_cast<std::size_t>(lower_);
  for (std::size_t k = 0; k < weights_.size(); ++k) s += weights_[k] * values[first + k];
  return s;
}

Eigen::VectorXd henderson_kernel(int h) {
  if (h < 1) throw InvalidArgument("Henderson kernel needs h >= 1");
  Eigen::VectorXd k(2 * h + 1);
  const double a = (h + 1.0) * (h + 1.0);
  const double b = (h + 2.0) * (h + 2.0);
  const double c = (h + 3.0) * (h + 3.0);
  for (int j = -h; j <= h; ++j) {
    const double j2 = static_cast<double>(j) * j;
    k(j + h) = (1.0 - j2 / a) * (1.0 - j2 / b) * (1.0 - j2 / c);
  }
  return k;
}

Eigen::VectorXd uniform_kernel(int h) {
  if (h < 0) throw InvalidArgument("kernel half-window must be non-negative");
  return Eigen::VectorXd::Ones(2 * h + 1);
}

Eigen::MatrixXd polynomial_design(int lo, int hi, int degree) {
  Eigen::MatrixXd X(hi - lo + 1, degree + 1);
  for (int j = lo; j <= hi; ++j) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      X(j - lo, k) = p;
      p *= j;
    }
  }
  return X;
}

PolyBasis poly_basis(int h, int degree, const Eigen::VectorXd& kernel) {
  if (h < 0) throw InvalidArgument("half-window must be non-negative");
  if (degree < 0 || degree > 2 * h) throw InvalidArgument("degree must satisfy 0 <= d <= 2h");
  if (kernel.size() != 2 * h + 1) throw InvalidArgument("kernel must have 2h+1 weights");
  for (Eigen::Index i = 0; i < kernel.size(); ++i)
    if (!(kernel(i) > 0.0)) throw InvalidArgument("kernel weights must be positive");
  return PolyBasis{h, degree, polynomial_design(-h, h, degree), kernel};
}

MovingAverage local_poly_filter(int h, int degree, const Eigen::VectorXd& kernel) {
  const PolyBasis basis = poly_basis(h, degree, kernel);
  const Eigen::MatrixXd KX = basis.kernel.asDiagonal() * basis.X;
  const Eigen::MatrixXd normal = basis.X.transpose() * KX;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
  if (qr.rank() < normal.cols()) throw NumericalError("singular local polynomial normal matrix");
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(degree + 1, 0);
  const Eigen::VectorXd theta = KX * qr.solve(e1);
  return MovingAverage(h, h, std::vector<double>(theta.data(), theta.data() + theta.size()));
}

MovingAverage henderson_filter(int h) { return local_poly_filter(h, 3, henderson_kernel(h)); }

double slope_ratio_from_icr(double R) {
  if (!(R > 0.0)) throw InvalidArgument("I-C ratio must be positive");
  return 2.0 / (R * std::sqrt(std::numbers::pi));
}

MovingAverage mmsre_filter(const Eigen::VectorXd& target, int h, int lo, int hi,
                           const Eigen::MatrixXd& U, const Eigen::MatrixXd& Z,
                           const Eigen::VectorXd& ratios) {
  const Eigen::Index full = 2 * h + 1;
  if (target.size() != full || U.rows() != full || Z.rows() != full)
    throw InvalidArgument("target and design rows must cover j = -h..h");
  if (lo < -h || hi > h || lo > 0 || hi < 0) throw InvalidArgument("observed range must contain 0");
  if (Z.cols() != ratios.size()) throw InvalidArgument("one ratio per biased column");

  const Eigen::Index m = hi - lo + 1;
  const Eigen::Index c = U.cols();
  const Eigen::Index off = lo + h;

  const Eigen::VectorXd theta_p = target.segment(off, m);
  const Eigen::MatrixXd Up = U.middleRows(off, m);
  // The revision bias is delta'(Z_p'v - Z'theta); with delta = sigma * ratios
  // it only enters through the weighted column Z * ratios.
  const Eigen::VectorXd zd = Z * ratios;
  const Eigen::VectorXd zd_p = zd.segment(off, m);
  const double zd_target = zd.dot(target);

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + c, m + c);
  kkt.topLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m) + zd_p * zd_p.transpose();
  kkt.topRightCorner(m, c) = Up;
  kkt.bottomLeftCorner(c, m) = Up.transpose();

  Eigen::VectorXd rhs(m + c);
  rhs.head(m) = theta_p + zd_p * zd_target;
  rhs.tail(c) = U.transpose() * target;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  lu.setThreshold(1e-12);
  if (lu.rank() < m + c) throw InvalidArgument("invalid spec: singular KKT system");
  const Eigen::VectorXd sol = lu.solve(rhs);
  const Eigen::VectorXd v = sol.head(m);
  return MovingAverage(-lo, hi, std::vector<double>(v.data(), v.data() + m));
}

MovingAverage mmsre_asym_filter(const MovingAverage& sym, const MmsreSpec& spec) {
  if (!sym.is_symmetric(1e-10)) throw InvalidArgument("mmsre target must be a symmetric filter");
  const int h = sym.upper();
  if (spec.q < 0 || spec.q > h) throw InvalidArgument("future horizon q must lie in [0, h]");
  if (spec.preserved < 0 || spec.degree < spec.preserved || spec.degree > spec.preserved + 1)
    throw InvalidArgument("mmsre spec needs d* <= d <= d* + 1");
  if (spec.slope_ratio < 0.0) throw InvalidArgument("slope ratio must be non-negative");

  const Eigen::MatrixXd X = polynomial_design(-h, h, spec.degree);
  const Eigen::MatrixXd U = X.leftCols(spec.preserved + 1);
  const Eigen::MatrixXd Z = X.rightCols(spec.degree - spec.preserved);
  const Eigen::VectorXd ratios = Eigen::VectorXd::Constant(Z.cols(), spec.slope_ratio);
  const Eigen::Map<const Eigen::VectorXd> target(sym.weights().data(), 2 * h + 1);
  return mmsre_filter(target, h, -h, spec.q, U, Z, ratios);
}

FilterSet musgrave_filter_set(int h, double R) {
  const double ratio = slope_ratio_from_icr(R);
  FilterSet fs;
  fs.name = "henderson";
  fs.h = h;
  fs.symmetric = henderson_filter(h);
  for (int q = 0; q < h; ++q)
    fs.asymmetric.push_back(mmsre_asym_filter(fs.symmetric, MmsreSpec{1, 0, ratio, q}));
  return fs;
}

MovingAverage cut_and_normalize(const MovingAverage& sym, int q) {
  if (!sym.is_symmetric(1e-9)) throw InvalidArgument("cut-and-normalize needs a symmetric filter");
  const int h = sym.upper();
  if (q < 0 || q > h) throw InvalidArgument("future horizon q must lie in [0, h]");
  std::vector<double> w(sym.weights().begin(), sym.weights().begin() + (h + q + 1));
  double s = 0.0;
  for (double x : w) s += x;
  if (!(s > 0.0)) throw DegenerateError("non-positive weight sum over the retained range");
  for (double& x : w) x /= s;
  return MovingAverage(h, q, std::move(w));
}

FilterSet cut_and_normalize_set(const MovingAverage& sym, std::string name) {
  FilterSet fs;
  fs.name = std::move(name);
  fs.h = sym.upper();
  fs.symmetric = sym;
  for (int q = 0; q < fs.h; ++q) fs.asymmetric.push_back(cut_and_normalize(sym, q));
  return fs;
}

FilterSet clf_filter_set(std::istream& table) {
  constexpr int h = 6;
  std::map<int, double> rows;
  bool provenance = false;
  std::string line;
  int lineno = 0;
  while (std::getline(table, line)) {
    ++lineno;
    auto fields = csv::split(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    if (!fields[0].empty() && fields[0][0] == '#') {
      if (line.find("provenance") != std::string::npos) provenance = true;
      continue;
    }
    if (fields[0] == "j") continue;  // header
    if (fields.size() < 2) throw ConfigError("CLF table line " + std::to_string(lineno) + ": expected j,weight");
    int j = 0;
    double w = 0.0;
    try {
      j = std::stoi(fields[0]);
      w = csv::parse_number(fields[1]);
    } catch (const std::exception&) {
      throw ConfigError("CLF table line " + std::to_string(lineno) + ": unparseable row");
    }
    if (j < -h || j > h) throw ConfigError("CLF table line " + std::to_string(lineno) + ": offset outside -6..6");
    if (!rows.emplace(j, w).second)
      throw ConfigError("CLF table line " + std::to_string(lineno) + ": duplicate offset " + std::to_string(j));
  }
  if (!provenance) throw ConfigError("CLF table lacks a '# provenance:' comment line");
  if (rows.size() != 2 * h + 1) throw ConfigError("CLF table must list 13 weights for j = -6..6");
  std::vector<double> w;
  for (auto& [j, x] : rows) w.push_back(x);
  MovingAverage sym(h, h, std::move(w));
  // File tables carry external rounding.
  if (std::abs(sym.sum() - 1.0) > 1e-9) throw ConfigError("CLF weights do not sum to 1");
  if (!sym.is_symmetric(1e-9)) throw ConfigError("CLF weights are not symmetric");
  return cut_and_normalize_set(sym, "clf");
}

FilterSet clf_filter_set_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CLF table '" + path + "'");
  return clf_filter_set(in);
}

double icr(const TimeSeries& series, const MovingAverage& sym) {
  const int h = sym.upper();
  const std::size_t n = series.size();
  if (!sym.is_symmetric(1e-9)) throw InvalidArgument("I-C ratio needs a symmetric filter");
  if (n <= static_cast<std::size_t>(2 * h + 1)) throw InvalidArgument("series too short for the I-C ratio");
  if (series.has_missing()) throw InvalidArgument("I-C ratio needs a complete series");
  const auto& y = series.values();
  std::vector<double> trend;
  std::vector<double> irr;
  for (std::size_t t = static_cast<std::size_t>(h); t + static_cast<std::size_t>(h) < n; ++t) {
    const double c = sym.apply_at(y, t);
    trend.push_back(c);
    irr.push_back(y[t] - c);
  }
  double ibar = 0.0;
  double cbar = 0.0;
  for (std::size_t k = 1; k < trend.size(); ++k) {
    ibar += std::abs(irr[k] - irr[k - 1]);
    cbar += std::abs(trend[k] - trend[k - 1]);
  }
  const double m = static_cast<double>(trend.size() - 1);
  ibar /= m;
  cbar /= m;
  // Relative to the scale of the data: an interior fit of a constant leaves
  // rounding noise in both sums.
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (cbar <= 1e-13 * std::max(scale, 1.0)) throw DegenerateError("degenerate series: trend-cycle has no variation");
  if (ibar <= 1e-13 * std::max(scale, 1.0)) ibar = 0.0;
  return ibar / cbar;
}

int select_henderson_length(double R) {
  if (R < 1.0) return 4;
  if (R <= 3.5) return 6;
  return 11;
}

std::string filter_label(const std::string& set_name, int q, bool at_start, int h) {
  if (q >= h) return set_name + ":sym";
  return set_name + (at_start ? ":start:q=" : ":end:q=") + std::to_string(q);
}

TrendEstimate apply_filter_set(const TimeSeries& series, const FilterSet& fs) {
  const int h = fs.h;
  const std::size_t n = series.size();
  if (n < static_cast<std::size_t>(2 * h + 1)) throw InvalidArgument("series shorter than the symmetric filter");
  if (series.has_missing()) throw InvalidArgument("linear filters need a series without missing values");
  if (fs.asymmetric.size() != static_cast<std::size_t>(h)) throw InvalidArgument("filter set needs h asymmetric members");
  const auto& y = series.values();
  TrendEstimate out{series.start(), std::vector<double>(n), std::vector<std::string>(n)};
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t before = t;
    const std::size_t after = n - 1 - t;
    if (before >= static_cast<std::size_t>(h) && after >= static_cast<std::size_t>(h)) {
      out.values[t] = fs.symmetric.apply_at(y, t);
      out.filter_id[t] = filter_label(fs.name, h, false, h);
    } else if (after < static_cast<std::size_t>(h)) {
      const int q = static_cast<int>(after);
      out.values[t] = fs.asymmetric[static_cast<std::size_t>(q)].apply_at(y, t);
      out.filter_id[t] = filter_label(fs.name, q, false, h);
    } else {
      const int q = static_cast<int>(before);
      out.values[t] = fs.asymmetric[static_cast<std::size_t>(q)].reversed().apply_at(y, t);
      out.filter_id[t] = filter_label(fs.name, q, true, h);
    }
  }
  return out;
}

bool preserves_polynomial(const MovingAverage& ma, int degree, double tol) {
  for (int k = 0; k <= degree; ++k) {
    double s = 0.0;
    double scale = 0.0;
    for (int j = -ma.lower(); j <= ma.upper(); ++j) {
      const double term = ma.at(j) * std::pow(static_cast<double>(j), k);
      s += term;
      scale += std::abs(term);
    }
    const double expected = k == 0 ? 1.0 : 0.0;
    if (std::abs(s - expected) > tol * std::max(1.0, scale)) return false;
  }
  return true;
}

void write_coefficients_csv(std::ostream& out, const std::vector<FilterSet>& sets) {
  out << "filter_id,q,j,weight\n";
  for (const auto& fs : sets) {
    auto emit = [&](const MovingAverage& ma, int q) {
      const std::string id = filter_label(fs.name, q, false, fs.h);
      for (int j = -ma.lower(); j <= ma.upper(); ++j)
        out << id << ',' << q << ',' << j << ',' << csv::format(ma.at(j)) << '\n';
    };
    emit(fs.symmetric, fs.h);
    for (int q = fs.h - 1; q >= 0; --q) emit(fs.asymmetric[static_cast<std::size_t>(q)], q);
  }
}

}  // namespace tc
