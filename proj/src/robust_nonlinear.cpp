#include "trendcycle/robust_nonlinear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "trendcycle/errors.hpp"

namespace tc {

std::string_view to_string(RobustMethod m) {
  switch (m) {
    case RobustMethod::Med: return "med";
    case RobustMethod::Rm: return "rm";
    case RobustMethod::Lms: return "lms";
    case RobustMethod::Lts: return "lts";
    case RobustMethod::Lqd: return "lqd";
    case RobustMethod::Dr: return "dr";
  }
  return "?";
}

RobustMethod parse_robust_method(std::string_view text) {
  for (auto m : {RobustMethod::Med, RobustMethod::Rm, RobustMethod::Lms, RobustMethod::Lts, RobustMethod::Lqd,
                 RobustMethod::Dr})
    if (text == to_string(m)) return m;
  throw InvalidArgument("unknown robust method '" + std::string(text) + "'");
}

Boundary parse_boundary(std::string_view text) {
  if (text == "na_pad") return Boundary::NaPad;
  if (text == "extrapolate") return Boundary::Extrapolate;
  throw InvalidArgument("unknown boundary mode '" + std::string(text) + "' (expected na_pad or extrapolate)");
}

Window Window::centered(std::span<const double> values) {
  Window w;
  const int h = static_cast<int>(values.size() / 2);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (is_missing(values[k])) continue;
    w.x.push_back(static_cast<double>(static_cast<int>(k) - h));
    w.y.push_back(values[k]);
  }
  return w;
}

Window Window::around(std::span<const double> values, std::size_t t, int h) {
  Window w;
  const long n = static_cast<long>(values.size());
  for (long i = -h; i <= h; ++i) {
    const long pos = static_cast<long>(t) + i;
    if (pos < 0 || pos >= n || is_missing(values[static_cast<std::size_t>(pos)])) continue;
    w.x.push_back(static_cast<double>(i));
    w.y.push_back(values[static_cast<std::size_t>(pos)]);
  }
  return w;
}

double median(std::vector<double> v) {
  if (v.empty()) return kMissing;
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::optional<double> med_window(std::span<const double> values) {
  std::vector<double> avail;
  for (double v : values)
    if (!is_missing(v)) avail.push_back(v);
  if (avail.empty()) return std::nullopt;
  return median(std::move(avail));
}

namespace {

double scale_of(const Window& w) {
  double s = 1.0;
  for (double y : w.y) s = std::max(s, std::abs(y));
  return s;
}

std::vector<double> residuals(const WindowFit& f, const Window& w) {
  std::vector<double> r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) r[i] = w.y[i] - f.value_at(w.x[i]);
  return r;
}

// Deterministic preference among near-equal objectives: smaller |slope|,
// then lexicographic coefficients.
bool coefficient_order(const WindowFit& a, const WindowFit& b) {
  if (std::abs(a.slope) != std::abs(b.slope)) return std::abs(a.slope) < std::abs(b.slope);
  if (a.level != b.level) return a.level < b.level;
  if (a.slope != b.slope) return a.slope < b.slope;
  return a.curvature < b.curvature;
}

struct Best {
  double objective = std::numeric_limits<double>::infinity();
  WindowFit fit;
  bool set = false;
};

// `objective` is in the units of y (not squared) so the tie tolerance is a
// residual-scale tolerance.
void consider(Best& best, double objective, const WindowFit& fit, double tie_tol) {
  if (!best.set || objective < best.objective - tie_tol) {
    best = Best{objective, fit, true};
    return;
  }
  if (std::abs(objective - best.objective) <= tie_tol && coefficient_order(fit, best.fit)) {
    best.fit = fit;
    best.objective = std::min(best.objective, objective);
  }
}

std::size_t lms_rank(std::size_t n) { return n / 2 + 1; }

long binom2(long n) { return n * (n - 1) / 2; }

int hp_of(std::size_t n, int p) { return static_cast<int>((static_cast<long>(n) + p + 1) / 2); }

// Least-squares polynomial fit on a subset, coefficients about the origin.
WindowFit ls_fit(const Window& w, const std::vector<int>& idx, int degree) {
  double cx = 0.0;
  for (int i : idx) cx += w.x[static_cast<std::size_t>(i)];
  cx /= static_cast<double>(idx.size());
  WindowFit f;
  f.degree = degree;
  if (degree == 1) {
    double my = 0.0;
    for (int i : idx) my += w.y[static_cast<std::size_t>(i)];
    my /= static_cast<double>(idx.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (int i : idx) {
      const double dx = w.x[static_cast<std::size_t>(i)] - cx;
      sxy += dx * (w.y[static_cast<std::size_t>(i)] - my);
      sxx += dx * dx;
    }
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.level = my - f.slope * cx;
    return f;
  }
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (int i : idx) {
    const double dx = w.x[static_cast<std::size_t>(i)] - cx;
    const Eigen::Vector3d row(1.0, dx, dx * dx);
    A += row * row.transpose();
    b += row * w.y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d g = A.fullPivLu().solve(b);
  f.level = g(0) - g(1) * cx + g(2) * cx * cx;
  f.slope = g(1) - 2.0 * g(2) * cx;
  f.curvature = g(2);
  return f;
}

template <class Visit>
void for_each_combination(int n, int k, Visit&& visit) {
  if (k > n || k <= 0) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

std::optional<WindowFit> rm_window(const Window& w) {
  const std::size_t n = w.size();
  if (n < 2) return std::nullopt;
  std::vector<double> inner(n);
  std::vector<double> pair;
  pair.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    pair.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) pair.push_back((w.y[i] - w.y[j]) / (w.x[i] - w.x[j]));
    inner[i] = median(pair);
  }
  WindowFit f;
  f.method = RobustMethod::Rm;
  f.slope = median(inner);
  std::vector<double> lv(n);
  for (std::size_t i = 0; i < n; ++i) lv[i] = w.y[i] - w.x[i] * f.slope;
  f.level = median(lv);
  return f;
}

double lms_objective(const WindowFit& fit, const Window& w) {
  std::vector<double> r = residuals(fit, w);
  for (double& v : r) v = v * v;
  const std::size_t k = lms_rank(r.size());
  std::nth_element(r.begin(), r.begin() + static_cast<long>(k - 1), r.end());
  return r[k - 1];
}

std::optional<WindowFit> lms_window(const Window& w, int degree) {
  if (degree < 1 || degree > 2) throw InvalidArgument("LMS supports degree 1 or 2");
  const std::size_t n = w.size();
  if (n < static_cast<std::size_t>(degree + 2)) return std::nullopt;
  const std::size_t k = lms_rank(n);
  const int m = degree + 2;
  const double tol = 1e-11 * scale_of(w);

  // The optimum is the Chebyshev fit of its best k-subset, which
  // equioscillates on degree + 2 of its points: every (degree+2)-subset's
  // minimax fit is a candidate; the intercept is then re-centred on the
  // narrowest strip holding k residuals.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return w.x[static_cast<std::size_t>(a)] < w.x[static_cast<std::size_t>(b)]; });

  Best best;
  std::vector<double> r(n);
  for_each_combination(static_cast<int>(n), m, [&](const std::vector<int>& c) {
    Eigen::MatrixXd M(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
      const auto p = static_cast<std::size_t>(order[static_cast<std::size_t>(c[static_cast<std::size_t>(i)])]);
      double xp = 1.0;
      for (int d = 0; d <= degree; ++d) {
        M(i, d) = xp;
        xp *= w.x[p];
      }
      M(i, m - 1) = (i % 2 == 0) ? 1.0 : -1.0;
      rhs(i) = w.y[p];
    }
    const Eigen::VectorXd sol = M.partialPivLu().solve(rhs);
    WindowFit f;
    f.method = RobustMethod::Lms;
    f.degree = degree;
    f.level = sol(0);
    f.slope = sol(1);
    f.curvature = degree == 2 ? sol(2) : 0.0;
    for (std::size_t i = 0; i < n; ++i) r[i] = w.y[i] - f.value_at(w.x[i]);
    std::vector<double> s = r;
    std::sort(s.begin(), s.end());
    double width = std::numeric_limits<double>::infinity();
    double mid = 0.0;
    for (std::size_t i = 0; i + k - 1 < n; ++i) {
      const double range = s[i + k - 1] - s[i];
      if (range < width) {
        width = range;
        mid = 0.5 * (s[i] + s[i + k - 1]);
      }
    }
    f.level += mid;
    consider(best, std::sqrt(lms_objective(f, w)), f, tol);
  });
  return best.fit;
}

int default_coverage(std::size_t n, int degree) { return hp_of(n, degree); }

double lts_objective(const WindowFit& fit, const Window& w, int coverage) {
  std::vector<double> r = residuals(fit, w);
  for (double& v : r) v = v * v;
  std::sort(r.begin(), r.end());
  double s = 0.0;
  for (int i = 0; i < coverage && i < static_cast<int>(r.size()); ++i) s += r[static_cast<std::size_t>(i)];
  return s;
}

std::optional<WindowFit> lts_window(const Window& w, int degree, std::optional<int> coverage) {
  if (degree < 1 || degree > 2) throw InvalidArgument("LTS supports degree 1 or 2");
  const std::size_t n = w.size();
  if (n < static_cast<std::size_t>(degree + 2)) return std::nullopt;
  const int k = coverage.value_or(default_coverage(n, degree));
  if (k < degree + 2 || k > static_cast<int>(n)) throw InvalidArgument("LTS coverage outside [degree+2, n]");
  const double tol = 1e-11 * scale_of(w);

  struct Cand {
    double trimmed;
    double total;
    WindowFit fit;
  };
  std::optional<Cand> best;
  for_each_combination(static_cast<int>(n), k, [&](const std::vector<int>& idx) {
    WindowFit f = ls_fit(w, idx, degree);
    f.method = RobustMethod::Lts;
    double ssr = 0.0;
    for (int i : idx) {
      const double e = w.y[static_cast<std::size_t>(i)] - f.value_at(w.x[static_cast<std::size_t>(i)]);
      ssr += e * e;
    }
    const double rt = std::sqrt(ssr);
    if (best && rt > best->trimmed + tol) return;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = w.y[i] - f.value_at(w.x[i]);
      total += e * e;
    }
    if (!best || rt < best->trimmed - tol) {
      best = Cand{rt, total, f};
      return;
    }
    // Tie on the trimmed sum: smaller total residual sum, then coefficients.
    const double tt = 1e-11 * scale_of(w) * scale_of(w);
    if (total < best->total - tt ||
        (std::abs(total - best->total) <= tt && coefficient_order(f, best->fit)))
      best = Cand{std::min(rt, best->trimmed), total, f};
  });
  return best->fit;
}

double lqd_objective(double slope, const Window& w) {
  const std::size_t n = w.size();
  const int hp = hp_of(n, 1);
  const long k = binom2(hp);
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(binom2(static_cast<long>(n))));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(std::abs((w.y[i] - w.y[j]) - slope * (w.x[i] - w.x[j])));
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  return d[static_cast<std::size_t>(k - 1)];
}

std::optional<WindowFit> lqd_window(const Window& w) {
  const std::size_t n = w.size();
  if (n < 3) return std::nullopt;
  // Q(slope) is the k-th smallest of |a_p - slope*b_p| over point pairs p;
  // its minimum sits at a kink (a_p/b_p) or where two pair terms cross.
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      a.push_back(w.y[j] - w.y[i]);
      b.push_back(w.x[j] - w.x[i]);
    }
  std::vector<double> cand;
  const std::size_t P = a.size();
  cand.reserve(P + P * (P - 1));
  for (std::size_t p = 0; p < P; ++p) cand.push_back(a[p] / b[p]);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = p + 1; q < P; ++q) {
      if (b[p] != b[q]) cand.push_back((a[p] - a[q]) / (b[p] - b[q]));
      cand.push_back((a[p] + a[q]) / (b[p] + b[q]));
    }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  const double tol = 1e-11 * scale_of(w);
  Best best;
  for (double s : cand) {
    WindowFit f;
    f.method = RobustMethod::Lqd;
    f.slope = s;
    consider(best, lqd_objective(s, w), f, tol);
  }
  WindowFit f = best.fit;
  std::vector<double> lv(n);
  for (std::size_t i = 0; i < n; ++i) lv[i] = w.y[i] - w.x[i] * f.slope;
  f.level = median(lv);
  return f;
}

namespace {

// Depth from residual signs (-1, 0, +1) of points sorted by x.
int depth_from_signs(const std::vector<int>& sign) {
  const int n = static_cast<int>(sign.size());
  int total_pos = 0;  // r >= 0
  int total_neg = 0;  // r <= 0
  for (int s : sign) {
    total_pos += s >= 0;
    total_neg += s <= 0;
  }
  int lpos = 0;
  int lneg = 0;
  int depth = n;
  for (int i = 0; i < n; ++i) {
    lpos += sign[static_cast<std::size_t>(i)] >= 0;
    lneg += sign[static_cast<std::size_t>(i)] <= 0;
    const int rpos = total_pos - lpos;
    const int rneg = total_neg - lneg;
    depth = std::min({depth, lpos + rneg, rpos + lneg});
  }
  return depth;
}

std::vector<std::size_t> x_order(const Window& w) {
  std::vector<std::size_t> o(w.size());
  std::iota(o.begin(), o.end(), std::size_t{0});
  std::sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return w.x[a] < w.x[b]; });
  return o;
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

int rdepth(double b0, double b1, const Window& w) {
  if (w.size() == 0) return 0;
  std::vector<int> sign;
  for (std::size_t i : x_order(w)) sign.push_back(sgn(w.y[i] - b0 - b1 * w.x[i]));
  return depth_from_signs(sign);
}

std::optional<WindowFit> dr_window(const Window& w) {
  const std::size_t n = w.size();
  if (n < 2) return std::nullopt;
  const auto order = x_order(w);
  struct Cand {
    int depth;
    double medres;
    WindowFit fit;
  };
  std::optional<Cand> best;
  std::vector<int> sign(n);
  std::vector<double> absr(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const std::size_t i = order[a];
      const std::size_t j = order[b];
      const double dx = w.x[j] - w.x[i];
      const double dy = w.y[j] - w.y[i];
      WindowFit f;
      f.method = RobustMethod::Dr;
      f.slope = dy / dx;
      f.level = w.y[i] - f.slope * w.x[i];
      // Residual signs from the orientation of (i, j, k); exact on integer data.
      for (std::size_t c = 0; c < n; ++c) {
        const std::size_t k = order[c];
        sign[c] = sgn((w.y[k] - w.y[i]) * dx - dy * (w.x[k] - w.x[i]));
        absr[c] = std::abs(w.y[k] - f.value_at(w.x[k]));
      }
      const int depth = depth_from_signs(sign);
      const double mr = median(absr);
      if (!best || depth > best->depth ||
          (depth == best->depth &&
           (mr < best->medres || (mr == best->medres && coefficient_order(f, best->fit))))) {
        best = Cand{depth, mr, f};
      }
    }
  return best->fit;
}

std::optional<WindowFit> fit_window(RobustMethod m, const Window& w, int degree) {
  if (degree == 2 && m != RobustMethod::Lms && m != RobustMethod::Lts)
    throw InvalidArgument("degree 2 is only available for lms and lts");
  switch (m) {
    case RobustMethod::Med: {
      if (w.size() == 0) return std::nullopt;
      WindowFit f;
      f.method = m;
      f.level = median(w.y);
      return f;
    }
    case RobustMethod::Rm: return rm_window(w);
    case RobustMethod::Lms: return lms_window(w, degree);
    case RobustMethod::Lts: return lts_window(w, degree);
    case RobustMethod::Lqd: return lqd_window(w);
    case RobustMethod::Dr: return dr_window(w);
  }
  return std::nullopt;
}

TrendEstimate robust_smooth(const TimeSeries& series, RobustMethod method, int h, int degree, Boundary boundary) {
  if (h < 1) throw InvalidArgument("robust smoothing needs h >= 1");
  if (degree < 1 || degree > 2) throw InvalidArgument("degree must be 1 or 2");
  if (degree == 2 && method != RobustMethod::Lms && method != RobustMethod::Lts)
    throw InvalidArgument("degree 2 is only available for lms and lts");
  const std::size_t n = series.size();
  if (n < static_cast<std::size_t>(2 * h + 1)) throw InvalidArgument("series shorter than the window");

  const std::string tag(to_string(method));
  TrendEstimate out{series.start(), std::vector<double>(n, kMissing), std::vector<std::string>(n)};
  const auto& y = series.values();

  if (boundary == Boundary::NaPad) {
    for (std::size_t t = 0; t < n; ++t) {
      const Window w = Window::around(y, t, h);
      if (auto f = fit_window(method, w, degree)) {
        out.values[t] = f->level;
        out.filter_id[t] = w.size() == static_cast<std::size_t>(2 * h + 1)
                               ? tag + ":full"
                               : tag + ":na_pad:n=" + std::to_string(w.size());
      }
    }
    return out;
  }

  // Extrapolation from the first and last full-window fits.
  std::vector<std::optional<WindowFit>> fits(n);
  std::optional<std::size_t> first;
  std::optional<std::size_t> last;
  for (std::size_t t = static_cast<std::size_t>(h); t + static_cast<std::size_t>(h) < n; ++t) {
    const Window w = Window::around(y, t, h);
    if (w.size() != static_cast<std::size_t>(2 * h + 1)) continue;
    fits[t] = fit_window(method, w, degree);
    if (fits[t]) {
      out.values[t] = fits[t]->level;
      out.filter_id[t] = tag + ":full";
      if (!first) first = t;
      last = t;
    }
  }
  if (!first) return out;
  for (std::size_t t = 0; t < *first; ++t) {
    const double q = static_cast<double>(t) - static_cast<double>(*first);
    out.values[t] = fits[*first]->value_at(q);
    out.filter_id[t] = tag + ":extrapolated:q=" + std::to_string(static_cast<long>(q));
  }
  for (std::size_t t = *last + 1; t < n; ++t) {
    const double q = static_cast<double>(t - *last);
    out.values[t] = fits[*last]->value_at(q);
    out.filter_id[t] = tag + ":extrapolated:q=" + std::to_string(static_cast<long>(q));
  }
  return out;
}

}  // namespace tc
