#pragma once
// Reference implementations used only by the tests. They avoid the library's
// linear algebra and algorithms: plain vectors, Gauss-Jordan elimination,
// brute force.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

// Gauss-Jordan with partial pivoting.
inline Vec solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = 0; c < n; ++c) b[c] /= a[c][c];
  return b;
}

// Least squares by normal equations.
inline Vec least_squares(const Mat& A, const Vec& b) {
  const std::size_t p = A[0].size();
  Mat n(p, Vec(p, 0.0));
  Vec r(p, 0.0);
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < p; ++j) {
      r[j] += A[i][j] * b[i];
      for (std::size_t k = 0; k < p; ++k) n[j][k] += A[i][j] * A[i][k];
    }
  return solve(n, r);
}

inline Vec henderson_kernel(int h) {
  Vec k;
  const double a = (h + 1.0) * (h + 1.0), b = (h + 2.0) * (h + 2.0), c = (h + 3.0) * (h + 3.0);
  for (int j = -h; j <= h; ++j) {
    const double jj = static_cast<double>(j) * j;
    k.push_back((1 - jj / a) * (1 - jj / b) * (1 - jj / c));
  }
  return k;
}

// Weighted local polynomial: theta_j = k_j * x_j' (X'KX)^{-1} e1.
inline Vec wls_filter(int h, int degree, const Vec& kernel) {
  const int p = degree + 1;
  Mat m(p, Vec(p, 0.0));
  for (int j = -h; j <= h; ++j)
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) m[a][b] += kernel[j + h] * std::pow(j, a) * std::pow(j, b);
  Vec e1(p, 0.0);
  e1[0] = 1.0;
  const Vec coef = solve(m, e1);
  Vec theta;
  for (int j = -h; j <= h; ++j) {
    double s = 0.0;
    for (int a = 0; a < p; ++a) s += coef[a] * std::pow(j, a);
    theta.push_back(kernel[j + h] * s);
  }
  return theta;
}

// Minimum revision filter on -h..q preserving constants, with a linear-trend
// bias term weighted by `ratio`, obtained by eliminating the last weight and
// solving the unconstrained least-squares problem.
inline Vec musgrave_qp(const Vec& sym, int h, int q, double ratio) {
  const int m = h + q + 1;
  const int free_n = m - 1;
  // v = a + B u with a = e_last, B = [I; -1'].
  double jt = 0.0;
  for (int j = -h; j <= h; ++j) jt += j * sym[j + h];
  Mat A;
  Vec b;
  for (int i = 0; i < m; ++i) {
    Vec row(free_n, 0.0);
    if (i < free_n) row[i] = 1.0;
    else std::fill(row.begin(), row.end(), -1.0);
    A.push_back(row);
    const double ai = i == m - 1 ? 1.0 : 0.0;
    b.push_back(sym[i] - ai);
  }
  Vec row(free_n, 0.0);
  for (int i = 0; i < free_n; ++i) row[i] = ratio * ((i - h) - q);
  A.push_back(row);
  b.push_back(ratio * (jt - q));
  const Vec u = least_squares(A, b);
  Vec v(u.begin(), u.end());
  v.push_back(1.0 - std::accumulate(u.begin(), u.end(), 0.0));
  return v;
}

// Gamma = S - H for a filter (weights on -p..f) applied on rows p..n-f-1,
// then Delta = Gamma'Gamma and tr(Delta), tr(Delta^2) by explicit products.
struct Traces {
  double t1;
  double t2;
};

inline Traces dense_delta_traces(const Vec& w, int p, int f, int n) {
  const int m = n - p - f;
  Mat g(m, Vec(n, 0.0));
  for (int r = 0; r < m; ++r) {
    const int t = r + p;
    g[r][t] += 1.0;
    for (int j = -p; j <= f; ++j) g[r][t + j] -= w[j + p];
  }
  Mat d(n, Vec(n, 0.0));
  for (int r = 0; r < m; ++r)
    for (int i = 0; i < n; ++i) {
      if (g[r][i] == 0.0) continue;
      for (int k = 0; k < n; ++k) d[i][k] += g[r][i] * g[r][k];
    }
  double t1 = 0.0, t2 = 0.0;
  for (int i = 0; i < n; ++i) {
    t1 += d[i][i];
    for (int k = 0; k < n; ++k) t2 += d[i][k] * d[k][i];
  }
  return {t1, t2};
}

// --- robust regression objectives --------------------------------------

inline Vec residuals(const Vec& x, const Vec& y, double b0, double b1, double b2 = 0.0) {
  Vec r;
  for (std::size_t i = 0; i < x.size(); ++i) r.push_back(y[i] - (b0 + b1 * x[i] + b2 * x[i] * x[i]));
  return r;
}

inline double lms(const Vec& r) {
  Vec s;
  for (double v : r) s.push_back(v * v);
  std::sort(s.begin(), s.end());
  return s[r.size() / 2];  // (floor(n/2)+1)-th smallest
}

inline double lts(const Vec& r, int coverage) {
  Vec s;
  for (double v : r) s.push_back(v * v);
  std::sort(s.begin(), s.end());
  return std::accumulate(s.begin(), s.begin() + coverage, 0.0);
}

inline double lqd(const Vec& r, int hp) {
  Vec d;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = i + 1; j < r.size(); ++j) d.push_back(std::abs(r[i] - r[j]));
  std::sort(d.begin(), d.end());
  return d[static_cast<std::size_t>(hp * (hp - 1) / 2 - 1)];
}

inline double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Repeated median line.
inline std::pair<double, double> repeated_median(const Vec& x, const Vec& y) {
  Vec inner;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec s;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) s.push_back((y[j] - y[i]) / (x[j] - x[i]));
    inner.push_back(median(s));
  }
  const double b1 = median(inner);
  Vec lv;
  for (std::size_t i = 0; i < x.size(); ++i) lv.push_back(y[i] - b1 * x[i]);
  return {median(lv), b1};
}

// Regression depth by definition: for each split value u among the x's,
// count points left (x <= u) / right (x > u) with nonnegative / nonpositive
// residuals. x need not be sorted.
inline int rdepth(const Vec& x, const Vec& y, double b0, double b1) {
  const Vec r = residuals(x, y, b0, b1);
  int best = static_cast<int>(x.size());
  for (double u : x) {
    int lp = 0, ln = 0, rp = 0, rn = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool left = x[i] <= u;
      if (r[i] >= 0) (left ? lp : rp)++;
      if (r[i] <= 0) (left ? ln : rn)++;
    }
    best = std::min({best, lp + rn, rp + ln});
  }
  return best;
}

// Exhaustive LTS: best least-squares fit over all coverage-subsets.
inline double lts_exhaustive(const Vec& x, const Vec& y, int degree, int coverage) {
  const int n = static_cast<int>(x.size());
  std::vector<int> idx(coverage);
  std::iota(idx.begin(), idx.end(), 0);
  double best = INFINITY;
  while (true) {
    Mat A;
    Vec b;
    for (int i : idx) {
      Vec row{1.0};
      for (int d = 1; d <= degree; ++d) row.push_back(std::pow(x[i], d));
      A.push_back(row);
      b.push_back(y[i]);
    }
    const Vec c = least_squares(A, b);
    double ss = 0.0;
    for (std::size_t k = 0; k < A.size(); ++k) {
      double fit = 0.0;
      for (std::size_t d = 0; d < c.size(); ++d) fit += c[d] * A[k][d];
      ss += (b[k] - fit) * (b[k] - fit);
    }
    best = std::min(best, ss);
    int i = coverage - 1;
    while (i >= 0 && idx[i] == n - coverage + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < coverage; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

}  // namespace oracle
