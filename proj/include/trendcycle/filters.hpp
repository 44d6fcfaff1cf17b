#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trendcycle/series.hpp"

namespace tc {

/// Finite moving average with weights indexed -lower..upper. The estimate at
/// t is sum_j w_j * y_{t+j}.
class MovingAverage {
 public:
  MovingAverage() = default;
  MovingAverage(int lower, int upper, std::vector<double> weights);

  [[nodiscard]] int lower() const { return lower_; }
  [[nodiscard]] int upper() const { return upper_; }
  [[nodiscard]] std::size_t length() const { return weights_.size(); }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  /// Weight at offset j, zero outside [-lower, upper].
  [[nodiscard]] double at(int j) const;

  [[nodiscard]] double sum() const;
  [[nodiscard]] double sum_of_squares() const;
  [[nodiscard]] bool is_symmetric(double tol = 1e-12) const;
  /// Time reversal: w'_j = w_{-j}.
  [[nodiscard]] MovingAverage reversed() const;

  /// Applies the filter centred at position t. The caller guarantees that
  /// t - lower >= 0 and t + upper < values.size().
  [[nodiscard]] double apply_at(std::span<const double> values, std::size_t t) const;

 private:
  int lower_ = 0;
  int upper_ = 0;
  std::vector<double> weights_{1.0};
};

/// A symmetric filter plus end-of-series members for q = 0..h-1 (q = number
/// of future observations available).
struct FilterSet {
  std::string name;
  int h = 0;
  MovingAverage symmetric;
  std::vector<MovingAverage> asymmetric;  // indexed by q
};

/// Local polynomial design on j = -h..h with a diagonal kernel.
struct PolyBasis {
  int h = 0;
  int degree = 0;
  Eigen::MatrixXd X;       // (2h+1) x (degree+1), rows (1, j, ..., j^d)
  Eigen::VectorXd kernel;  // diagonal of K
};

/// Constrained minimum-revision asymmetric filter specification.
///
/// `degree` is the reference trend degree d of the local model, `preserved`
/// is d* (polynomials up to d* are reproduced exactly). `slope_ratio` is
/// delta/sigma for the j^(d*+1) term; only d in {d*, d*+1} is supported.
struct MmsreSpec {
  int degree = 1;
  int preserved = 0;
  double slope_ratio = 0.0;
  int q = 0;
};

// --- kernels and designs -------------------------------------------------

/// Henderson kernel on j = -h..h.
Eigen::VectorXd henderson_kernel(int h);
Eigen::VectorXd uniform_kernel(int h);
/// Design matrix with columns j^0..j^degree for j in [lo, hi].
Eigen::MatrixXd polynomial_design(int lo, int hi, int degree);
PolyBasis poly_basis(int h, int degree, const Eigen::VectorXd& kernel);

// --- construction --------------------------------------------------------

/// theta = K X (X'KX)^-1 e1.
MovingAverage local_poly_filter(int h, int degree, const Eigen::VectorXd& kernel);
/// 2h+1-term Henderson filter (local cubic fit).
MovingAverage henderson_filter(int h);

/// Slope-to-noise ratio implied by an I-C ratio: 2 / (R sqrt(pi)).
double slope_ratio_from_icr(double R);

/// Minimum mean squared revision filter on the observed offsets [lo, hi] of
/// a (2h+1)-term target. U holds the exactly preserved columns, Z the biased
/// columns with per-column delta/sigma ratios. Rows of U and Z run over
/// j = -h..h. Throws InvalidArgument when the KKT system is singular.
MovingAverage mmsre_filter(const Eigen::VectorXd& target, int h, int lo, int hi,
                           const Eigen::MatrixXd& U, const Eigen::MatrixXd& Z,
                           const Eigen::VectorXd& ratios);

/// End-of-series asymmetric filter (p = h, f = spec.q) for a symmetric target.
MovingAverage mmsre_asym_filter(const MovingAverage& sym, const MmsreSpec& spec);

/// Henderson symmetric filter with Musgrave end filters for the I-C ratio R.
FilterSet musgrave_filter_set(int h, double R);

/// Truncate a symmetric filter to offsets -h..q and renormalise.
MovingAverage cut_and_normalize(const MovingAverage& sym, int q);
FilterSet cut_and_normalize_set(const MovingAverage& sym, std::string name);

/// Cascade linear filter from a 13-row coefficient table
/// ("j,weight" rows, '#' comment lines, a provenance comment required).
FilterSet clf_filter_set(std::istream& table);
FilterSet clf_filter_set_from_file(const std::string& path);

// --- I-C ratio -----------------------------------------------------------

double icr(const TimeSeries& series, const MovingAverage& sym);
/// 4 (9 terms) for R < 1, 6 (13 terms) for 1 <= R <= 3.5, 11 (23 terms) above.
int select_henderson_length(double R);

// --- application ---------------------------------------------------------

/// Interior points use the symmetric member, the last h points the end
/// members, the first h points the time-reversed end members.
TrendEstimate apply_filter_set(const TimeSeries& series, const FilterSet& fs);

/// Identifier stored in TrendEstimate::filter_id.
std::string filter_label(const std::string& set_name, int q, bool at_start, int h);

/// Checks that `ma` reproduces j^k for k = 0..degree at the origin.
bool preserves_polynomial(const MovingAverage& ma, int degree, double tol = 1e-9);

/// CSV rows "filter_id,q,j,weight" (header included).
void write_coefficients_csv(std::ostream& out, const std::vector<FilterSet>& sets);

}  // namespace tc
