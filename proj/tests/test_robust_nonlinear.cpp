#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trendcycle/errors.hpp"
#include "trendcycle/robust_nonlinear.hpp"

using namespace tc;

namespace {

Window line_window(int h, double b0, double b1, std::vector<std::pair<int, double>> shocks = {}) {
  Window w;
  for (int j = -h; j <= h; ++j) {
    w.x.push_back(j);
    w.y.push_back(b0 + b1 * j);
  }
  for (auto [j, c] : shocks) w.y[static_cast<std::size_t>(j + h)] += c;
  return w;
}

Window noisy_window(std::mt19937_64& rng, int h) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0, 1);
  Window w;
  const double b0 = 10 * nd(rng), b1 = nd(rng);
  for (int j = -h; j <= h; ++j) {
    w.x.push_back(j);
    double e = nd(rng);
    if (u(rng) < 0.2) e += 15 * nd(rng);
    w.y.push_back(b0 + b1 * j + e);
  }
  return w;
}

}  // namespace

TEST_CASE("method and boundary names") {
  for (auto m : {RobustMethod::Med, RobustMethod::Rm, RobustMethod::Lms, RobustMethod::Lts, RobustMethod::Lqd,
                 RobustMethod::Dr})
    CHECK(parse_robust_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_robust_method("ols"), InvalidArgument);
  CHECK(parse_boundary("na_pad") == Boundary::NaPad);
  CHECK(parse_boundary("extrapolate") == Boundary::Extrapolate);
  CHECK_THROWS_AS(parse_boundary("mirror"), InvalidArgument);
}

TEST_CASE("median and running median") {
  CHECK(tc::median({3, 1, 2}) == 2.0);
  CHECK(tc::median({4, 1, 3, 2}) == 2.5);
  const std::vector<double> v{1, 100, 3, 4, 5};
  CHECK(*med_window(v) == 4.0);
  const std::vector<double> gaps{kMissing, 2, kMissing};
  CHECK(*med_window(gaps) == 2.0);
  const std::vector<double> none{kMissing, kMissing};
  CHECK_FALSE(med_window(none).has_value());
}

TEST_CASE("windows skip missing values") {
  const std::vector<double> v{1, kMissing, 3, 4, 5};
  const Window w = Window::around(v, 1, 2);
  CHECK(w.x == std::vector<double>{-1, 1, 2});
  CHECK(w.y == std::vector<double>{1, 3, 4});
  const Window c = Window::centered(v);
  CHECK(c.x == std::vector<double>{-2, 0, 1, 2});
}

TEST_CASE("line estimators recover an exact line under three outliers") {
  const Window w = line_window(6, 5.0, 0.7, {{-4, 30.0}, {1, -25.0}, {5, 12.0}});
  for (auto m : {RobustMethod::Rm, RobustMethod::Lms, RobustMethod::Lts, RobustMethod::Lqd, RobustMethod::Dr}) {
    CAPTURE(to_string(m));
    const auto f = fit_window(m, w, 1);
    REQUIRE(f.has_value());
    CHECK(f->level == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(f->slope == doctest::Approx(0.7).epsilon(1e-10));
  }
}

TEST_CASE("degree-2 LMS and LTS recover a parabola") {
  Window w;
  for (int j = -6; j <= 6; ++j) {
    w.x.push_back(j);
    w.y.push_back(2.0 - 0.3 * j + 0.05 * j * j + (j == 2 ? 40.0 : 0.0) + (j == -5 ? -20.0 : 0.0));
  }
  for (auto m : {RobustMethod::Lms, RobustMethod::Lts}) {
    const auto f = fit_window(m, w, 2);
    REQUIRE(f.has_value());
    CHECK(std::abs(f->level - 2.0) < 1e-10);
    CHECK(std::abs(f->curvature - 0.05) < 1e-10);
  }
  CHECK_THROWS_AS(fit_window(RobustMethod::Rm, w, 2), InvalidArgument);
  CHECK_THROWS_AS(fit_window(RobustMethod::Lqd, w, 2), InvalidArgument);
  CHECK_THROWS_AS(lms_window(w, 3), InvalidArgument);
}

TEST_CASE("repeated median matches the oracle") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const Window w = noisy_window(rng, 1 + rep % 8);
    const auto f = rm_window(w);
    REQUIRE(f.has_value());
    const auto [b0, b1] = oracle::repeated_median(w.x, w.y);
    CHECK(f->slope == doctest::Approx(b1).epsilon(1e-12));
    CHECK(f->level == doctest::Approx(b0).epsilon(1e-12));
  }
}

TEST_CASE("objectives agree with the oracles") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 50; ++rep) {
    const Window w = noisy_window(rng, 6);
    const WindowFit f{nd(rng), nd(rng), 0.0, 1, RobustMethod::Lms};
    const auto r = oracle::residuals(w.x, w.y, f.level, f.slope);
    CHECK(lms_objective(f, w) == doctest::Approx(oracle::lms(r)).epsilon(1e-12));
    CHECK(lts_objective(f, w, 7) == doctest::Approx(oracle::lts(r, 7)).epsilon(1e-12));
    CHECK(rdepth(f.level, f.slope, w) == oracle::rdepth(w.x, w.y, f.level, f.slope));
  }
  CHECK(default_coverage(13, 1) == 7);
  CHECK(default_coverage(13, 2) == 8);
}

TEST_CASE("LMS, LTS and LQD are not beaten by random candidates") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    const Window w = noisy_window(rng, 6);
    const int n = static_cast<int>(w.size());
    const int hp = (n + 1 + 1) / 2;
    const auto lms = lms_window(w);
    const auto lts = lts_window(w);
    const auto lqd = lqd_window(w);
    REQUIRE((lms && lts && lqd));
    const double lms_best = oracle::lms(oracle::residuals(w.x, w.y, lms->level, lms->slope));
    const double lts_best = oracle::lts(oracle::residuals(w.x, w.y, lts->level, lts->slope), default_coverage(w.size(), 1));
    const double lqd_best = oracle::lqd(oracle::residuals(w.x, w.y, 0.0, lqd->slope), hp);
    for (int k = 0; k < 10000; ++k) {
      const double b0 = lms->level + 3 * nd(rng), b1 = lms->slope + nd(rng);
      const auto r = oracle::residuals(w.x, w.y, b0, b1);
      CHECK(lms_best <= oracle::lms(r) * (1 + 1e-12) + 1e-12);
      CHECK(lts_best <= oracle::lts(r, default_coverage(w.size(), 1)) * (1 + 1e-12) + 1e-12);
      CHECK(lqd_best <= oracle::lqd(r, hp) * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("LTS matches exhaustive subset search") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const Window w = noisy_window(rng, 6);
    for (int degree : {1, 2}) {
      const int cov = default_coverage(w.size(), degree);
      const auto f = lts_window(w, degree);
      REQUIRE(f.has_value());
      CHECK(lts_objective(*f, w, cov) == doctest::Approx(oracle::lts_exhaustive(w.x, w.y, degree, cov)).epsilon(1e-9));
    }
  }
}

TEST_CASE("deepest regression has maximal depth among candidates") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    const Window w = noisy_window(rng, 6);
    const auto f = dr_window(w);
    REQUIRE(f.has_value());
    const int best = oracle::rdepth(w.x, w.y, f->level, f->slope);
    for (int k = 0; k < 2000; ++k) CHECK(best >= oracle::rdepth(w.x, w.y, f->level + 3 * nd(rng), f->slope + nd(rng)));
    // A line above every point has depth 0.
    CHECK(rdepth(1e6, 0.0, w) == 0);
  }
}

TEST_CASE("running smoothers and boundaries") {
  std::vector<double> v;
  for (int i = 0; i < 30; ++i) v.push_back(3.0 + 0.5 * i + (i == 12 ? 20.0 : 0.0));
  const TimeSeries y(Period{2020, 1}, v);
  for (auto m : {RobustMethod::Rm, RobustMethod::Lms, RobustMethod::Lts, RobustMethod::Dr}) {
    const TrendEstimate e = robust_smooth(y, m, 3, 1, Boundary::Extrapolate);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(e.values[i] == doctest::Approx(3.0 + 0.5 * i).epsilon(1e-10));
    CHECK(e.filter_id[0] == std::string(to_string(m)) + ":extrapolated:q=-3");
    CHECK(e.filter_id[10] == std::string(to_string(m)) + ":full");
  }
  const TrendEstimate pad = robust_smooth(y, RobustMethod::Med, 3, 1, Boundary::NaPad);
  CHECK(pad.filter_id[0] == "med:na_pad:n=4");
  CHECK(pad.values[0] == doctest::Approx(3.75));
  CHECK(std::abs(pad.values[12] - (3.0 + 0.5 * 12)) <= 0.5);
  CHECK_THROWS_AS(robust_smooth(y, RobustMethod::Rm, 3, 2), InvalidArgument);
  CHECK_THROWS_AS(robust_smooth(y, RobustMethod::Rm, 20), InvalidArgument);
  CHECK_THROWS_AS(robust_smooth(y, RobustMethod::Rm, 0), InvalidArgument);
}

TEST_CASE("estimators are equivariant under shifts and scaling") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Window w = noisy_window(rng, 5);
    Window t = w;
    for (std::size_t i = 0; i < t.size(); ++i) t.y[i] = 2.5 * w.y[i] + 7.0 - 0.4 * w.x[i];
    for (auto m : {RobustMethod::Rm, RobustMethod::Lms, RobustMethod::Lts, RobustMethod::Lqd, RobustMethod::Dr}) {
      CAPTURE(to_string(m));
      const auto a = fit_window(m, w, 1), b = fit_window(m, t, 1);
      REQUIRE((a && b));
      CHECK(b->level == doctest::Approx(2.5 * a->level + 7.0).epsilon(1e-8));
      CHECK(b->slope == doctest::Approx(2.5 * a->slope - 0.4).epsilon(1e-8));
    }
  }
}
