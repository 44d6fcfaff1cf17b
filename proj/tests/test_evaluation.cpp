#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "trendcycle/errors.hpp"
#include "trendcycle/evaluation.hpp"
#include "trendcycle/filters.hpp"

using namespace tc;

namespace {

TrendEstimate as_estimate(Period start, std::vector<double> v) {
  TrendEstimate e;
  e.start = start;
  e.values = std::move(v);
  e.filter_id.assign(e.values.size(), "x");
  return e;
}

Estimator musgrave_estimator() {
  const FilterSet fs = musgrave_filter_set(6, 3.5);
  return [fs](const TimeSeries& y) { return apply_filter_set(y, fs); };
}

}  // namespace

TEST_CASE("scenario simulation") {
  ScenarioSpec spec;
  const TimeSeries y = simulate(spec);
  REQUIRE(y.size() == 72);
  CHECK(y.start() == Period{2018, 1});
  CHECK(y.end() == Period{2023, 12});
  const std::size_t k = *y.position(Period{2022, 1});
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(i == k ? 110.0 : 100.0));

  spec.shock_kind = ShockKind::LS;
  spec.trend_degree = 1;
  const TimeSeries ls = simulate(spec);
  const double jump = 0.10 * spec.trend_at(Period{2022, 1});
  for (std::size_t i = 0; i < ls.size(); ++i)
    CHECK(ls[i] == doctest::Approx(100 + 0.5 * static_cast<double>(i) + (i >= k ? jump : 0.0)));

  spec.trend_degree = 2;
  spec.shock_scale = ShockScale::Multiplicative;
  const TimeSeries mult = simulate(spec);
  const TimeSeries tr = scenario_trend(spec);
  CHECK(tr[*tr.position(Period{2021, 1})] == doctest::Approx(100.0));
  CHECK(mult[k + 3] == doctest::Approx(1.1 * tr[k + 3]));
  CHECK(mult[k - 1] == doctest::Approx(tr[k - 1]));

  spec.shock_scale = ShockScale::Absolute;
  spec.shock_size = -4.0;
  CHECK(simulate(spec)[k] == doctest::Approx(tr[k] - 4.0));

  ScenarioSpec bad;
  bad.shock_date = Period{2030, 1};
  CHECK_THROWS_AS(simulate(bad), InvalidArgument);
  bad = ScenarioSpec{};
  bad.trend_degree = 3;
  CHECK_THROWS_AS(simulate(bad), InvalidArgument);
}

TEST_CASE("scenario JSON round trip") {
  ScenarioSpec spec;
  spec.trend_degree = 2;
  spec.shock_kind = ShockKind::LS;
  spec.shock_size = 0.25;
  spec.vertex = Period{2020, 7};
  const ScenarioSpec back = scenario_from_json(scenario_to_json(spec));
  CHECK(back.trend_degree == 2);
  CHECK(back.shock_kind == ShockKind::LS);
  CHECK(back.shock_size == 0.25);
  CHECK(back.vertex == Period{2020, 7});
  CHECK(scenario_to_json(back) == scenario_to_json(spec));
  CHECK(scenario_from_json("{}").length == 72);
  CHECK_THROWS_AS(scenario_from_json(R"({"colour": 1})"), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(R"({"length": "x"})"), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(R"({"shock_date": "2040-01"})"), ConfigError);
  CHECK_THROWS_AS(scenario_from_json("[1]"), ConfigError);
}

TEST_CASE("vintage matrix") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<double> v;
  for (int i = 0; i < 60; ++i) v.push_back(100 + 0.3 * i + nd(rng));
  const TimeSeries y(Period{2018, 1}, v);
  const Estimator est = musgrave_estimator();
  const VintageMatrix vm = vintages(y, est, Period{2021, 1});
  REQUIRE(vm.size() == 24);
  CHECK(vm.publication.front() == Period{2021, 1});
  CHECK(vm.rows.front().size() == 37);
  CHECK(vm.rows.back().size() == 60);
  // The last vintage is the full-sample estimate.
  const TrendEstimate full = est(y);
  for (std::size_t i = 0; i < 60; ++i) CHECK(vm.final_row()[i] == full.values[i]);
  // Once h later observations exist, the estimate no longer changes.
  for (std::size_t k = 0; k + 6 < vm.size(); ++k) {
    const Period t = vm.publication[k];
    for (std::size_t l = k + 6; l < vm.size(); ++l)
      CHECK(vm.cell(vm.publication[l], t) == doctest::Approx(vm.cell(vm.publication[k + 6], t)).epsilon(1e-13));
  }
  CHECK(is_missing(vm.cell(Period{2021, 1}, Period{2021, 2})));
  CHECK(is_missing(vm.cell(Period{2030, 1}, Period{2021, 2})));
  CHECK_THROWS_AS(vintages(y, est, Period{2010, 1}), InvalidArgument);

  // Estimator failures are recorded, not fatal.
  const VintageMatrix short_vm = vintages(y, est, Period{2018, 3});
  CHECK_FALSE(short_vm.diagnostics.empty());
  CHECK(is_missing(short_vm.rows.front()[0]));

  std::ostringstream csv;
  write_vintages_csv(csv, vm);
  CHECK(csv.str().rfind("publication_date,period,estimate\n2021-01,2018-01,", 0) == 0);
}

TEST_CASE("revision metrics") {
  VintageMatrix vm;
  vm.series_start = Period{2020, 1};
  vm.publication = {Period{2020, 2}, Period{2020, 3}, Period{2020, 4}};
  vm.rows = {{1.0, 2.0}, {1.0, 2.5, 3.0}, {1.0, 3.0, 3.5, 4.0}};
  const RevisionMetrics m = revision_metrics(vm, 1);
  REQUIRE(m.periods.size() == 3);
  CHECK(m.periods.front() == Period{2020, 2});
  CHECK(m.revisions[0][0] == doctest::Approx(-1.0));
  CHECK(m.revisions[0][1] == doctest::Approx(-0.5));
  CHECK(m.revisions[1][0] == doctest::Approx(-0.5));
  CHECK(m.revisions[1][1] == doctest::Approx(0.0));
  CHECK(m.revisions[2][0] == doctest::Approx(0.0));
  CHECK(is_missing(m.revisions[2][1]));
  CHECK(m.count == 5);
  CHECK(m.max_abs == doctest::Approx(1.0));
  CHECK(m.mean_abs == doctest::Approx(2.0 / 5.0));
  CHECK_THROWS_AS(revision_metrics(vm, -1), InvalidArgument);

  // A constant series has no revisions at all.
  const TimeSeries flat(Period{2018, 1}, std::vector<double>(48, 7.0));
  const RevisionMetrics z = revision_metrics(vintages(flat, musgrave_estimator(), Period{2020, 1}), 6);
  CHECK(z.max_abs < 1e-12);
}

TEST_CASE("turning points") {
  const Period s{2020, 1};
  const auto up = turning_points(as_estimate(s, {3, 2, 1, 0, 1, 2}));
  REQUIRE(up.size() == 1);
  CHECK(up[0].kind == TurningKind::Upturn);
  CHECK(up[0].date == Period{2020, 4});
  CHECK(up[0].signal == Period{2020, 5});
  const auto down = turning_points(as_estimate(s, {0, 1, 2, 3, 2, 1}));
  REQUIRE(down.size() == 1);
  CHECK(down[0].kind == TurningKind::Downturn);
  CHECK(turning_points(as_estimate(s, {1, 2, 3, 4, 5, 6, 7})).empty());
  CHECK(turning_points(as_estimate(s, {3, 2, 1, 0, 1})).empty());
  CHECK(turning_points(as_estimate(s, {3, 2, kMissing, 0, 1, 2})).empty());

  // Invariant under increasing affine maps; kinds swap under negation.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  std::vector<double> x;
  for (int i = 0; i < 80; ++i) x.push_back(std::sin(0.2 * i) + 0.05 * nd(rng));
  std::vector<double> ax, nx;
  for (double v : x) {
    ax.push_back(3.0 * v + 11.0);
    nx.push_back(-v);
  }
  const auto a = turning_points(as_estimate(s, x));
  const auto b = turning_points(as_estimate(s, ax));
  const auto c = turning_points(as_estimate(s, nx));
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  CHECK_FALSE(a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].date == b[i].date);
    CHECK(a[i].kind == b[i].kind);
    CHECK(a[i].date == c[i].date);
    CHECK(a[i].kind != c[i].kind);
  }
  std::ostringstream csv;
  write_turning_points_csv(csv, up);
  CHECK(csv.str() == "date,signal,kind\n2020-04,2020-05,upturn\n");
}

TEST_CASE("segmented estimation around a break") {
  const FilterSet fs = musgrave_filter_set(6, 3.5);
  std::vector<double> v;
  for (int i = 0; i < 60; ++i) v.push_back(i < 30 ? 100.0 : 120.0);
  const TimeSeries y(Period{2018, 1}, v);
  const Period brk = y.period(30);

  const TrendEstimate both = segmented_estimate(y, brk, fs, SegmentSide::Both);
  for (std::size_t i = 0; i < 60; ++i) CHECK(both.values[i] == doctest::Approx(v[i]).epsilon(1e-12));
  CHECK(both.filter_id[29].ends_with(":cut"));
  CHECK(both.filter_id[30].ends_with(":cut"));
  CHECK_FALSE(both.filter_id[20].ends_with(":cut"));

  const TrendEstimate left = segmented_estimate(y, brk, fs, SegmentSide::Left);
  for (std::size_t i = 30; i < 60; ++i) CHECK(left.values[i] == doctest::Approx(120.0).epsilon(1e-12));
  CHECK(std::abs(left.values[29] - 100.0) > 0.1);

  const TrendEstimate right = segmented_estimate(y, brk, fs, SegmentSide::Right);
  for (std::size_t i = 0; i < 30; ++i) CHECK(right.values[i] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(std::abs(right.values[30] - 120.0) > 0.1);

  const TrendEstimate plain = apply_filter_set(y, fs);
  const TrendEstimate after = segmented_estimate(y, Period{2030, 1}, fs, SegmentSide::Both);
  CHECK(after.values == plain.values);
  CHECK_THROWS_AS(segmented_estimate(y, y.start(), fs, SegmentSide::Both), InvalidArgument);
  CHECK_THROWS_AS(segmented_estimate(y, y.period(5), fs, SegmentSide::Both), InvalidArgument);
  CHECK(parse_segment_side("left") == SegmentSide::Left);
  CHECK_THROWS_AS(parse_segment_side("middle"), InvalidArgument);
}
