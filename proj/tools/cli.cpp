#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "trendcycle/csv.hpp"
#include "trendcycle/errors.hpp"
#include "trendcycle/evaluation.hpp"
#include "trendcycle/filters.hpp"
#include "trendcycle/inference.hpp"
#include "trendcycle/ingest.hpp"
#include "trendcycle/robust_ma.hpp"
#include "trendcycle/robust_nonlinear.hpp"

namespace tc::cli {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string input;
  std::string date_column = "date";
  std::string value_column = "value";
  std::string sep = ",";
  bool decimal_comma = false;
  std::string from;
  std::string to;
  bool log_transform = false;

  std::string method = "henderson";
  std::string h = "6";  // integer or "auto"
  std::optional<double> R;
  std::vector<std::string> outliers;
  std::string outliers_json;
  int degree = 1;
  std::string boundary = "na_pad";
  double alpha = 0.05;
  bool approx_df = false;
  std::string clf_table;

  std::string vintage_start;
  int horizon = 12;

  std::string out_dir = ".";
  std::string config;

  // simulate
  int trend_degree = 0;
  std::string shock = "ao:2022-01:0.10";
  std::string shock_scale = "relative";
  std::string start = "2018-01";
  std::size_t length = 72;
  double level = 100.0;
  double slope = 0.5;
  double curvature = 0.01;
  std::string vertex = "2021-01";
  std::string scenario;
};

const char* kLinearMethods = "henderson, henderson_cn, clf";

bool is_nonlinear(const std::string& m) {
  return m == "med" || m == "rm" || m == "lms" || m == "lts" || m == "lqd" || m == "dr";
}

bool is_linear(const std::string& m) { return m == "henderson" || m == "henderson_cn" || m == "clf"; }

void add_input_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--input", c.input, "Input CSV (header row, monthly dates)");
  sub->add_option("--date-column", c.date_column, "Date column name");
  sub->add_option("--value-column", c.value_column, "Value column name");
  sub->add_option("--sep", c.sep, "Field separator");
  sub->add_flag("--decimal-comma", c.decimal_comma, "Values use a decimal comma");
  sub->add_option("--from", c.from, "Drop observations before YYYY-MM");
  sub->add_option("--to", c.to, "Drop observations after YYYY-MM");
  sub->add_flag("--log", c.log_transform, "Smooth the logarithm, report on the original scale");
}

void add_method_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--method", c.method,
                  "henderson, henderson_cn, clf, med, rm, lms, lts, lqd or dr");
  sub->add_option("--h", c.h, "Half window length, or auto (I-C ratio)");
  sub->add_option("--R", c.R, "I-C ratio used for the end filters");
  sub->add_option("--outlier", c.outliers, "kind:YYYY-MM with kind in ao, ao_trend, ls (repeatable)");
  sub->add_option("--outliers-json", c.outliers_json, "JSON file with an outlier list");
  sub->add_option("--degree", c.degree, "Local degree of lms/lts (1 or 2)");
  sub->add_option("--boundary", c.boundary, "na_pad or extrapolate (robust estimators)");
  sub->add_option("--clf-table", c.clf_table, "CLF coefficient table");
}

void add_output_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--out-dir", c.out_dir, "Output directory");
  sub->add_option("--config", c.config, "JSON config file (flags take precedence)");
}

void add_interval_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--alpha", c.alpha, "Interval level is 1 - alpha");
  sub->add_flag("--approx-df", c.approx_df, "Degrees of freedom tr(Delta) instead of the exact ratio");
}

// Fills options that were not given on the command line from the JSON file.
void apply_json_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path + ": config must be a JSON object");
  for (const auto& [key, val] : doc.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw ConfigError(path + ": unknown setting '" + key + "'");
    if (opt->count() > 0 || (val.is_array() && val.empty())) continue;
    auto scalar = [&](const nlohmann::json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
      if (v.is_number()) return v.dump();
      throw ConfigError(path + ": setting '" + key + "' has an unsupported type");
    };
    if (val.is_array()) {
      for (const auto& item : val) opt->add_result(scalar(item));
    } else {
      opt->add_result(scalar(val));
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError(path + ": setting '" + key + "': " + e.what());
    }
  }
}

char separator_of(const RunConfig& c) {
  if (c.sep.size() != 1) throw InvalidArgument("--sep must be a single character");
  return c.sep[0];
}

TimeSeries load_series(const RunConfig& c) {
  if (c.input.empty()) throw InvalidArgument("--input is required");
  CsvOptions opt{c.date_column, c.value_column, separator_of(c), c.decimal_comma};
  TimeSeries s = ingest_csv(c.input, opt);
  if (!c.from.empty() || !c.to.empty()) {
    const Period first = c.from.empty() ? s.start() : Period::parse(c.from);
    const Period last = c.to.empty() ? s.end() : Period::parse(c.to);
    s = s.window(first, last);
  }
  if (c.log_transform) {
    std::vector<double> v = s.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (is_missing(v[i])) continue;
      if (!(v[i] > 0.0))
        throw DataError(c.input + ": log transform needs positive values (" + s.period(i).str() + ")");
      v[i] = std::log(v[i]);
    }
    s = TimeSeries(s.start(), std::move(v));
  }
  return s;
}

std::vector<OutlierSpec> load_outliers(const RunConfig& c) {
  std::vector<OutlierSpec> specs;
  if (!c.outliers_json.empty()) {
    std::ifstream in(c.outliers_json);
    if (!in) throw DataError(c.outliers_json + ": cannot open outlier file");
    std::stringstream ss;
    ss << in.rdbuf();
    specs = parse_outlier_json(ss.str());
  }
  for (const auto& text : c.outliers) {
    try {
      specs.push_back(OutlierSpec::parse(text));
    } catch (const DataError& e) {
      throw InvalidArgument("--outlier " + text + ": " + e.what());
    }
  }
  validate_outliers(specs);
  return specs;
}

// Default end-filter I-C ratio for each standard Henderson length.
double default_ratio(int h) {
  switch (h) {
    case 4: return 1.0;
    case 11: return 4.5;
    default: return 3.5;
  }
}

struct Resolved {
  int h = 6;
  double R = 3.5;
};

Resolved resolve_length(const RunConfig& c, const TimeSeries* series) {
  Resolved r;
  if (c.h == "auto") {
    if (series == nullptr) throw InvalidArgument("--h auto needs --input");
    const double ratio = icr(*series, henderson_filter(6));
    r.h = select_henderson_length(ratio);
  } else {
    try {
      std::size_t used = 0;
      r.h = std::stoi(c.h, &used);
      if (used != c.h.size()) throw std::invalid_argument(c.h);
    } catch (const std::exception&) {
      throw InvalidArgument("--h must be an integer or auto, got '" + c.h + "'");
    }
    if (r.h < 1) throw InvalidArgument("--h must be positive");
  }
  r.R = c.R.value_or(default_ratio(r.h));
  if (!(r.R > 0.0)) throw InvalidArgument("--R must be positive");
  return r;
}

FilterSet linear_set(const RunConfig& c, const Resolved& r) {
  if (c.method == "henderson") return musgrave_filter_set(r.h, r.R);
  if (c.method == "henderson_cn") return cut_and_normalize_set(henderson_filter(r.h), "henderson_cn");
  if (c.method == "clf") {
    if (c.clf_table.empty()) throw InvalidArgument("--method clf needs --clf-table");
    return clf_filter_set_from_file(c.clf_table);
  }
  throw InvalidArgument("method '" + c.method + "' has no linear filter set (expected " + kLinearMethods + ")");
}

void check_method(const RunConfig& c, bool outliers) {
  if (!is_linear(c.method) && !is_nonlinear(c.method))
    throw InvalidArgument("unknown method '" + c.method + "'");
  if (outliers && c.method != "henderson")
    throw InvalidArgument("--outlier is only available with --method henderson (robust moving average)");
  if (c.degree != 1 && c.degree != 2) throw InvalidArgument("--degree must be 1 or 2");
  if (c.degree == 2 && c.method != "lms" && c.method != "lts")
    throw InvalidArgument("--degree 2 is only available for lms and lts");
  parse_boundary(c.boundary);
}

RobustConfig robust_config(const Resolved& r, const std::vector<OutlierSpec>& specs) {
  RobustConfig cfg;
  cfg.h = r.h;
  cfg.R = r.R;
  cfg.specs = specs;
  return cfg;
}

Estimator make_estimator(const RunConfig& c, const Resolved& r, const std::vector<OutlierSpec>& specs) {
  if (!specs.empty()) {
    return [r, specs](const TimeSeries& s) {
      std::vector<OutlierSpec> known;
      for (const auto& o : specs)
        if (o.t0 >= s.start() && o.t0 <= s.end()) known.push_back(o);
      return robust_apply(s, robust_config(r, known)).estimate;
    };
  }
  if (is_nonlinear(c.method)) {
    const RobustMethod m = parse_robust_method(c.method);
    const Boundary b = parse_boundary(c.boundary);
    const int degree = c.degree;
    const int h = r.h;
    return [m, b, degree, h](const TimeSeries& s) { return robust_smooth(s, m, h, degree, b); };
  }
  FilterSet set = linear_set(c, r);
  return [set](const TimeSeries& s) { return apply_filter_set(s, set); };
}

std::ofstream open_output(const RunConfig& c, const std::string& name, std::vector<std::string>& written) {
  fs::create_directories(c.out_dir);
  const fs::path p = fs::path(c.out_dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError(p.string() + ": cannot write");
  written.push_back(p.string());
  return out;
}

double back(double v, bool log_scale) { return log_scale && !is_missing(v) ? std::exp(v) : v; }

void write_estimates(std::ostream& out, const TrendEstimate& est, bool log_scale) {
  out << "period,estimate,filter_id\n";
  for (std::size_t i = 0; i < est.size(); ++i)
    out << est.period(i).str() << ',' << csv::format(back(est.values[i], log_scale)) << ',' << est.filter_id[i]
        << '\n';
}

void write_intervals(std::ostream& out, IntervalSeries iv, bool log_scale) {
  if (log_scale)
    for (std::size_t i = 0; i < iv.size(); ++i) {
      iv.estimate[i] = std::exp(iv.estimate[i]);
      iv.lower[i] = std::exp(iv.lower[i]);
      iv.upper[i] = std::exp(iv.upper[i]);
    }
  write_intervals_csv(out, iv);
}

struct Pipeline {
  TimeSeries series;
  Resolved resolved;
  std::vector<OutlierSpec> specs;
};

Pipeline prepare(const RunConfig& c) {
  Pipeline p{load_series(c), {}, load_outliers(c)};
  check_method(c, !p.specs.empty());
  p.resolved = resolve_length(c, &p.series);
  return p;
}

std::optional<IntervalSeries> intervals_for(const RunConfig& c, const Pipeline& p) {
  if (!p.specs.empty()) {
    const RobustFilterPlan plan = build_robust_plan(robust_config(p.resolved, p.specs), p.series.start(), p.series.size());
    return confint_robust(p.series, plan, c.alpha, !c.approx_df);
  }
  if (is_linear(c.method)) return confint_uniform(p.series, linear_set(c, p.resolved), c.alpha, !c.approx_df);
  return std::nullopt;
}

void cmd_smooth(const RunConfig& c, std::vector<std::string>& written) {
  const Pipeline p = prepare(c);
  const TrendEstimate est = make_estimator(c, p.resolved, p.specs)(p.series);
  {
    auto out = open_output(c, "estimates.csv", written);
    write_estimates(out, est, c.log_transform);
  }
  {
    auto out = open_output(c, "turning_points.csv", written);
    write_turning_points_csv(out, turning_points(est));
  }
  if (auto iv = intervals_for(c, p)) {
    auto out = open_output(c, "intervals.csv", written);
    write_intervals(out, *iv, c.log_transform);
  }
  if (!p.specs.empty()) {
    const RobustFilterPlan plan = build_robust_plan(robust_config(p.resolved, p.specs), p.series.start(), p.series.size());
    auto out = open_output(c, "coefficients.csv", written);
    write_plan_coefficients_csv(out, plan);
    auto pout = open_output(c, "plan.csv", written);
    write_plan_csv(pout, plan);
  } else if (is_linear(c.method)) {
    auto out = open_output(c, "coefficients.csv", written);
    write_coefficients_csv(out, {linear_set(c, p.resolved)});
  }
}

void cmd_confint(const RunConfig& c, std::vector<std::string>& written) {
  const Pipeline p = prepare(c);
  auto iv = intervals_for(c, p);
  if (!iv) throw InvalidArgument("intervals need a linear method (" + std::string(kLinearMethods) + ")");
  auto out = open_output(c, "intervals.csv", written);
  write_intervals(out, *iv, c.log_transform);
}

void cmd_vintages(const RunConfig& c, std::vector<std::string>& written, std::ostream& err) {
  const Pipeline p = prepare(c);
  const Period first = c.vintage_start.empty()
                           ? p.series.start() + static_cast<long>(2 * p.resolved.h)
                           : Period::parse(c.vintage_start);
  const VintageMatrix vm = vintages(p.series, make_estimator(c, p.resolved, p.specs), first);
  {
    auto out = open_output(c, "vintages.csv", written);
    VintageMatrix shown = vm;
    if (c.log_transform)
      for (auto& row : shown.rows)
        for (double& v : row) v = back(v, true);
    write_vintages_csv(out, shown);
  }
  const RevisionMetrics rm = revision_metrics(vm, c.horizon);
  {
    auto out = open_output(c, "revisions.csv", written);
    out << "period,q,revision\n";
    for (std::size_t i = 0; i < rm.periods.size(); ++i)
      for (std::size_t q = 0; q < rm.revisions[i].size(); ++q)
        out << rm.periods[i].str() << ',' << q << ',' << csv::format(rm.revisions[i][q]) << '\n';
    out << "# mean_abs_revision," << csv::format(rm.mean_abs) << '\n';
    out << "# max_abs_revision," << csv::format(rm.max_abs) << '\n';
  }
  {
    auto out = open_output(c, "turning_points.csv", written);
    out << "publication_date,date,signal,kind\n";
    for (std::size_t k = 0; k < vm.size(); ++k) {
      TrendEstimate row{vm.series_start, vm.rows[k], std::vector<std::string>(vm.rows[k].size())};
      for (const auto& tp : turning_points(row))
        out << vm.publication[k].str() << ',' << tp.date.str() << ',' << tp.signal.str() << ','
            << to_string(tp.kind) << '\n';
    }
  }
  for (const auto& d : vm.diagnostics) err << "warning: " << d << '\n';
}

void cmd_coefficients(const RunConfig& c, std::vector<std::string>& written) {
  const std::vector<OutlierSpec> specs = load_outliers(c);
  if (!specs.empty()) {
    if (c.input.empty()) throw InvalidArgument("robust coefficients need --input for the dates");
    const Pipeline p = prepare(c);
    const RobustFilterPlan plan = build_robust_plan(robust_config(p.resolved, p.specs), p.series.start(), p.series.size());
    auto out = open_output(c, "coefficients.csv", written);
    write_plan_coefficients_csv(out, plan);
    auto pout = open_output(c, "plan.csv", written);
    write_plan_csv(pout, plan);
    return;
  }
  if (!is_linear(c.method)) throw InvalidArgument("coefficients need a linear method (" + std::string(kLinearMethods) + ")");
  std::optional<TimeSeries> s;
  if (!c.input.empty()) s = load_series(c);
  const Resolved r = resolve_length(c, s ? &*s : nullptr);
  auto out = open_output(c, "coefficients.csv", written);
  write_coefficients_csv(out, {linear_set(c, r)});
}

ScenarioSpec scenario_of(const RunConfig& c, CLI::App* sub) {
  ScenarioSpec spec;
  if (!c.scenario.empty()) {
    std::ifstream in(c.scenario);
    if (!in) throw DataError(c.scenario + ": cannot open scenario file");
    std::stringstream ss;
    ss << in.rdbuf();
    spec = scenario_from_json(ss.str());
  }
  auto given = [&](const char* name) { return sub->get_option(name)->count() > 0 || c.scenario.empty(); };
  if (given("--trend-degree")) spec.trend_degree = c.trend_degree;
  if (given("--shock")) {
    // kind:YYYY-MM[:size]
    const auto parts = csv::split(c.shock, ':');
    if (parts.size() < 2 || parts.size() > 3) throw InvalidArgument("--shock expects kind:YYYY-MM[:size], got '" + c.shock + "'");
    spec.shock_kind = parse_shock_kind(parts[0]);
    try {
      spec.shock_date = Period::parse(parts[1]);
      if (parts.size() == 3) spec.shock_size = csv::parse_number(parts[2]);
    } catch (const DataError& e) {
      throw InvalidArgument("--shock " + c.shock + ": " + e.what());
    }
  }
  if (given("--shock-scale")) spec.shock_scale = parse_shock_scale(c.shock_scale);
  auto period = [](const std::string& text, const char* flag) {
    try {
      return Period::parse(text);
    } catch (const DataError& e) {
      throw InvalidArgument(std::string(flag) + ": " + e.what());
    }
  };
  if (given("--start")) spec.start_date = period(c.start, "--start");
  if (given("--length")) spec.length = c.length;
  if (given("--level")) spec.level = c.level;
  if (given("--slope")) spec.slope = c.slope;
  if (given("--curvature")) spec.curvature = c.curvature;
  if (given("--vertex")) spec.vertex = period(c.vertex, "--vertex");
  spec.validate();
  return spec;
}

void cmd_simulate(const RunConfig& c, CLI::App* sub, std::vector<std::string>& written) {
  const ScenarioSpec spec = scenario_of(c, sub);
  {
    auto out = open_output(c, "series.csv", written);
    write_series_csv(out, simulate(spec));
  }
  {
    auto out = open_output(c, "trend.csv", written);
    write_series_csv(out, scenario_trend(spec));
  }
  auto out = open_output(c, "scenario.json", written);
  out << scenario_to_json(spec) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Trend-cycle estimation around shocks"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help");
  app.set_version_flag("--version", "trendcycle 1.0");

  CLI::App* smooth = app.add_subcommand("smooth", "Estimate the trend-cycle of a series");
  CLI::App* vint = app.add_subcommand("vintages", "Real-time estimates for every publication date");
  CLI::App* sim = app.add_subcommand("simulate", "Write a simulated shock scenario");
  CLI::App* coef = app.add_subcommand("coefficients", "Export filter coefficients");
  CLI::App* ci = app.add_subcommand("confint", "Confidence intervals for linear estimates");

  for (CLI::App* sub : {smooth, vint, sim, coef, ci}) sub->set_help_flag("--help", "Print help");
  for (CLI::App* sub : {smooth, vint, ci, coef}) {
    add_input_options(sub, c);
    add_method_options(sub, c);
    add_output_options(sub, c);
  }
  for (CLI::App* sub : {smooth, ci}) add_interval_options(sub, c);
  vint->add_option("--vintage-start", c.vintage_start, "First publication date (YYYY-MM)");
  vint->add_option("--horizon", c.horizon, "Revision horizon in months");

  sim->add_option("--trend-degree", c.trend_degree, "0, 1 or 2");
  sim->add_option("--shock", c.shock, "kind:YYYY-MM[:size], kind in ao, ls");
  sim->add_option("--shock-scale", c.shock_scale, "relative, multiplicative or absolute");
  sim->add_option("--start", c.start, "First period");
  sim->add_option("--length", c.length, "Number of periods");
  sim->add_option("--level", c.level, "Trend level");
  sim->add_option("--slope", c.slope, "Slope of the degree-1 trend");
  sim->add_option("--curvature", c.curvature, "Curvature of the degree-2 trend");
  sim->add_option("--vertex", c.vertex, "Vertex month of the degree-2 trend");
  sim->add_option("--scenario", c.scenario, "Scenario JSON (flags take precedence)");
  add_output_options(sim, c);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help()) << '\n';
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::vector<std::string> written;
  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!c.config.empty()) apply_json_config(sub, c.config);
    if (sub == smooth) cmd_smooth(c, written);
    else if (sub == vint) cmd_vintages(c, written, err);
    else if (sub == sim) cmd_simulate(c, sub, written);
    else if (sub == coef) cmd_coefficients(c, written);
    else cmd_confint(c, written);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
  for (const auto& w : written) out << "wrote " << w << '\n';
  return kOk;
}

}  // namespace tc::cli
