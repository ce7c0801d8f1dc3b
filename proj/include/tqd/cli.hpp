#pragma once

// Command-line front end: curve, compare, fit, solve-sigmas.
//
// Exit codes: 0 ok, 1 invalid input, 2 numeric failure, 3 fit not converged,
// 4 under-determined sigma system, 5 comparison failed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tqd/curves.hpp"
#include "tqd/fitting.hpp"

namespace tqd::cli {

using nlohmann::json;

enum ExitCode { ok = 0, invalid_input = 1, numeric = 2, not_converged = 3, under_determined = 4,
                comparison_failed = 5 };

/// Time unit for CSV time columns. Everything else stays in units of sigma_hf.
struct Units {
  std::string name = "dimensionless";
  double ns_per_unit = 1.0; ///< ns per 1/sigma_hf; 1 and unused when dimensionless

  bool dimensionless() const { return name == "dimensionless"; }

  static Units parse(const std::string &s) {
    if (s == "dimensionless")
      return {};
    if (s == "gaas")
      return {s, 10.0};
    if (s == "si")
      return {s, 300.0};
    if (s.rfind("custom:", 0) == 0) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(s.substr(7), &used);
        if (used != s.size() - 7)
          v = 0.0;
      } catch (const std::exception &) {
      }
      if (!(v > 0.0) || !std::isfinite(v))
        throw UsageError("units: custom scale must be a positive number of ns, got '" + s + "'");
      return {s, v};
    }
    throw UsageError("units: expected dimensionless, gaas, si or custom:<ns>, got '" + s + "'");
  }
};

struct CompareSettings {
  double tolerance = 0.02; ///< max |a - b| for deterministic pairs
  double mc_band = 3.0;    ///< standard errors allowed for pairs with a Monte Carlo side
};

struct RunConfig {
  ExperimentSpec experiment;
  DotSigmas sigmas{0.5, 1.0, 1.5};
  std::vector<Method> methods{Method::quadrature};
  CurveOptions curve;
  CompareSettings compare;
  Units units;
  std::string out;
};

/// Exit with a structured error; carries extra context for the JSON object.
struct CliFailure : Error {
  int exit_code;
  json context;
  CliFailure(std::string code, const std::string &msg, int exit, json ctx = json::object())
      : Error(std::move(code), msg), exit_code(exit), context(std::move(ctx)) {}
};

namespace detail {

inline void reject_unknown(const json &obj, std::initializer_list<const char *> allowed,
                           const std::string &where) {
  if (!obj.is_object())
    throw UsageError("config: '" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char *a : allowed)
      known = known || it.key() == a;
    if (!known)
      throw UsageError("config: unknown key '" + (where.empty() ? "" : where + ".") + it.key() +
                       "'");
  }
}

template <typename T> T get_as(const json &j, const std::string &where) {
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    throw UsageError("config: '" + where + "' has the wrong type");
  }
}

inline DotPair pair_from(const json &j, const std::string &where) {
  const auto s = get_as<std::string>(j, where);
  if (s == "12")
    return DotPair::p12;
  if (s == "23")
    return DotPair::p23;
  throw UsageError("config: '" + where + "' must be \"12\" or \"23\"");
}

inline std::vector<double> time_grid(const json &j) {
  if (j.is_array())
    return get_as<std::vector<double>>(j, "experiment.times");
  reject_unknown(j, {"start", "stop", "count"}, "experiment.times");
  const double start = j.contains("start") ? get_as<double>(j["start"], "times.start") : 0.0;
  if (!j.contains("stop") || !j.contains("count"))
    throw UsageError("config: experiment.times needs 'stop' and 'count'");
  const double stop = get_as<double>(j["stop"], "times.stop");
  const long count = get_as<long>(j["count"], "times.count");
  if (count < 1)
    throw UsageError("config: experiment.times.count must be >= 1");
  std::vector<double> t(count);
  for (long i = 0; i < count; ++i)
    t[i] = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / (count - 1);
  return t;
}

inline std::vector<Method> parse_methods(const std::vector<std::string> &names) {
  std::vector<Method> ms;
  for (const auto &n : names) {
    const Method m = method_from_string(n);
    if (std::find(ms.begin(), ms.end(), m) == ms.end())
      ms.push_back(m);
  }
  if (ms.empty())
    throw UsageError("no methods requested");
  return ms;
}

} // namespace detail

inline RunConfig parse_config(const json &j) {
  RunConfig c;
  c.experiment.times = {0.0};
  detail::reject_unknown(j, {"experiment", "sigmas", "methods", "mc", "quadrature",
                             "approximations", "compare", "units", "out"},
                         "");
  if (j.contains("experiment")) {
    const json &e = j["experiment"];
    detail::reject_unknown(e, {"prepared", "pulsed", "j", "times", "gauge"}, "experiment");
    if (e.contains("prepared"))
      c.experiment.prepared = detail::pair_from(e["prepared"], "experiment.prepared");
    c.experiment.pulsed =
        c.experiment.prepared == DotPair::p12 ? DotPair::p23 : DotPair::p12;
    if (e.contains("pulsed"))
      c.experiment.pulsed = detail::pair_from(e["pulsed"], "experiment.pulsed");
    if (e.contains("j"))
      c.experiment.j = detail::get_as<double>(e["j"], "experiment.j");
    if (e.contains("times"))
      c.experiment.times = detail::time_grid(e["times"]);
    if (e.contains("gauge")) {
      const auto g = detail::get_as<std::string>(e["gauge"], "experiment.gauge");
      if (g == "both") c.experiment.gauge = GaugeMode::both;
      else if (g == "up") c.experiment.gauge = GaugeMode::up;
      else if (g == "down") c.experiment.gauge = GaugeMode::down;
      else throw UsageError("config: experiment.gauge must be both, up or down");
    }
  }
  if (j.contains("sigmas")) {
    const auto s = detail::get_as<std::vector<double>>(j["sigmas"], "sigmas");
    if (s.size() != 3)
      throw UsageError("config: 'sigmas' must list three values");
    c.sigmas = {s[0], s[1], s[2]};
  }
  if (j.contains("methods"))
    c.methods = detail::parse_methods(detail::get_as<std::vector<std::string>>(j["methods"], "methods"));
  if (j.contains("mc")) {
    const json &m = j["mc"];
    detail::reject_unknown(m, {"n_samples", "seed", "workers"}, "mc");
    if (m.contains("n_samples"))
      c.curve.n_samples = detail::get_as<std::uint64_t>(m["n_samples"], "mc.n_samples");
    if (m.contains("seed"))
      c.curve.seed = detail::get_as<std::uint64_t>(m["seed"], "mc.seed");
    if (m.contains("workers"))
      c.curve.workers = detail::get_as<unsigned>(m["workers"], "mc.workers");
  }
  if (j.contains("quadrature")) {
    const json &q = j["quadrature"];
    detail::reject_unknown(q, {"node_count", "truncation", "target_abs_tol"}, "quadrature");
    if (q.contains("node_count"))
      c.curve.quad.node_count = detail::get_as<int>(q["node_count"], "quadrature.node_count");
    if (q.contains("truncation"))
      c.curve.quad.truncation = detail::get_as<double>(q["truncation"], "quadrature.truncation");
    if (q.contains("target_abs_tol"))
      c.curve.quad.target_abs_tol =
          detail::get_as<double>(q["target_abs_tol"], "quadrature.target_abs_tol");
    c.curve.quad.validate();
  }
  if (j.contains("approximations")) {
    const json &a = j["approximations"];
    detail::reject_unknown(a, {"high_j", "low_j"}, "approximations");
    if (a.contains("high_j")) {
      const auto s = detail::get_as<std::string>(a["high_j"], "approximations.high_j");
      if (s == "unit_envelope") c.curve.high_j_form = HighJForm::unit_envelope;
      else if (s == "printed") c.curve.high_j_form = HighJForm::printed;
      else throw UsageError("config: approximations.high_j must be unit_envelope or printed");
    }
    if (a.contains("low_j")) {
      const auto s = detail::get_as<std::string>(a["low_j"], "approximations.low_j");
      if (s == "printed_reconciled") c.curve.low_j_form = LowJForm::printed_reconciled;
      else if (s == "second_order") c.curve.low_j_form = LowJForm::second_order;
      else throw UsageError("config: approximations.low_j must be printed_reconciled or second_order");
    }
  }
  if (j.contains("compare")) {
    const json &m = j["compare"];
    detail::reject_unknown(m, {"tolerance", "mc_band"}, "compare");
    if (m.contains("tolerance"))
      c.compare.tolerance = detail::get_as<double>(m["tolerance"], "compare.tolerance");
    if (m.contains("mc_band"))
      c.compare.mc_band = detail::get_as<double>(m["mc_band"], "compare.mc_band");
  }
  if (j.contains("units"))
    c.units = Units::parse(detail::get_as<std::string>(j["units"], "units"));
  if (j.contains("out"))
    c.out = detail::get_as<std::string>(j["out"], "out");
  return c;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string read_all(std::istream &in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string read_source(const std::string &path, std::istream &stdin_) {
  if (path == "-")
    return read_all(stdin_);
  std::ifstream f(path);
  if (!f)
    throw UsageError("cannot open '" + path + "'");
  return read_all(f);
}

inline json parse_json(const std::string &text, const std::string &what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw UsageError(what + ": invalid JSON (" + e.what() + ")");
  }
}

/// Writes to `path` or, when empty, to `fallback`.
inline void emit(const std::string &text, const std::string &path, std::ostream &fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw UsageError("cannot write '" + path + "'");
  f << text;
}

inline bool parse_number(const std::string &cell, double &v) {
  const char *b = cell.c_str();
  char *end = nullptr;
  v = std::strtod(b, &end);
  if (end == b)
    return false;
  while (*end == ' ' || *end == '\t' || *end == '\r')
    ++end;
  return *end == '\0';
}

inline std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

} // namespace detail

/// Reads (t, p0[, weight]) rows. A non-numeric first row is a header; with a
/// header, `column` selects the value column by name and a column named
/// "weight" supplies weights.
inline Trace read_trace_csv(const std::string &text, const std::string &column, double time_scale) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    rows.push_back(detail::split_csv(line));
    line_no.push_back(n);
  }
  if (rows.empty())
    throw UsageError("trace: no data rows");

  std::size_t t_col = 0, v_col = 1;
  std::optional<std::size_t> w_col;
  std::size_t first = 0;
  double probe = 0.0;
  if (!detail::parse_number(rows[0][0], probe)) {
    const auto &hdr = rows[0];
    first = 1;
    auto find = [&](const std::string &name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < hdr.size(); ++i)
        if (hdr[i] == name)
          return i;
      return std::nullopt;
    };
    if (!column.empty()) {
      const auto c = find(column);
      if (!c)
        throw UsageError("trace: no column named '" + column + "' in the header");
      v_col = *c;
    }
    w_col = find("weight");
  } else {
    if (!column.empty())
      throw UsageError("trace: --column needs a header row");
    if (rows[0].size() >= 3)
      w_col = 2;
  }

  Trace tr;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto &row = rows[r];
    auto cell = [&](std::size_t c) {
      double v = 0.0;
      if (c >= row.size() || !detail::parse_number(row[c], v))
        throw UsageError("trace: malformed number at line " + std::to_string(line_no[r]) +
                         ", column " + std::to_string(c + 1));
      return v;
    };
    tr.times.push_back(cell(t_col) / time_scale);
    tr.values.push_back(cell(v_col));
    if (w_col)
      tr.weights.push_back(cell(*w_col));
  }
  return tr;
}

inline std::string curve_csv(const std::vector<Curve> &curves, const Units &units) {
  std::ostringstream out;
  out << "t";
  for (const auto &c : curves) {
    out << "," << column_name(c.method);
    if (is_monte_carlo(c.method))
      out << "," << (c.method == Method::mc8 ? "mc_stderr" : "mc3_stderr");
  }
  out << "\n";
  const auto &times = curves.front().times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_double(times[i] * units.ns_per_unit);
    for (const auto &c : curves) {
      out << "," << format_double(c.values[i]);
      if (is_monte_carlo(c.method))
        out << "," << format_double(c.stderr_[i]);
    }
    out << "\n";
  }
  return out.str();
}

inline std::vector<Curve> compute_curves(const RunConfig &cfg) {
  std::vector<Curve> curves;
  for (Method m : cfg.methods)
    curves.push_back(make_curve(m, cfg.sigmas, cfg.experiment, cfg.curve));
  return curves;
}

inline json warnings_json(const std::vector<Curve> &curves) {
  json w = json::array();
  for (const auto &c : curves)
    for (const auto &s : c.warnings)
      w.push_back(s);
  return w;
}

/// Pairwise deviations. Pairs with a Monte Carlo side pass when every point
/// lies within mc_band combined standard errors; others when max |a - b| <= tolerance.
inline json compare_report(const std::vector<Curve> &curves, const CompareSettings &cs,
                           bool &all_pass) {
  all_pass = true;
  json pairs = json::array();
  for (std::size_t a = 0; a < curves.size(); ++a)
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      const Curve &x = curves[a], &y = curves[b];
      double max_dev = 0.0, sum = 0.0, max_z = 0.0;
      bool pass = true;
      const bool mc = is_monte_carlo(x.method) || is_monte_carlo(y.method);
      for (std::size_t i = 0; i < x.values.size(); ++i) {
        const double d = std::abs(x.values[i] - y.values[i]);
        max_dev = std::max(max_dev, d);
        sum += d;
        if (mc) {
          const double se = std::hypot(x.stderr_.empty() ? 0.0 : x.stderr_[i],
                                       y.stderr_.empty() ? 0.0 : y.stderr_[i]);
          if (d > cs.mc_band * se + 1e-9)
            pass = false;
          if (se > 0.0)
            max_z = std::max(max_z, d / se);
        }
      }
      if (!mc)
        pass = max_dev <= cs.tolerance;
      json notes = json::array();
      for (const auto *c : {&x, &y})
        for (const auto &w : c->warnings)
          notes.push_back(w);
      json p = {{"a", to_string(x.method)},
                {"b", to_string(y.method)},
                {"max_dev", max_dev},
                {"mean_dev", sum / static_cast<double>(x.values.size())},
                {"criterion", mc ? "mc_band" : "tolerance"},
                {"threshold", mc ? cs.mc_band : cs.tolerance},
                {"pass", pass},
                {"notes", notes}};
      if (mc)
        p["max_z"] = max_z;
      pairs.push_back(p);
      all_pass = all_pass && pass;
    }
  return {{"pairs", pairs}, {"pass", all_pass}, {"n_points", curves.front().times.size()}};
}

inline json fit_json(const FitResult &r, const std::string &model, const Units &units) {
  json params = json::object(), se = json::object();
  for (std::size_t k = 0; k < r.params.size(); ++k) {
    params[r.params[k].first] = r.params[k].second;
    if (!r.param_stderr.empty())
      se[r.params[k].first] = r.param_stderr[k];
  }
  json j = {{"model", model},
            {"converged", r.converged},
            {"n_iter", r.n_iter},
            {"params", params},
            {"residual_rms", r.residual_rms},
            {"warnings", r.warnings},
            {"units", units.name}};
  if (r.converged)
    j["param_stderr"] = se;
  if (!units.dimensionless()) {
    json rates = json::object();
    for (const char *name : {"sigma", "J", "sigma_bar"})
      if (params.contains(name))
        rates[name] = params[name].get<double>() / units.ns_per_unit;
    j["rates_per_ns"] = rates;
  }
  return j;
}

inline json solution_json(const SigmaSolution &s) {
  const auto sig = s.sigmas();
  return {{"sigma_sq", s.sigma_sq},
          {"sigma_sq_stderr", s.sigma_sq_stderr},
          {"sigmas", sig},
          {"feasible", s.feasible},
          {"residual", s.residual}};
}

inline std::vector<Measurement> parse_measurements(const json &j) {
  const json &list = j.is_object() && j.contains("measurements") ? j["measurements"] : j;
  if (j.is_object())
    detail::reject_unknown(j, {"measurements"}, "");
  if (!list.is_array())
    throw UsageError("measurements: expected a JSON list of {kind, value, stderr}");
  std::vector<Measurement> ms;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "measurements[" + std::to_string(i) + "]";
    detail::reject_unknown(list[i], {"kind", "value", "stderr"}, where);
    if (!list[i].contains("kind") || !list[i].contains("value"))
      throw UsageError(where + ": needs 'kind' and 'value'");
    Measurement m;
    m.kind = sigma_kind_from_string(detail::get_as<std::string>(list[i]["kind"], where + ".kind"));
    m.value = detail::get_as<double>(list[i]["value"], where + ".value");
    if (list[i].contains("stderr"))
      m.stderr_ = detail::get_as<double>(list[i]["stderr"], where + ".stderr");
    ms.push_back(m);
  }
  return ms;
}

inline int exit_code_for(const Error &e) {
  if (auto *f = dynamic_cast<const CliFailure *>(&e))
    return f->exit_code;
  if (e.code() == "numeric")
    return numeric;
  if (e.code() == "under_determined")
    return under_determined;
  return invalid_input;
}

inline void report_error(std::ostream &err, const std::string &code, const std::string &message,
                         const json &context) {
  err << json{{"code", code}, {"message", message}, {"context", context}}.dump() << "\n";
}

/// Entry point. `in` serves "-" arguments.
inline int run(int argc, const char *const *argv, std::istream &in, std::ostream &out,
               std::ostream &err) {
  CLI::App app{"Hyperfine-induced singlet decay in triple quantum dots"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tqd 1.0");

  std::string config_path, out_path, method_list, units_flag;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", out_path, "output path (default: stdout)");
    sub->add_option("--seed", seed, "Monte Carlo seed");
    sub->add_option("--method", method_list, "comma-separated methods, e.g. exact,mc");
    sub->add_option("--units", units_flag, "time units: dimensionless, gaas, si, custom:<ns>");
    sub->add_option("--workers", workers, "Monte Carlo worker threads (0: all cores)");
  };
  CLI::App *curve = app.add_subcommand("curve", "P0(t) as CSV");
  CLI::App *compare = app.add_subcommand("compare", "pairwise method deviations as JSON");
  add_common(curve);
  add_common(compare);

  CLI::App *fit = app.add_subcommand("fit", "fit a trace CSV (t, p0[, weight])");
  std::string trace_path, model = "dephasing", column;
  std::optional<double> j_guess;
  fit->add_option("trace", trace_path, "trace CSV, or - for stdin")->required();
  fit->add_option("--model", model, "dephasing or rabi")->check(CLI::IsMember({"dephasing", "rabi"}));
  fit->add_option("--j-guess", j_guess, "exchange guess for rabi fits");
  fit->add_option("--column", column, "value column name when the CSV has a header");
  fit->add_option("--units", units_flag, "time units of the trace");
  fit->add_option("--out", out_path, "output path (default: stdout)");

  CLI::App *solve = app.add_subcommand("solve-sigmas", "per-dot sigma^2 from decay constants");
  std::string meas_path;
  bool sigma3_only = false;
  solve->add_option("measurements", meas_path, "JSON list of {kind, value, stderr}, or -")->required();
  solve->add_flag("--sigma3-only", sigma3_only, "sigma3^2 = sigma_bar12^2 - sigma12^2/4 only");
  solve->add_option("--out", out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::CallForVersion &) {
    out << "tqd 1.0\n";
    return ok;
  } catch (const CLI::ParseError &e) {
    report_error(err, "usage", e.what(), {{"parser", e.get_name()}});
    return invalid_input;
  }

  try {
    if (curve->parsed() || compare->parsed()) {
      RunConfig cfg = config_path.empty()
                          ? parse_config(json::object())
                          : parse_config(detail::parse_json(detail::read_source(config_path, in),
                                                            "config"));
      if (!method_list.empty()) {
        std::vector<std::string> names;
        std::istringstream ss(method_list);
        for (std::string s; std::getline(ss, s, ',');)
          if (!s.empty())
            names.push_back(s);
        cfg.methods = detail::parse_methods(names);
      }
      if (seed)
        cfg.curve.seed = *seed;
      if (workers)
        cfg.curve.workers = *workers;
      if (!units_flag.empty())
        cfg.units = Units::parse(units_flag);
      if (!out_path.empty())
        cfg.out = out_path;

      if (compare->parsed() && cfg.methods.size() < 2)
        throw UsageError("compare: needs at least two methods");
      const auto curves = compute_curves(cfg);
      const json warn = warnings_json(curves);
      if (curve->parsed()) {
        detail::emit(curve_csv(curves, cfg.units), cfg.out, out);
        if (!warn.empty())
          err << json{{"warnings", warn}}.dump() << "\n";
        return ok;
      }
      bool all_pass = false;
      json report = compare_report(curves, cfg.compare, all_pass);
      report["j"] = cfg.experiment.j;
      detail::emit(report.dump(2) + "\n", cfg.out, out);
      if (!all_pass)
        throw CliFailure("comparison_failed", "one or more method pairs exceeded their threshold",
                         comparison_failed, {{"failed_pairs", [&] {
                                                json f = json::array();
                                                for (const auto &p : report["pairs"])
                                                  if (!p["pass"].get<bool>())
                                                    f.push_back(p["a"].get<std::string>() + "/" +
                                                                p["b"].get<std::string>());
                                                return f;
                                              }()}});
      return ok;
    }

    if (fit->parsed()) {
      const Units units = units_flag.empty() ? Units{} : Units::parse(units_flag);
      const Trace tr =
          read_trace_csv(detail::read_source(trace_path, in), column, units.ns_per_unit);
      if (j_guess && !units.dimensionless())
        *j_guess *= units.ns_per_unit; // rad/ns -> units of sigma_hf
      const FitResult r = model == "rabi" ? fit_rabi(tr, j_guess) : fit_dephasing(tr);
      detail::emit(fit_json(r, model, units).dump(2) + "\n", out_path, out);
      if (!r.converged)
        throw CliFailure("not_converged", model + " fit did not converge", not_converged,
                         {{"warnings", r.warnings}});
      return ok;
    }

    if (solve->parsed()) {
      const auto ms = parse_measurements(
          detail::parse_json(detail::read_source(meas_path, in), "measurements"));
      if (sigma3_only) {
        const Measurement *s12 = nullptr, *sb12 = nullptr;
        for (const auto &m : ms) {
          if (m.kind == SigmaKind::sigma12) s12 = &m;
          if (m.kind == SigmaKind::sigma_bar12) sb12 = &m;
        }
        if (!s12 || !sb12) {
          std::vector<std::string> missing;
          if (!s12) missing.push_back("sigma12");
          if (!sb12) missing.push_back("sigma_bar12");
          throw UnderDeterminedError("solve-sigmas --sigma3-only needs sigma12 and sigma_bar12",
                                     missing);
        }
        const PartialSigma p = sigma3_sq_shortcut(*s12, *sb12);
        detail::emit(json{{"sigma3_sq", p.value}, {"sigma3_sq_stderr", p.stderr_}}.dump(2) + "\n",
                     out_path, out);
        return ok;
      }
      detail::emit(solution_json(solve_sigmas(ms)).dump(2) + "\n", out_path, out);
      return ok;
    }
  } catch (const UnderDeterminedError &e) {
    report_error(err, e.code(), e.what(), {{"admissible_completions", e.admissible_completions()}});
    return under_determined;
  } catch (const NumericError &e) {
    report_error(err, e.code(), e.what(), {{"diagnostics", e.diagnostics()}});
    return numeric;
  } catch (const CliFailure &e) {
    report_error(err, e.code(), e.what(), e.context);
    return e.exit_code;
  } catch (const Error &e) {
    report_error(err, e.code(), e.what(), json::object());
    return exit_code_for(e);
  }
  return ok;
}

} // namespace tqd::cli
