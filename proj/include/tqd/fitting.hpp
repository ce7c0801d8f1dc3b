#pragma once

// Decay-constant extraction from dephasing and Rabi traces, and the linear
// inversion from fitted constants to per-dot sigma_j^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "tqd/errors.hpp"

namespace tqd {

struct Trace {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> weights; ///< inverse variances; empty means uniform

  void validate() const {
    if (times.size() != values.size())
      throw UsageError("Trace: times and values differ in length");
    if (!weights.empty() && weights.size() != times.size())
      throw UsageError("Trace: weights differ in length from times");
    if (times.size() < 8)
      throw UsageError("Trace: insufficient points (" + std::to_string(times.size()) +
                       " < 8)");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw UsageError("Trace: times must be strictly increasing (row " + std::to_string(i) +
                         ")");
    for (std::size_t i = 0; i < times.size(); ++i)
      if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
        throw UsageError("Trace: non-finite entry at row " + std::to_string(i));
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w))
        throw UsageError("Trace: weights must be finite and > 0");
  }
};

struct FitResult {
  std::vector<std::pair<std::string, double>> params;
  double residual_rms = 0.0;
  std::vector<double> param_stderr; ///< same order as params; empty unless converged
  bool converged = false;
  int n_iter = 0;
  std::vector<std::string> warnings; ///< each starts with a stable tag, e.g. "unresolved:"

  double get(const std::string &name) const {
    for (const auto &[k, v] : params)
      if (k == name)
        return v;
    throw UsageError("FitResult: no parameter '" + name + "'");
  }

  bool has_warning(const std::string &tag) const {
    return std::any_of(warnings.begin(), warnings.end(),
                       [&](const std::string &w) { return w.rfind(tag, 0) == 0; });
  }
};

namespace detail {

/// Model with P parameters, analytic gradient, evaluated at t.
template <int P> struct Model {
  virtual ~Model() = default;
  virtual double value(const Eigen::Matrix<double, P, 1> &p, double t) const = 0;
  virtual Eigen::Matrix<double, P, 1> grad(const Eigen::Matrix<double, P, 1> &p,
                                           double t) const = 0;
};

template <int P> struct WeightedResiduals : Eigen::DenseFunctor<double> {
  using Base = Eigen::DenseFunctor<double>;
  const Model<P> &model;
  const Trace &trace;

  WeightedResiduals(const Model<P> &m, const Trace &tr)
      : Base(P, static_cast<int>(tr.times.size())), model(m), trace(tr) {}

  double sqrt_w(std::size_t i) const {
    return trace.weights.empty() ? 1.0 : std::sqrt(trace.weights[i]);
  }

  int operator()(const Eigen::VectorXd &p, Eigen::VectorXd &r) const {
    const Eigen::Matrix<double, P, 1> q = p;
    for (std::size_t i = 0; i < trace.times.size(); ++i)
      r(i) = sqrt_w(i) * (model.value(q, trace.times[i]) - trace.values[i]);
    return 0;
  }

  int df(const Eigen::VectorXd &p, Eigen::MatrixXd &jac) const {
    const Eigen::Matrix<double, P, 1> q = p;
    for (std::size_t i = 0; i < trace.times.size(); ++i)
      jac.row(i) = sqrt_w(i) * model.grad(q, trace.times[i]).transpose();
    return 0;
  }
};

template <int P>
FitResult refine(const Model<P> &model, const Trace &trace, const Eigen::Matrix<double, P, 1> &start,
                 const std::array<const char *, P> &names) {
  Eigen::VectorXd p = start;
  WeightedResiduals<P> f(model, trace);
  Eigen::LevenbergMarquardt<WeightedResiduals<P>> lm(f);
  lm.setMaxfev(2000);
  lm.setXtol(1e-12);
  lm.setFtol(1e-12);
  const auto status = lm.minimize(p);

  FitResult r;
  r.n_iter = static_cast<int>(lm.iterations());
  using namespace Eigen::LevenbergMarquardtSpace;
  r.converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                status == RelativeErrorAndReductionTooSmall || status == CosinusTooSmall ||
                status == FtolTooSmall || status == XtolTooSmall || status == GtolTooSmall;
  if (!r.converged)
    r.warnings.push_back("not_converged: minimizer stopped with status " +
                         std::to_string(static_cast<int>(status)));

  const auto n = static_cast<Eigen::Index>(trace.times.size());
  Eigen::VectorXd res(n);
  f(p, res);
  double ss = 0.0;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double d = model.value(p, trace.times[i]) - trace.values[i];
    ss += d * d;
  }
  r.residual_rms = std::sqrt(ss / static_cast<double>(n));
  for (int k = 0; k < P; ++k)
    r.params.emplace_back(names[k], p(k));

  if (r.converged) {
    Eigen::MatrixXd jac(n, P);
    f.df(p, jac);
    const Eigen::Matrix<double, P, P> jtj = jac.transpose() * jac;
    // weighted fits: weights are true inverse variances, no rescaling
    const double s2 = trace.weights.empty() ? res.squaredNorm() / std::max<double>(1.0, n - P)
                                            : 1.0;
    Eigen::FullPivLU<Eigen::Matrix<double, P, P>> lu(jtj);
    if (lu.isInvertible()) {
      const Eigen::Matrix<double, P, P> cov = s2 * lu.inverse();
      for (int k = 0; k < P; ++k)
        r.param_stderr.push_back(std::sqrt(std::max(0.0, cov(k, k))));
    } else {
      r.converged = false;
      r.warnings.push_back("singular_jacobian: parameters are not identifiable from this trace");
    }
  }
  return r;
}

/// Weighted linear least squares of `trace` on the columns of `basis`; returns
/// (coefficients, weighted sum of squares).
inline std::pair<Eigen::VectorXd, double> linear_fit(const Eigen::MatrixXd &basis,
                                                     const Trace &trace) {
  const auto n = basis.rows();
  Eigen::MatrixXd a = basis;
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(trace.values.data(), n);
  if (!trace.weights.empty()) {
    const Eigen::VectorXd sw =
        Eigen::Map<const Eigen::VectorXd>(trace.weights.data(), n).cwiseSqrt();
    a = sw.asDiagonal() * a;
    b = sw.asDiagonal() * b;
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return {c, (a * c - b).squaredNorm()};
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

inline double min_spacing(const std::vector<double> &t) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < t.size(); ++i)
    d = std::min(d, t[i] - t[i - 1]);
  return d;
}

struct DephasingModel : Model<3> {
  // p = (sigma, amplitude, offset)
  double value(const Eigen::Vector3d &p, double t) const override {
    return p(2) + p(1) * std::exp(-0.5 * p(0) * p(0) * t * t);
  }
  Eigen::Vector3d grad(const Eigen::Vector3d &p, double t) const override {
    const double e = std::exp(-0.5 * p(0) * p(0) * t * t);
    return {-p(1) * p(0) * t * t * e, e, 1.0};
  }
};

struct RabiModel : Model<5> {
  // p = (J, sigma_bar, offset, c_cos, c_decay)
  using Vec = Eigen::Matrix<double, 5, 1>;
  double value(const Vec &p, double t) const override {
    const double c = std::cos(p(0) * t);
    return p(2) + p(3) * c + p(4) * (1.0 + c) * std::exp(-0.5 * p(1) * p(1) * t * t);
  }
  Vec grad(const Vec &p, double t) const override {
    const double c = std::cos(p(0) * t), s = std::sin(p(0) * t);
    const double g = std::exp(-0.5 * p(1) * p(1) * t * t);
    Vec d;
    d << -(p(3) + p(4) * g) * t * s, -p(4) * (1.0 + c) * p(1) * t * t * g, 1.0, c, (1.0 + c) * g;
    return d;
  }
};

} // namespace detail

/// Fit offset + amplitude exp(-(sigma t)^2/2). Non-convergence is reported in
/// the result, not thrown.
inline FitResult fit_dephasing(const Trace &trace) {
  trace.validate();
  const auto n = static_cast<Eigen::Index>(trace.times.size());
  const double t_max = trace.times.back();
  if (!(t_max > 0.0))
    throw UsageError("fit_dephasing: trace must extend beyond t = 0");

  // grid pre-stage: linear in (amplitude, offset) for each trial sigma
  double best_ss = std::numeric_limits<double>::infinity(), best_sigma = 1.0 / t_max;
  Eigen::VectorXd best_c(2);
  const double hi = 10.0 / std::max(detail::min_spacing(trace.times), t_max / 1e4);
  for (double s : detail::log_grid(0.2 / t_max, hi, 240)) {
    Eigen::MatrixXd basis(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      basis(i, 0) = std::exp(-0.5 * s * s * trace.times[i] * trace.times[i]);
      basis(i, 1) = 1.0;
    }
    auto [c, ss] = detail::linear_fit(basis, trace);
    if (ss < best_ss) {
      best_ss = ss;
      best_sigma = s;
      best_c = c;
    }
  }

  detail::DephasingModel model;
  FitResult r = detail::refine<3>(model, trace, Eigen::Vector3d(best_sigma, best_c(0), best_c(1)),
                                  {"sigma", "amplitude", "offset"});
  r.params[0].second = std::abs(r.params[0].second);

  double spread = 0.0;
  for (double v : trace.values)
    spread = std::max(spread, std::abs(v - trace.values.front()));
  if (std::abs(r.get("amplitude")) <= 1e-6 * std::max(1.0, spread) || spread == 0.0) {
    r.converged = false;
    r.param_stderr.clear();
    r.warnings.push_back("no_decay: fitted amplitude is zero; sigma is undetermined");
  } else if (r.get("sigma") * t_max < 2.0) {
    r.warnings.push_back("short_trace: trace spans fewer than 2 decay constants");
  }
  return r;
}

/// Fit offset + c_cos cos(J t) + c_decay (1 + cos(J t)) exp(-(sigma_bar t)^2/2).
/// A grid scan over (J, sigma_bar) with the three linear coefficients solved
/// exactly precedes local refinement. With `j_guess` the scan is restricted to
/// [0.5, 1.5] j_guess.
inline FitResult fit_rabi(const Trace &trace, std::optional<double> j_guess = std::nullopt) {
  trace.validate();
  if (j_guess && !(*j_guess > 0.0))
    throw UsageError("fit_rabi: j_guess must be > 0");
  const auto n = static_cast<Eigen::Index>(trace.times.size());
  const double t_max = trace.times.back();
  const double dt = detail::min_spacing(trace.times);
  if (!(t_max > 0.0))
    throw UsageError("fit_rabi: trace must extend beyond t = 0");

  const double nyquist = std::numbers::pi / dt;
  double j_lo = 0.5 * std::numbers::pi / t_max, j_hi = nyquist;
  if (j_guess) {
    j_lo = std::max(j_lo, 0.5 * *j_guess);
    j_hi = std::max(j_lo * 1.01, 1.5 * *j_guess);
  }
  // phase error across the trace stays below pi/4 between grid points
  const double j_step = std::numbers::pi / (4.0 * t_max);
  const int n_j = std::clamp(static_cast<int>((j_hi - j_lo) / j_step) + 2, 16, 20000);
  const auto sbar_grid = detail::log_grid(0.2 / t_max, 5.0 / std::max(dt, t_max / 1e4), 16);

  std::vector<double> w(n, 1.0);
  if (!trace.weights.empty())
    w = trace.weights;
  std::vector<std::vector<double>> gauss(sbar_grid.size(), std::vector<double>(n));
  for (std::size_t k = 0; k < sbar_grid.size(); ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      gauss[k][i] = std::exp(-0.5 * std::pow(sbar_grid[k] * trace.times[i], 2));
  double vv = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    vv += w[i] * trace.values[i] * trace.values[i];

  std::vector<double> j_grid(n_j), ss_by_j(n_j, std::numeric_limits<double>::infinity());
  std::vector<double> sbar_by_j(n_j);
  std::vector<Eigen::Vector3d> c_by_j(n_j);
  std::vector<double> cosjt(n);
  for (int a = 0; a < n_j; ++a) {
    const double j = j_lo + (j_hi - j_lo) * a / (n_j - 1);
    j_grid[a] = j;
    for (Eigen::Index i = 0; i < n; ++i)
      cosjt[i] = std::cos(j * trace.times[i]);
    for (std::size_t k = 0; k < sbar_grid.size(); ++k) {
      // normal equations of the three linear coefficients
      Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
      Eigen::Vector3d atb = Eigen::Vector3d::Zero();
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector3d phi(1.0, cosjt[i], (1.0 + cosjt[i]) * gauss[k][i]);
        ata.noalias() += w[i] * phi * phi.transpose();
        atb += w[i] * trace.values[i] * phi;
      }
      const Eigen::LDLT<Eigen::Matrix3d> ldlt(ata);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        continue;
      const Eigen::Vector3d coef = ldlt.solve(atb);
      const double ss = std::max(0.0, vv - coef.dot(atb));
      if (std::isfinite(ss) && ss < ss_by_j[a]) {
        ss_by_j[a] = ss;
        sbar_by_j[a] = sbar_grid[k];
        c_by_j[a] = coef;
      }
    }
  }
  // strict '<' keeps the smaller J on ties
  int best = 0;
  for (int a = 1; a < n_j; ++a)
    if (ss_by_j[a] < ss_by_j[best])
      best = a;

  // competing local minimum far from the best one
  double runner_up = std::numeric_limits<double>::infinity();
  for (int a = 1; a + 1 < n_j; ++a) {
    const bool local_min = ss_by_j[a] <= ss_by_j[a - 1] && ss_by_j[a] <= ss_by_j[a + 1];
    if (local_min && std::abs(j_grid[a] - j_grid[best]) > 4.0 * j_step)
      runner_up = std::min(runner_up, ss_by_j[a]);
  }

  detail::RabiModel model;
  Eigen::Matrix<double, 5, 1> p0;
  p0 << j_grid[best], sbar_by_j[best], c_by_j[best](0), c_by_j[best](1), c_by_j[best](2);
  FitResult r = detail::refine<5>(model, trace, p0, {"J", "sigma_bar", "offset", "c_cos", "c_decay"});
  r.params[1].second = std::abs(r.params[1].second);

  const double j_fit = r.get("J");
  const double noise_floor = std::max(ss_by_j[best], 1e-30);
  if (runner_up < 1.05 * noise_floor + 1e-12 * n)
    r.warnings.push_back("aliased: a distant exchange frequency fits equally well");
  if (j_fit * t_max < std::numbers::pi)
    r.warnings.push_back("unresolved: J * t_max < pi, fewer than half an oscillation is sampled");
  const double j_ref = j_guess ? *j_guess : j_fit;
  if (j_ref > 0.0 && 2.0 * std::numbers::pi / j_ref < 8.0 * dt)
    r.warnings.push_back("undersampled: fewer than 8 points per oscillation period");
  return r;
}

enum class SigmaKind { sigma12, sigma23, sigma_bar12, sigma_bar23 };

inline constexpr std::array<SigmaKind, 4> all_sigma_kinds = {
    SigmaKind::sigma12, SigmaKind::sigma23, SigmaKind::sigma_bar12, SigmaKind::sigma_bar23};

inline std::string to_string(SigmaKind k) {
  switch (k) {
  case SigmaKind::sigma12: return "sigma12";
  case SigmaKind::sigma23: return "sigma23";
  case SigmaKind::sigma_bar12: return "sigma_bar12";
  default: return "sigma_bar23";
  }
}

inline SigmaKind sigma_kind_from_string(const std::string &s) {
  for (SigmaKind k : all_sigma_kinds)
    if (to_string(k) == s)
      return k;
  throw UsageError("unknown measurement kind '" + s +
                   "' (expected sigma12, sigma23, sigma_bar12 or sigma_bar23)");
}

/// Linear form of kind^2 in (sigma1^2, sigma2^2, sigma3^2).
inline Eigen::RowVector3d sigma_form(SigmaKind k) {
  switch (k) {
  case SigmaKind::sigma12: return {1.0, 1.0, 0.0};
  case SigmaKind::sigma23: return {0.0, 1.0, 1.0};
  case SigmaKind::sigma_bar12: return {0.25, 0.25, 1.0};
  default: return {1.0, 0.25, 0.25};
  }
}

/// A fitted decay constant. `value` is sigma itself, not squared; stderr 0
/// means unknown.
struct Measurement {
  SigmaKind kind = SigmaKind::sigma12;
  double value = 0.0;
  double stderr_ = 0.0;
};

struct SigmaSolution {
  std::array<double, 3> sigma_sq{};
  std::array<double, 3> sigma_sq_stderr{}; ///< zeros unless every input has a stderr
  bool feasible = false;
  double residual = 0.0; ///< rms of (form . sigma_sq - value^2) over the inputs

  std::array<double, 3> sigmas() const {
    return {std::sqrt(std::max(0.0, sigma_sq[0])), std::sqrt(std::max(0.0, sigma_sq[1])),
            std::sqrt(std::max(0.0, sigma_sq[2]))};
  }
};

namespace detail {

inline int form_rank(const std::vector<SigmaKind> &kinds) {
  if (kinds.empty())
    return 0;
  Eigen::MatrixXd a(kinds.size(), 3);
  for (std::size_t i = 0; i < kinds.size(); ++i)
    a.row(i) = sigma_form(kinds[i]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

} // namespace detail

/// Least-squares (sigma1^2, sigma2^2, sigma3^2) from three or more independent
/// decay constants.
inline SigmaSolution solve_sigmas(const std::vector<Measurement> &ms) {
  std::vector<SigmaKind> kinds;
  for (const auto &m : ms) {
    if (!(m.value >= 0.0) || !std::isfinite(m.value) || !(m.stderr_ >= 0.0))
      throw UsageError("solve_sigmas: values and stderrs must be finite and >= 0");
    kinds.push_back(m.kind);
  }
  if (detail::form_rank(kinds) < 3) {
    std::vector<std::string> completions, missing;
    for (SigmaKind k : all_sigma_kinds) {
      if (std::find(kinds.begin(), kinds.end(), k) != kinds.end())
        continue;
      missing.push_back(to_string(k));
      auto extended = kinds;
      extended.push_back(k);
      if (detail::form_rank(extended) == 3)
        completions.push_back(to_string(k));
    }
    if (completions.empty())
      completions = missing;
    std::string msg = "solve_sigmas: measurements determine only " +
                      std::to_string(detail::form_rank(kinds)) + " of 3 combinations; add one of:";
    for (const auto &c : completions)
      msg += " " + c;
    throw UnderDeterminedError(msg, completions);
  }

  const bool weighted =
      std::all_of(ms.begin(), ms.end(), [](const Measurement &m) { return m.stderr_ > 0.0; });
  const auto n = static_cast<Eigen::Index>(ms.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n), w = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.row(i) = sigma_form(ms[i].kind);
    b(i) = ms[i].value * ms[i].value;
    if (weighted)
      w(i) = 1.0 / (2.0 * ms[i].value * ms[i].stderr_); // d(s^2) = 2 s ds
  }
  const Eigen::MatrixXd aw = w.asDiagonal() * a;
  const Eigen::VectorXd x = aw.colPivHouseholderQr().solve(w.asDiagonal() * b);

  SigmaSolution s;
  for (int k = 0; k < 3; ++k)
    s.sigma_sq[k] = x(k);
  s.residual = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(n));
  if (weighted) {
    const Eigen::Matrix3d cov = (aw.transpose() * aw).inverse();
    for (int k = 0; k < 3; ++k)
      s.sigma_sq_stderr[k] = std::sqrt(std::max(0.0, cov(k, k)));
  }
  s.feasible = true;
  for (int k = 0; k < 3; ++k)
    if (s.sigma_sq[k] < -std::max(s.sigma_sq_stderr[k], 1e-12))
      s.feasible = false;
  return s;
}

struct PartialSigma {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// sigma3^2 = sigma_bar12^2 - sigma12^2/4, from a dephasing fit of the
/// standard preparation and a Rabi fit of the swapped one.
inline PartialSigma sigma3_sq_shortcut(const Measurement &sigma12, const Measurement &sigma_bar12) {
  if (sigma12.kind != SigmaKind::sigma12 || sigma_bar12.kind != SigmaKind::sigma_bar12)
    throw UsageError("sigma3_sq_shortcut: needs one sigma12 and one sigma_bar12 measurement");
  const double a = 2.0 * sigma_bar12.value * sigma_bar12.stderr_;
  const double b = 0.5 * sigma12.value * sigma12.stderr_;
  return {sigma_bar12.value * sigma_bar12.value - 0.25 * sigma12.value * sigma12.value,
          std::hypot(a, b)};
}

} // namespace tqd
