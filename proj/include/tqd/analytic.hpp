#pragma once

// Disorder-averaged singlet return probability from reduced one-dimensional
// integrals, plus closed-form approximations for large, small and vanishing
// exchange.
//
// For the standard experiment (singlet on dots 1-2, exchange on 2-3):
//
//   P0(t) = 1/2 - I1/4 + 1/4 exp(-(s^2 sb^2 - C^2) t^2 / 2 s^2) Re{(1 + e^{iJt}) I2}
//
// with s = sigma_23, sb = sigma_bar_23, C = cov(Delta_23, Delta_bar_23) and,
// in u = s t, y = J / s, w = C / s^2, x ~ N(0,1),
//
//   I1 = (yu)^2/4 E[sinc^2(sqrt(x^2+y^2) u/2)]
//   I2 = E[(cos(wxu) - i x sin(wxu)/sqrt(x^2+y^2)) exp(i(sqrt(x^2+y^2) - y) u/2)].
//
// The swapped experiment (singlet on 2-3, exchange on 1-2) is the same problem
// with dot labels 1 and 3 exchanged.

#include <cmath>
#include <complex>
#include <numbers>

#include "tqd/curve.hpp"
#include "tqd/hyperfine.hpp"
#include "tqd/quadrature.hpp"

namespace tqd {

/// Pair statistics entering the reduced integrals for a given experiment.
inline PairStats experiment_stats(const DotSigmas &sigmas, const ExperimentSpec &spec) {
  const DotSigmas frame = spec.swapped() ? sigmas.mirrored() : sigmas;
  return pair_stats(frame, DotPair::p23);
}

/// Dimensionless variables of the reduced integrals.
struct ReducedParams {
  double u = 0.0;     ///< sigma_pair * t
  double y = 0.0;     ///< J / sigma_pair
  double w = 0.0;     ///< cov / sigma_pair^2
  double sbar = 0.0;  ///< sigma_bar
  double spair = 0.0; ///< sigma_pair

  static ReducedParams from(const PairStats &st, double j, double t) {
    if (!(st.sigma_pair > 0.0))
      throw DegenerateInputError("ReducedParams: sigma_pair must be > 0");
    return {st.sigma_pair * t, j / st.sigma_pair, st.cov / (st.sigma_pair * st.sigma_pair),
            st.sigma_bar, st.sigma_pair};
  }
};

namespace detail {

inline double sinc(double z) {
  return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z;
}

struct ReducedIntegrals {
  double i1 = 0.0;
  std::complex<double> i2;
};

inline ReducedIntegrals reduced_integrals(double u, double y, double w, const QuadratureSpec &q) {
  if (!(u >= 0.0) || !(y >= 0.0))
    throw UsageError("reduced integrals: u and y must be >= 0");
  if (u == 0.0)
    return {0.0, {1.0, 0.0}};
  const double pref = 0.25 * (y * u) * (y * u);
  auto f = [=](double x) -> std::array<double, 3> {
    const double rho = std::hypot(x, y);
    const double s = sinc(0.5 * rho * u);
    const double r = rho > 0.0 ? x / rho : 0.0;
    // (rho - y) without cancellation at large y
    const double b = 0.5 * u * (rho > 0.0 ? x * x / (rho + y) : 0.0);
    const double cw = std::cos(w * x * u), sw = std::sin(w * x * u);
    const double cb = std::cos(b), sb = std::sin(b);
    return {pref * s * s, cw * cb + r * sw * sb, cw * sb - r * sw * cb};
  };
  const auto v = gaussian_expectation_even<3>(f, q, "reduced integrals");
  return {v[0], {v[1], v[2]}};
}

} // namespace detail

/// First reduced integral; 0 at u = 0 or y = 0.
inline double i1(double u, double y, const QuadratureSpec &q = {}) {
  if (y == 0.0 || u == 0.0)
    return 0.0;
  return detail::reduced_integrals(u, y, 0.0, q).i1;
}

/// Second reduced integral; 1 at u = 0.
inline std::complex<double> i2(double u, double y, double w, const QuadratureSpec &q = {}) {
  return detail::reduced_integrals(u, y, w, q).i2;
}

namespace detail {

/// exp(-(sb^2 - C^2/s^2) t^2/2): average over delta_bar conditional on delta.
inline double conditional_envelope(const PairStats &st, double t) {
  const double s2 = st.sigma_pair * st.sigma_pair;
  const double resid = s2 > 0.0 ? st.sigma_bar * st.sigma_bar - st.cov * st.cov / s2
                                 : st.sigma_bar * st.sigma_bar;
  return std::exp(-0.5 * std::max(0.0, resid) * t * t);
}

/// Gaussian rate of the exact J = 0 decay: sigma of the prepared pair.
inline double prepared_pair_sigma_sq(const PairStats &st) {
  return st.sigma_bar * st.sigma_bar - st.cov + 0.25 * st.sigma_pair * st.sigma_pair;
}

} // namespace detail

/// Exact P0(t) by quadrature of the reduced integrals.
inline double p0_exact(const DotSigmas &sigmas, const ExperimentSpec &spec, double t,
                       const QuadratureSpec &q = {}) {
  if (spec.prepared == spec.pulsed)
    throw UsageError("p0_exact: pulsed pair must differ from the prepared pair");
  if (!(t >= 0.0))
    throw UsageError("p0_exact: t must be >= 0");
  const PairStats st = experiment_stats(sigmas, spec);
  const double j = spec.j;
  const double g = detail::conditional_envelope(st, t);
  if (st.sigma_pair == 0.0) {
    // no in-pair disorder: a two-level Rabi problem averaged over delta_bar only
    const double s = std::sin(0.5 * j * t), c = std::cos(0.5 * j * t);
    return 0.5 - 0.25 * s * s + 0.5 * g * c * c;
  }
  const ReducedParams rp = ReducedParams::from(st, j, t);
  const auto ints = detail::reduced_integrals(rp.u, rp.y, rp.w, q);
  const std::complex<double> rabi = 1.0 + std::polar(1.0, j * t);
  return 0.5 - 0.25 * ints.i1 + 0.25 * g * (rabi * ints.i2).real();
}

/// Infinite-exchange limit: 3/8 + cos(Jt)/8 + (1 + cos(Jt))/4 exp(-(sb t)^2/2).
inline double p0_inf_j(const DotSigmas &sigmas, const ExperimentSpec &spec, double t) {
  if (!(spec.j > 0.0))
    throw UsageError("p0_inf_j: requires J > 0");
  const PairStats st = experiment_stats(sigmas, spec);
  const double c = std::cos(spec.j * t);
  const double sb = st.sigma_bar * t;
  return 0.375 + c / 8.0 + 0.25 * (1.0 + c) * std::exp(-0.5 * sb * sb);
}

/// Width function 1/sqrt(1 + [(s^2 t / xi)(1 + 2w)]^2), s = sigma_pair.
inline double width_A(double t, double xi, double w, double sigma_pair) {
  if (xi == 0.0)
    throw DegenerateInputError("width_A: xi must be nonzero");
  const double z = (sigma_pair * sigma_pair * t / xi) * (1.0 + 2.0 * w);
  return 1.0 / std::sqrt(1.0 + z * z);
}

/// exp(x^2) erfc(x) without overflow.
inline double erfcx(double x) {
  if (x < 0.0)
    return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 4.0)
    return std::exp(x * x) * std::erfc(x);
  // Laplace continued fraction, converged to machine precision for x >= 4
  double t = x;
  for (int k = 60; k >= 1; --k)
    t = x + 0.5 * k / t;
  return std::numbers::inv_sqrtpi / t;
}

/// sqrt(2 pi) x exp(x^2) erfc(x); tends to sqrt(2) for large x.
inline double big_F(double x) {
  return std::sqrt(2.0 * std::numbers::pi) * x * erfcx(x);
}

enum class HighJForm {
  /// Envelope factor sqrt(pi) x e^{x^2} erfc(x) = big_F/sqrt(2), which tends to
  /// 1 and matches the large-time average of I1.
  unit_envelope,
  /// big_F itself, unnormalized; over-estimates I1 by up to sqrt(2).
  printed
};

/// First-order large-exchange approximation (validity roughly J >= 3 sigma_pair).
/// The Rabi phase is built from sigma_pair alone.
inline double p0_high_j(const DotSigmas &sigmas, const ExperimentSpec &spec, double t,
                        HighJForm form = HighJForm::unit_envelope) {
  if (!(spec.j > 0.0))
    throw UsageError("p0_high_j: requires J > 0");
  const PairStats st = experiment_stats(sigmas, spec);
  if (!(st.sigma_pair > 0.0))
    throw DegenerateInputError("p0_high_j: sigma_pair must be > 0");
  const double j = spec.j, s = st.sigma_pair, c = st.cov;
  const double w = c / (s * s);

  double envelope = big_F(j / (std::numbers::sqrt2 * s));
  if (form == HighJForm::unit_envelope)
    envelope /= std::numbers::sqrt2;
  const double a1 = width_A(t, j, 0.0, s);
  const double i1 = envelope * 0.5 * (1.0 - std::sqrt(a1) * std::cos(j * t + 0.5 * std::acos(a1)));

  const double a0 = width_A(t, 2.0 * j, 0.0, s);
  const double aw = width_A(t, 2.0 * j, w, s);
  const double phase = 1.5 * std::acos(a0) - std::acos(aw) - w * w * (1.0 - a0 * a0);
  const double rabi = std::pow(a0, 1.5) / aw *
                      std::exp(-0.5 * a0 * a0 * c * c * t * t / (s * s)) *
                      (std::cos(phase) + std::cos(j * t + phase));
  return 0.5 - 0.25 * i1 + 0.25 * detail::conditional_envelope(st, t) * rabi;
}

enum class LowJForm {
  /// Literal small-exchange expression with its leading envelope replaced by
  /// the exact J = 0 decay exp(-(sigma_prepared t)^2/2).
  printed_reconciled,
  /// Leading envelope plus the O(y^2) terms of I1 and of the I2 average,
  /// derived from the reduced integrals.
  second_order
};

namespace detail {

/// E[(1 - cos(bx)) / (2x^2)] = 1/2 [|b| sqrt(pi/2) erf(|b|/sqrt2) - 1 + exp(-b^2/2)]
inline double half_sinc_moment(double b) {
  const double a = std::abs(b);
  return 0.5 * (a * std::sqrt(std::numbers::pi / 2.0) * std::erf(a / std::numbers::sqrt2) +
                std::expm1(-0.5 * b * b));
}

} // namespace detail

/// Small-exchange approximation (validity roughly J <= 0.5 sigma_pair).
inline double p0_low_j(const DotSigmas &sigmas, const ExperimentSpec &spec, double t,
                       LowJForm form = LowJForm::printed_reconciled) {
  if (spec.prepared == spec.pulsed)
    throw UsageError("p0_low_j: pulsed pair must differ from the prepared pair");
  const PairStats st = experiment_stats(sigmas, spec);
  if (!(st.sigma_pair > 0.0))
    throw DegenerateInputError("p0_low_j: sigma_pair must be > 0");
  if (t == 0.0)
    return 1.0;
  const double j = spec.j, s = st.sigma_pair, sb = st.sigma_bar, c = st.cov;
  const double u = s * t, y = j / s;
  const double half_phase = std::cos(0.5 * j * t);
  const double lead =
      0.5 * (1.0 + half_phase * std::exp(-0.5 * detail::prepared_pair_sigma_sq(st) * t * t));
  const double sqrt2pi = std::sqrt(2.0 * std::numbers::pi);
  // -I1/4 to O(y^2); identical in both forms
  const double i1_term =
      -2.0 * std::expm1(-0.5 * u * u) / u - sqrt2pi * std::erf(u / std::numbers::sqrt2);

  if (form == LowJForm::printed_reconciled) {
    // Sigmas of the outside-adjacent dot (label 2) and far dot (label 3) in the
    // experiment frame.
    const DotSigmas frame = spec.swapped() ? sigmas.mirrored() : sigmas;
    const double s2 = frame.s2, s3 = frame.s3;
    const double garbled_env = std::exp(-0.5 * (sb * sb * s * s - c * c) * u * u);
    const double inner =
        2.0 * std::exp(-0.5 * std::pow(s2 * s2 * t / s, 2)) * std::expm1(c * t * t) / u -
        sqrt2pi * (s2 / s) * (s2 / s) *
            (std::erf(s2 * s2 * t / (std::numbers::sqrt2 * s)) +
             std::erf(s3 * s3 * t / (std::numbers::sqrt2 * s)));
    return lead + j * j * t / (16.0 * s) * (i1_term + half_phase * garbled_env * inner);
  }

  const double w = c / (s * s);
  const double alpha = (w - 0.5) * u, beta = (w + 0.5) * u;
  const double k2 = 0.25 * u * std::sqrt(std::numbers::pi / 2.0) *
                        std::erf(alpha / std::numbers::sqrt2) -
                    0.5 * (detail::half_sinc_moment(beta) - detail::half_sinc_moment(alpha));
  return lead + y * y * u / 16.0 * i1_term +
         0.5 * half_phase * detail::conditional_envelope(st, t) * y * y * k2;
}

/// Zero-exchange closed form 1/2 (1 + exp(-(sigma_prepared t)^2/2)); the third
/// dot drops out.
inline double p0_zero_j(const DotSigmas &sigmas, const ExperimentSpec &spec, double t) {
  const double s = pair_stats(sigmas, spec.prepared).sigma_pair;
  return 0.5 * (1.0 + std::exp(-0.5 * s * s * t * t));
}

} // namespace tqd
