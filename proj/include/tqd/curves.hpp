#pragma once

// One entry point that evaluates P0 over a time grid by any method.

#include <cstdint>
#include <string>

#include "tqd/analytic.hpp"
#include "tqd/curve.hpp"
#include "tqd/dynamics.hpp"

namespace tqd {

struct CurveOptions {
  QuadratureSpec quad;
  std::uint64_t n_samples = 200000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  HighJForm high_j_form = HighJForm::unit_envelope;
  LowJForm low_j_form = LowJForm::printed_reconciled;
};

namespace detail {

inline void add_domain_warnings(Curve &c, const DotSigmas &sigmas, const ExperimentSpec &spec) {
  const double s = experiment_stats(sigmas, spec).sigma_pair;
  const double y = s > 0.0 ? spec.j / s : std::numeric_limits<double>::infinity();
  switch (c.method) {
  case Method::high_j:
    if (y < 3.0)
      c.warnings.push_back("high_j evaluated at J/sigma_pair = " + std::to_string(y) +
                           ", outside its validity domain (>= 3)");
    break;
  case Method::low_j:
    if (y > 0.5)
      c.warnings.push_back("low_j evaluated at J/sigma_pair = " + std::to_string(y) +
                           ", outside its validity domain (<= 0.5)");
    break;
  case Method::zero_j:
    if (spec.j != 0.0)
      c.warnings.push_back("zero_j ignores the configured exchange J = " + std::to_string(spec.j));
    break;
  default:
    break;
  }
}

} // namespace detail

inline Curve make_curve(Method m, const DotSigmas &sigmas, const ExperimentSpec &spec,
                        const CurveOptions &opt = {}) {
  spec.validate();
  sigmas.validate();
  if (is_monte_carlo(m)) {
    McOptions mc;
    mc.rep = m == Method::mc8 ? Representation::full8 : Representation::su3;
    mc.workers = opt.workers;
    return p0_mc(spec, sigmas, opt.n_samples, opt.seed, mc);
  }

  Curve c;
  c.method = m;
  c.times = spec.times;
  c.values.reserve(spec.times.size());
  for (double t : spec.times) {
    double p = 0.0;
    switch (m) {
    case Method::quadrature: p = p0_exact(sigmas, spec, t, opt.quad); break;
    case Method::inf_j: p = p0_inf_j(sigmas, spec, t); break;
    case Method::high_j: p = p0_high_j(sigmas, spec, t, opt.high_j_form); break;
    case Method::low_j: p = p0_low_j(sigmas, spec, t, opt.low_j_form); break;
    case Method::zero_j: p = p0_zero_j(sigmas, spec, t); break;
    default: break;
    }
    c.values.push_back(p);
  }
  c.meta = {{"j", spec.j}, {"sigma1", sigmas.s1}, {"sigma2", sigmas.s2}, {"sigma3", sigmas.s3}};
  detail::add_domain_warnings(c, sigmas, spec);
  return c;
}

} // namespace tqd
