#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tqd/errors.hpp"
#include "tqd/hyperfine.hpp"

namespace tqd {

/// How the prepared state is distributed over the two gauge manifolds.
enum class GaugeMode { both, up, down };

inline std::string to_string(GaugeMode g) {
  switch (g) {
  case GaugeMode::up: return "up";
  case GaugeMode::down: return "down";
  default: return "both";
  }
}

/// Prepare a singlet on `prepared`, evolve with exchange `j` on `pulsed`,
/// measure the singlet return probability at each of `times`.
struct ExperimentSpec {
  DotPair prepared = DotPair::p12;
  DotPair pulsed = DotPair::p23;
  double j = 0.0;
  std::vector<double> times;
  GaugeMode gauge = GaugeMode::both;

  bool swapped() const { return prepared == DotPair::p23; }

  void validate() const {
    if (prepared == pulsed)
      throw UsageError("ExperimentSpec: pulsed pair must differ from the prepared pair");
    if (!(j >= 0.0) || !std::isfinite(j))
      throw UsageError("ExperimentSpec: exchange must be finite and >= 0");
    if (times.empty())
      throw UsageError("ExperimentSpec: time grid is empty");
    if (!(times.front() >= 0.0))
      throw UsageError("ExperimentSpec: time grid must start at t >= 0");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw UsageError("ExperimentSpec: time grid must be strictly increasing (index " +
                         std::to_string(i) + ")");
  }
};

enum class Method { mc8, mc3, quadrature, inf_j, high_j, low_j, zero_j };

inline std::string to_string(Method m) {
  switch (m) {
  case Method::mc8: return "mc8";
  case Method::mc3: return "mc3";
  case Method::quadrature: return "quadrature";
  case Method::inf_j: return "inf_j";
  case Method::high_j: return "high_j";
  case Method::low_j: return "low_j";
  case Method::zero_j: return "zero_j";
  }
  return "?";
}

/// Accepts the enum spellings plus the aliases "mc" (mc8) and "exact" (quadrature).
inline Method method_from_string(const std::string &s) {
  if (s == "mc" || s == "mc8") return Method::mc8;
  if (s == "mc3") return Method::mc3;
  if (s == "exact" || s == "quadrature") return Method::quadrature;
  if (s == "inf_j") return Method::inf_j;
  if (s == "high_j") return Method::high_j;
  if (s == "low_j") return Method::low_j;
  if (s == "zero_j") return Method::zero_j;
  throw UsageError("unknown method '" + s + "'");
}

/// CSV column header for a method's values.
inline std::string column_name(Method m) {
  switch (m) {
  case Method::mc8: return "p0_mc";
  case Method::mc3: return "p0_mc3";
  case Method::quadrature: return "p0_exact";
  default: return "p0_" + to_string(m);
  }
}

inline bool is_monte_carlo(Method m) { return m == Method::mc8 || m == Method::mc3; }

/// Sampled P0(t).
struct Curve {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderr_; ///< per-point standard error, Monte Carlo only
  Method method = Method::quadrature;
  std::map<std::string, double> meta;
  std::vector<std::string> warnings; ///< e.g. evaluated outside an approximation's domain
};

} // namespace tqd
