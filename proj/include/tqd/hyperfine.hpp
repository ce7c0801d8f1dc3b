#pragma once

// Classical nuclear-field model: static zero-mean Gaussian field per dot.
// All quantities are in units of sigma_hf.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "tqd/errors.hpp"

namespace tqd {

struct DotSigmas {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;

  void validate() const {
    if (!(s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || !std::isfinite(s1) || !std::isfinite(s2) ||
        !std::isfinite(s3))
      throw UsageError("DotSigmas: sigmas must be finite and >= 0");
  }

  /// Dot labels 1 and 3 exchanged.
  DotSigmas mirrored() const { return {s3, s2, s1}; }
};

struct FieldSample {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;

  FieldSample operator-() const { return {-b1, -b2, -b3}; }
};

/// Adjacent pair whose exchange can be pulsed; the third dot is "outside".
enum class DotPair { p12, p23 };

inline std::string to_string(DotPair p) { return p == DotPair::p12 ? "12" : "23"; }

struct PairDeltas {
  double delta = 0.0;     ///< field difference within the pair
  double delta_bar = 0.0; ///< outside field minus the pair average
};

struct PairStats {
  double sigma_pair = 0.0; ///< std dev of delta
  double sigma_bar = 0.0;  ///< std dev of delta_bar
  double cov = 0.0;        ///< cov(delta, delta_bar)
};

/// Gaussian field draw number `index` of the stream identified by `seed`.
/// Pure function of (sigmas, seed, index).
inline FieldSample sample(const DotSigmas &sigmas, std::uint64_t seed, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal;
  FieldSample s;
  s.b1 = sigmas.s1 * normal(engine);
  s.b2 = sigmas.s2 * normal(engine);
  s.b3 = sigmas.s3 * normal(engine);
  return s;
}

/// (1,2): delta = b1 - b2, delta_bar = b3 - (b1 + b2)/2.
/// (2,3): delta = b2 - b3, delta_bar = b1 - (b2 + b3)/2.
inline PairDeltas deltas(const FieldSample &s, DotPair p) {
  if (p == DotPair::p12)
    return {s.b1 - s.b2, s.b3 - (s.b1 + s.b2) / 2.0};
  return {s.b2 - s.b3, s.b1 - (s.b2 + s.b3) / 2.0};
}

/// Moments of `deltas` for pair (j,k) with outside dot l:
/// sigma_jk^2 = sj^2 + sk^2, sigma_bar^2 = sl^2 + (sj^2 + sk^2)/4,
/// cov = (sk^2 - sj^2)/2.
inline PairStats pair_stats(const DotSigmas &sigmas, DotPair p) {
  sigmas.validate();
  const double a = sigmas.s1 * sigmas.s1, b = sigmas.s2 * sigmas.s2, c = sigmas.s3 * sigmas.s3;
  double in_j, in_k, out;
  if (p == DotPair::p12) {
    in_j = a; in_k = b; out = c;
  } else {
    in_j = b; in_k = c; out = a;
  }
  PairStats st;
  st.sigma_pair = std::sqrt(in_j + in_k);
  st.sigma_bar = std::sqrt(out + (in_j + in_k) / 4.0);
  st.cov = (in_k - in_j) / 2.0;
  return st;
}

} // namespace tqd
