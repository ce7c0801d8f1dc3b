#pragma once

// Operator algebra of one gauge manifold (m_z = +1/2 or -1/2) of three
// exchange-coupled spins, written in the ordered basis (|0>, |1>, |Q>).

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "tqd/errors.hpp"

namespace tqd {

using cd = std::complex<double>;
using Mat3C = Eigen::Matrix3cd;

/// Which m_z = +-1/2 manifold a state lives in.
enum class Gauge { up, down };

/// +1 for the up manifold, -1 for down; the hyperfine term carries this sign.
constexpr double gauge_sign(Gauge g) noexcept { return g == Gauge::up ? 1.0 : -1.0; }

constexpr Gauge flipped(Gauge g) noexcept { return g == Gauge::up ? Gauge::down : Gauge::up; }

inline std::string to_string(Gauge g) { return g == Gauge::up ? "up" : "down"; }

namespace angles {

/// Rotation taking exchange on dots 2-3 onto exchange on dots 1-2.
inline constexpr double phi = 2.0 * std::numbers::pi / 3.0;

/// pi - atan(sqrt 8); cos(beta) = -1/3.
inline double beta() { return std::numbers::pi - std::atan(std::sqrt(8.0)); }

} // namespace angles

/// Standard Gell-Mann matrix lambda_j, j = 1..8.
inline Mat3C gell_mann(int j) {
  const cd I{0.0, 1.0};
  Mat3C m = Mat3C::Zero();
  switch (j) {
  case 1: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
  case 2: m(0, 1) = -I; m(1, 0) = I; break;
  case 3: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  case 4: m(0, 2) = 1.0; m(2, 0) = 1.0; break;
  case 5: m(0, 2) = -I; m(2, 0) = I; break;
  case 6: m(1, 2) = 1.0; m(2, 1) = 1.0; break;
  case 7: m(1, 2) = -I; m(2, 1) = I; break;
  case 8: {
    const double s = 1.0 / std::sqrt(3.0);
    m(0, 0) = s; m(1, 1) = s; m(2, 2) = -2.0 * s;
    break;
  }
  default:
    throw UsageError("gell_mann: index " + std::to_string(j) + " outside 1..8");
  }
  return m;
}

/// Exchange S1.S2 inside one manifold, traceless (the 8-dim operator minus 1/12 I
/// restricted to the manifold). Diagonal: (-2/3, 1/3, 1/3).
inline Mat3C exchange12() {
  return -gell_mann(8) / (2.0 * std::sqrt(3.0)) - gell_mann(3) / 2.0;
}

/// Exchange S2.S3 inside one manifold, traceless.
inline Mat3C exchange23() {
  return -gell_mann(8) / (2.0 * std::sqrt(3.0)) -
         (gell_mann(3) * std::cos(angles::phi) + gell_mann(1) * std::sin(angles::phi)) / 2.0;
}

/// exp(-i angle lambda_2 / 2): a real rotation by angle/2 in the (|0>,|1>) plane.
inline Mat3C u2(double angle) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  Mat3C u = Mat3C::Identity();
  u(0, 0) = c; u(0, 1) = -s;
  u(1, 0) = s; u(1, 1) = c;
  return u;
}

/// exp(-i angle lambda_7 / 2): a real rotation by angle/2 in the (|1>,|Q>) plane.
inline Mat3C u7(double angle) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  Mat3C u = Mat3C::Identity();
  u(1, 1) = c; u(1, 2) = -s;
  u(2, 1) = s; u(2, 2) = c;
  return u;
}

/// Angle eta with U2(eta)^dag (jz E12 + jn E23) U2(eta) diagonal.
inline double exchange_mix_angle(double jz, double jn) {
  if (jz == 0.0 && jn == 0.0)
    throw DegenerateInputError("exchange_mix_angle: jz and jn both zero");
  return std::atan2(jn * std::sin(angles::phi), jn * std::cos(angles::phi) + jz);
}

/// Hyperfine Hamiltonian sum_j B_j S_j^z projected on one manifold (traceless
/// part), from the dot-1-2 differences delta = B1 - B2 and
/// delta_bar = B3 - (B1 + B2)/2. Odd in the gauge.
inline Mat3C hyperfine_su3(double delta, double delta_bar, Gauge g) {
  const Mat3C r = u7(angles::beta());
  const Mat3C inner = (delta / 2.0) * gell_mann(1) + (delta_bar / std::sqrt(3.0)) * gell_mann(8);
  return gauge_sign(g) * (r * inner * r.adjoint());
}

/// Frame diagonalizing H_hf + jn E23 in the up manifold.
struct PulsedFrame {
  Mat3C unitary;          ///< columns are eigenvectors
  Eigen::Vector3d eigen;  ///< diagonal of unitary^dag H unitary
  double theta = 0.0;     ///< final lambda_2 rotation angle
};

/// Closed-form diagonalization of H_hf + jn E23 (up manifold) where H_hf has
/// dot-2-3 differences delta = B2 - B3, delta_bar = B1 - (B2 + B3)/2.
///
/// The chain is U2(phi) U7(-beta) U2(theta): U2(phi) maps E23 onto E12 and the
/// hyperfine term onto its 2-3 form up to a sign flip of |Q>, which turns the
/// U7(beta) of hyperfine_su3 into U7(-beta). theta = -atan2(delta, jn), so at
/// jn = 0 it is -sign(delta) pi/2 and 0 when delta is also 0.
inline PulsedFrame diagonalize_pulsed(double jn, double delta, double delta_bar) {
  if (!(jn >= 0.0))
    throw UsageError("diagonalize_pulsed: jn must be >= 0");
  PulsedFrame f;
  f.theta = -std::atan2(delta, jn);
  f.unitary = u2(angles::phi) * u7(-angles::beta()) * u2(f.theta);
  const double half_split = std::hypot(jn, delta) / 2.0;
  const double q = (jn - 2.0 * delta_bar) / (2.0 * std::sqrt(3.0)) / std::sqrt(3.0);
  f.eigen << -half_split - q, half_split - q, 2.0 * q;
  return f;
}

} // namespace tqd
