#pragma once

// Full three-spin Hilbert space in the product basis |s1 s2 s3>. Index of a
// product state = 4*b1 + 2*b2 + b3 with b = 0 for up and 1 for down, so dot 1
// is the most significant bit and up sorts before down.

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "tqd/errors.hpp"
#include "tqd/hyperfine.hpp"
#include "tqd/su3.hpp"

namespace tqd {

using Ket8 = Eigen::Matrix<cd, 8, 1>;
using Op8 = Eigen::Matrix<cd, 8, 8>;

/// Labels of the eight basis states: three per gauge manifold plus the two polarized states.
enum class BasisLabel {
  zero_up, one_up, leaked_up,
  zero_down, one_down, leaked_down,
  polarized_up,   // m_z = +3/2
  polarized_down  // m_z = -3/2
};

inline constexpr std::array<BasisLabel, 8> all_basis_labels{
    BasisLabel::zero_up,   BasisLabel::one_up,   BasisLabel::leaked_up,
    BasisLabel::zero_down, BasisLabel::one_down, BasisLabel::leaked_down,
    BasisLabel::polarized_up, BasisLabel::polarized_down};

namespace detail {

inline int dot_bit(int j) { return 2 - (j - 1); } // dot 1 -> bit 2

inline void check_dot(int j, const char *who) {
  if (j < 1 || j > 3)
    throw UsageError(std::string(who) + ": dot index " + std::to_string(j) + " outside 1..3");
}

/// Product-basis index of the state with a single flipped spin on `dot`
/// relative to all-up (gauge up) or all-down (gauge down).
inline int single_flip_index(int dot, Gauge g) {
  const int bit = 1 << dot_bit(dot);
  return g == Gauge::up ? bit : 7 - bit;
}

} // namespace detail

/// S_j^z, diagonal with entries +-1/2.
inline Op8 spin_z(int j) {
  detail::check_dot(j, "spin_z");
  Op8 op = Op8::Zero();
  for (int s = 0; s < 8; ++s)
    op(s, s) = ((s >> detail::dot_bit(j)) & 1) ? -0.5 : 0.5;
  return op;
}

inline Op8 total_spin_z() { return spin_z(1) + spin_z(2) + spin_z(3); }

/// E_jk = S_j . S_k = (P_jk)/2 - 1/4 with P_jk the swap of spins j and k.
inline Op8 exchange8(int j, int k) {
  detail::check_dot(j, "exchange8");
  detail::check_dot(k, "exchange8");
  if (j == k)
    throw UsageError("exchange8: j and k must differ");
  const int bj = detail::dot_bit(j), bk = detail::dot_bit(k);
  Op8 op = Op8::Zero();
  for (int s = 0; s < 8; ++s) {
    const int sj = (s >> bj) & 1, sk = (s >> bk) & 1;
    if (sj == sk) {
      op(s, s) += 0.25;
    } else {
      const int swapped = s ^ (1 << bj) ^ (1 << bk);
      op(s, s) += -0.25;
      op(swapped, s) += 0.5;
    }
  }
  return op;
}

inline Op8 exchange8(DotPair p) {
  return p == DotPair::p12 ? exchange8(1, 2) : exchange8(2, 3);
}

/// Normalized basis state. Down-manifold states are global spin flips of the
/// corresponding up states.
inline Ket8 basis_state(BasisLabel label) {
  Ket8 up = Ket8::Zero();
  const int udu = 0b010, duu = 0b100, uud = 0b001;
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), r6 = std::sqrt(6.0);
  bool flip = false;
  switch (label) {
  case BasisLabel::zero_down: flip = true; [[fallthrough]];
  case BasisLabel::zero_up:
    up(udu) = 1.0 / r2;
    up(duu) = -1.0 / r2;
    break;
  case BasisLabel::one_down: flip = true; [[fallthrough]];
  case BasisLabel::one_up:
    up(udu) = 1.0 / r6;
    up(duu) = 1.0 / r6;
    up(uud) = -std::sqrt(2.0 / 3.0);
    break;
  case BasisLabel::leaked_down: flip = true; [[fallthrough]];
  case BasisLabel::leaked_up:
    up(udu) = 1.0 / r3;
    up(duu) = 1.0 / r3;
    up(uud) = 1.0 / r3;
    break;
  case BasisLabel::polarized_down: flip = true; [[fallthrough]];
  case BasisLabel::polarized_up:
    up(0) = 1.0;
    break;
  }
  if (!flip)
    return up;
  Ket8 down = Ket8::Zero();
  for (int s = 0; s < 8; ++s)
    down(7 - s) = up(s);
  return down;
}

/// Ordered basis (|0 g>, |1 g>, |Q g>) of one manifold as columns.
inline Eigen::Matrix<cd, 8, 3> manifold_basis(Gauge g) {
  Eigen::Matrix<cd, 8, 3> v;
  if (g == Gauge::up) {
    v.col(0) = basis_state(BasisLabel::zero_up);
    v.col(1) = basis_state(BasisLabel::one_up);
    v.col(2) = basis_state(BasisLabel::leaked_up);
  } else {
    v.col(0) = basis_state(BasisLabel::zero_down);
    v.col(1) = basis_state(BasisLabel::one_down);
    v.col(2) = basis_state(BasisLabel::leaked_down);
  }
  return v;
}

/// Singlet on `pair` times the remaining spin aligned with the gauge
/// (up gauge: remaining spin up).
inline Ket8 singlet_state(DotPair pair, Gauge g) {
  if (pair == DotPair::p12)
    return basis_state(g == Gauge::up ? BasisLabel::zero_up : BasisLabel::zero_down);
  Ket8 up = Ket8::Zero();
  up(0b001) = 1.0 / std::sqrt(2.0);  // up up down
  up(0b010) = -1.0 / std::sqrt(2.0); // up down up
  if (g == Gauge::up)
    return up;
  Ket8 down = Ket8::Zero();
  for (int s = 0; s < 8; ++s)
    down(7 - s) = up(s);
  return down;
}

/// Product-basis indices spanning one m_z = +-1/2 block, ordered by the flipped
/// dot (3, 2, 1). The down ordering is the spin-flip image of the up ordering.
inline std::array<int, 3> mz_block_indices(Gauge g) {
  return {detail::single_flip_index(3, g), detail::single_flip_index(2, g),
          detail::single_flip_index(1, g)};
}

/// H = sum_j B_j S_j^z + jz E12 + jn E23.
inline Op8 build_hamiltonian(const FieldSample &fields, double jz, double jn) {
  Op8 h = fields.b1 * spin_z(1);
  h += fields.b2 * spin_z(2);
  h += fields.b3 * spin_z(3);
  h += jz * exchange8(1, 2);
  h += jn * exchange8(2, 3);
  return h;
}

/// Hamiltonian with a single exchange `j` switched on for `pulsed`.
inline Op8 build_hamiltonian(const FieldSample &fields, DotPair pulsed, double j) {
  return pulsed == DotPair::p12 ? build_hamiltonian(fields, j, 0.0)
                                : build_hamiltonian(fields, 0.0, j);
}

struct Su3Projection {
  Mat3C traceless;
  double shift = 0.0; ///< block = traceless + shift * I
};

/// 3x3 block of H in (|0 g>, |1 g>, |Q g>), split into traceless part and shift.
inline Su3Projection project_su3(const Op8 &h, Gauge g) {
  const Op8 sz = total_spin_z();
  const double comm = (h * sz - sz * h).cwiseAbs().maxCoeff();
  if (comm > 1e-10)
    throw ContractViolation("project_su3: H does not conserve total S^z (|[H,Sz]| = " +
                            std::to_string(comm) + ")");
  const auto v = manifold_basis(g);
  const Mat3C block = v.adjoint() * h * v;
  Su3Projection p;
  p.shift = block.trace().real() / 3.0;
  p.traceless = block - p.shift * Mat3C::Identity();
  return p;
}

} // namespace tqd
