#pragma once

// Exact evolution and Monte Carlo disorder averaging of the singlet return
// probability. Two independent representations: the 8-dim spin space and the
// 3-dim SU(3) manifold algebra.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "tqd/curve.hpp"
#include "tqd/hyperfine.hpp"
#include "tqd/spin8.hpp"
#include "tqd/su3.hpp"

namespace tqd {

enum class Representation { full8, su3 };

/// exp(-i H t) by spectral decomposition. H must be Hermitian within 1e-10.
template <typename Derived>
auto propagate(const Eigen::MatrixBase<Derived> &h, double t) {
  using Mat = Eigen::Matrix<cd, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Mat hm = h.template cast<cd>();
  const double asym = (hm - hm.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw ContractViolation("propagate: H is not Hermitian (max |H - H^dag| = " +
                            std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Mat> es(hm);
  const auto &v = es.eigenvectors();
  const auto phases =
      (es.eigenvalues().template cast<cd>() * cd(0.0, -t)).array().exp().matrix();
  return Mat(v * phases.asDiagonal() * v.adjoint());
}

/// Return probability |<psi| exp(-iHt) |psi>|^2 of a fixed state, reusable
/// across many times. Works on real symmetric or complex Hermitian H.
template <typename Mat>
class ReturnProbability {
public:
  using Vec = Eigen::Matrix<typename Mat::Scalar, Mat::RowsAtCompileTime, 1>;

  ReturnProbability(const Mat &h, const Vec &psi) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    energies_ = es.eigenvalues();
    weights_ = (es.eigenvectors().adjoint() * psi).cwiseAbs2();
  }

  /// sum_k w_k^2 + 2 sum_{k<l} w_k w_l cos((E_k - E_l) t)
  double operator()(double t) const {
    const auto n = energies_.size();
    double p = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      p += weights_[k] * weights_[k];
      for (Eigen::Index l = k + 1; l < n; ++l)
        p += 2.0 * weights_[k] * weights_[l] * std::cos((energies_[k] - energies_[l]) * t);
    }
    return p;
  }

private:
  Eigen::Matrix<double, Mat::RowsAtCompileTime, 1> energies_;
  Eigen::Matrix<double, Mat::RowsAtCompileTime, 1> weights_;
};

namespace detail {

inline std::vector<Gauge> gauges_of(GaugeMode m) {
  switch (m) {
  case GaugeMode::up: return {Gauge::up};
  case GaugeMode::down: return {Gauge::down};
  default: return {Gauge::up, Gauge::down};
  }
}

/// Singlet on `pair` in the (|0>,|1>,|Q>) basis. The 2-3 singlet is the -2/3
/// eigenvector of E23 = U2(phi) E12 U2(phi)^dag.
inline Eigen::Vector3cd su3_singlet(DotPair pair) {
  const Eigen::Vector3cd e0(1.0, 0.0, 0.0);
  return pair == DotPair::p12 ? e0 : Eigen::Vector3cd(u2(angles::phi) * e0);
}

inline Mat3C su3_hamiltonian(const FieldSample &f, DotPair pulsed, double j, Gauge g) {
  const PairDeltas d = deltas(f, DotPair::p12);
  return hyperfine_su3(d.delta, d.delta_bar, g) +
         j * (pulsed == DotPair::p12 ? exchange12() : exchange23());
}

/// m_z-block restriction of the 8-dim operators, cached per gauge.
struct Block8 {
  std::array<Eigen::Matrix3d, 3> sz;
  std::array<Eigen::Matrix3d, 2> exchange; // p12, p23
  std::array<Eigen::Vector3d, 2> singlet;  // prepared p12, p23

  explicit Block8(Gauge g) {
    const auto idx = mz_block_indices(g);
    auto restrict_op = [&](const Op8 &op) {
      Eigen::Matrix3d m;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          m(r, c) = op(idx[r], idx[c]).real();
      return m;
    };
    auto restrict_ket = [&](const Ket8 &k) {
      Eigen::Vector3d v;
      for (int r = 0; r < 3; ++r)
        v(r) = k(idx[r]).real();
      return v;
    };
    for (int j = 0; j < 3; ++j)
      sz[j] = restrict_op(spin_z(j + 1));
    exchange[0] = restrict_op(exchange8(1, 2));
    exchange[1] = restrict_op(exchange8(2, 3));
    singlet[0] = restrict_ket(singlet_state(DotPair::p12, g));
    singlet[1] = restrict_ket(singlet_state(DotPair::p23, g));
  }

  static const Block8 &get(Gauge g) {
    static const Block8 up(Gauge::up), down(Gauge::down);
    return g == Gauge::up ? up : down;
  }
};

/// Evaluator for one disorder realization over a whole time grid.
inline void evaluate_sample(const ExperimentSpec &spec, const FieldSample &f, Representation rep,
                            std::vector<double> &out) {
  const auto gauges = gauges_of(spec.gauge);
  const double weight = 1.0 / static_cast<double>(gauges.size());
  std::fill(out.begin(), out.end(), 0.0);
  const int pulsed = spec.pulsed == DotPair::p12 ? 0 : 1;
  const int prepared = spec.prepared == DotPair::p12 ? 0 : 1;
  for (Gauge g : gauges) {
    if (rep == Representation::full8) {
      const Block8 &b = Block8::get(g);
      Eigen::Matrix3d h = f.b1 * b.sz[0];
      h += f.b2 * b.sz[1];
      h += f.b3 * b.sz[2];
      h += spec.j * b.exchange[pulsed];
      const ReturnProbability<Eigen::Matrix3d> rp(h, b.singlet[prepared]);
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += weight * rp(spec.times[i]);
    } else {
      const ReturnProbability<Mat3C> rp(su3_hamiltonian(f, spec.pulsed, spec.j, g),
                                        su3_singlet(spec.prepared));
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += weight * rp(spec.times[i]);
    }
  }
}

} // namespace detail

/// Single-realization P0 at time t. `full8` evolves the whole 8x8 Hamiltonian;
/// `su3` evolves the 3x3 manifold Hamiltonian. Both average over the gauges
/// selected by spec.gauge.
inline double p0_single(const ExperimentSpec &spec, const FieldSample &fields, double t,
                        Representation rep) {
  if (spec.prepared == spec.pulsed)
    throw UsageError("p0_single: pulsed pair must differ from the prepared pair");
  const auto gauges = detail::gauges_of(spec.gauge);
  double p = 0.0;
  for (Gauge g : gauges) {
    if (rep == Representation::full8) {
      const Op8 h = build_hamiltonian(fields, spec.pulsed, spec.j);
      const Ket8 psi = singlet_state(spec.prepared, g);
      p += std::norm(psi.dot(propagate(h, t) * psi));
    } else {
      const Mat3C h = detail::su3_hamiltonian(fields, spec.pulsed, spec.j, g);
      const Eigen::Vector3cd psi = detail::su3_singlet(spec.prepared);
      p += std::norm(psi.dot(propagate(h, t) * psi));
    }
  }
  return p / static_cast<double>(gauges.size());
}

struct McOptions {
  Representation rep = Representation::full8;
  unsigned workers = 0;         ///< 0: hardware concurrency
  bool mirror_fields = false;   ///< use -B for every drawn sample
  std::size_t chunk_size = 4096; ///< fixed so results do not depend on `workers`
};

namespace detail {

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

} // namespace detail

/// Disorder-averaged P0 over `n_samples` Gaussian field draws. Sample i is
/// drawn from (seed, i); chunks of `chunk_size` samples are summed
/// independently and reduced in chunk order, so the result is bit-identical
/// for any worker count.
inline Curve p0_mc(const ExperimentSpec &spec, const DotSigmas &sigmas, std::uint64_t n_samples,
                   std::uint64_t seed, const McOptions &opt = {}) {
  spec.validate();
  sigmas.validate();
  if (n_samples < 1)
    throw UsageError("p0_mc: n_samples must be >= 1");
  if (opt.chunk_size < 1)
    throw UsageError("p0_mc: chunk_size must be >= 1");

  const std::size_t nt = spec.times.size();
  const std::uint64_t n_chunks = (n_samples + opt.chunk_size - 1) / opt.chunk_size;
  std::vector<std::vector<double>> sums(n_chunks), sumsq(n_chunks);

  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    std::vector<double> p(nt);
    for (std::uint64_t c = next++; c < n_chunks; c = next++) {
      std::vector<double> s(nt, 0.0), s2(nt, 0.0);
      const std::uint64_t begin = c * opt.chunk_size;
      const std::uint64_t end = std::min<std::uint64_t>(n_samples, begin + opt.chunk_size);
      for (std::uint64_t i = begin; i < end; ++i) {
        FieldSample f = sample(sigmas, seed, i);
        if (opt.mirror_fields)
          f = -f;
        detail::evaluate_sample(spec, f, opt.rep, p);
        for (std::size_t k = 0; k < nt; ++k) {
          s[k] += p[k];
          s2[k] += p[k] * p[k];
        }
      }
      sums[c] = std::move(s);
      sumsq[c] = std::move(s2);
    }
  };

  unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_chunks));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work);
  }

  Curve curve;
  curve.method = opt.rep == Representation::full8 ? Method::mc8 : Method::mc3;
  curve.times = spec.times;
  curve.values.resize(nt);
  curve.stderr_.resize(nt);
  const double n = static_cast<double>(n_samples);
  for (std::size_t k = 0; k < nt; ++k) {
    detail::CompensatedSum s, s2;
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
      s.add(sums[c][k]);
      s2.add(sumsq[c][k]);
    }
    const double mean = s.value() / n;
    curve.values[k] = mean;
    if (n_samples > 1) {
      const double var = std::max(0.0, (s2.value() - n * mean * mean) / (n - 1.0));
      curve.stderr_[k] = std::sqrt(var / n);
    } else {
      curve.stderr_[k] = 0.0;
    }
  }
  curve.meta = {{"j", spec.j},
                {"n_samples", n},
                {"seed", static_cast<double>(seed)},
                {"sigma1", sigmas.s1},
                {"sigma2", sigmas.s2},
                {"sigma3", sigmas.s3}};
  return curve;
}

} // namespace tqd
