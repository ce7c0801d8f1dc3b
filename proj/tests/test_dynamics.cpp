#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "tqd/dynamics.hpp"

using namespace tqd;

namespace {

const DotSigmas ref_sigmas{0.5, 1.0, 1.5};

ExperimentSpec make_spec(double j, std::vector<double> times, DotPair prepared = DotPair::p12,
                         GaugeMode g = GaugeMode::both) {
  ExperimentSpec s;
  s.prepared = prepared;
  s.pulsed = prepared == DotPair::p12 ? DotPair::p23 : DotPair::p12;
  s.j = j;
  s.times = std::move(times);
  s.gauge = g;
  return s;
}

bool bitwise_equal(const std::vector<double> &a, const std::vector<double> &b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST(Propagate, IsUnitaryAndMatchesSeries) {
  const Op8 h = build_hamiltonian(FieldSample{0.4, -0.2, 1.1}, 0.0, 1.5);
  const Op8 u = propagate(h, 0.7);
  EXPECT_LT((u.adjoint() * u - Op8::Identity()).cwiseAbs().maxCoeff(), 1e-13);
  Op8 sum = Op8::Identity(), term = Op8::Identity();
  for (int k = 1; k < 60; ++k) {
    term = term * (h * cd(0.0, -0.7)) / static_cast<double>(k);
    sum += term;
  }
  EXPECT_LT((u - sum).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Propagate, RejectsNonHermitian) {
  Mat3C h = Mat3C::Zero();
  h(0, 1) = 1.0;
  EXPECT_THROW(propagate(h, 1.0), ContractViolation);
}

TEST(ReturnProbability, MatchesPropagator) {
  const Op8 h = build_hamiltonian(FieldSample{0.4, -0.2, 1.1}, 0.3, 1.5);
  const Ket8 psi = singlet_state(DotPair::p12, Gauge::up);
  const ReturnProbability<Op8> rp(h, psi);
  for (double t : {0.0, 0.3, 2.0, 9.0})
    EXPECT_NEAR(rp(t), std::norm(psi.dot(propagate(h, t) * psi)), 1e-12);
}

TEST(P0Single, StartsAtOne) {
  const auto spec = make_spec(2.0, {0.0});
  EXPECT_NEAR(p0_single(spec, FieldSample{0.3, 0.1, -0.5}, 0.0, Representation::full8), 1.0, 1e-14);
  EXPECT_NEAR(p0_single(spec, FieldSample{0.3, 0.1, -0.5}, 0.0, Representation::su3), 1.0, 1e-14);
}

TEST(P0Single, RepresentationsAgree) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    const FieldSample f{n(rng), n(rng), n(rng)};
    const auto spec = make_spec(u(rng), {0.0}, i % 2 ? DotPair::p23 : DotPair::p12,
                                static_cast<GaugeMode>(i % 3));
    const double t = u(rng);
    EXPECT_NEAR(p0_single(spec, f, t, Representation::full8),
                p0_single(spec, f, t, Representation::su3), 1e-9);
  }
}

TEST(P0Single, GaugeMirror) {
  const FieldSample f{0.3, -1.2, 0.8};
  const auto up = make_spec(1.7, {0.0}, DotPair::p12, GaugeMode::up);
  const auto down = make_spec(1.7, {0.0}, DotPair::p12, GaugeMode::down);
  for (double t : {0.5, 1.5, 4.0})
    EXPECT_NEAR(p0_single(up, f, t, Representation::full8),
                p0_single(down, -f, t, Representation::full8), 1e-12);
}

TEST(P0Single, FieldFreeOscillation) {
  // the singlet is an exchange eigenstate only for its own pair; with J on the
  // other pair and no fields, P0 = 1 - 3/4 sin^2(Jt/2)
  const auto spec = make_spec(2.0, {0.0});
  for (double t : {0.0, 0.4, 1.3}) {
    const double s = std::sin(0.5 * 2.0 * t);
    EXPECT_NEAR(p0_single(spec, FieldSample{}, t, Representation::full8), 1.0 - 0.75 * s * s, 1e-12);
  }
}

TEST(P0Single, SamePairIsRejected) {
  auto spec = make_spec(1.0, {0.0});
  spec.pulsed = DotPair::p12;
  EXPECT_THROW(p0_single(spec, FieldSample{}, 1.0, Representation::full8), UsageError);
}

TEST(P0Mc, DeterministicAcrossWorkerCounts) {
  const auto spec = make_spec(3.0, {0.0, 0.5, 1.0, 2.0, 5.0});
  McOptions one, four;
  one.workers = 1;
  one.chunk_size = 100;
  four = one;
  four.workers = 4;
  const Curve a = p0_mc(spec, ref_sigmas, 1234, 99, one), b = p0_mc(spec, ref_sigmas, 1234, 99, four);
  EXPECT_TRUE(bitwise_equal(a.values, b.values));
  EXPECT_TRUE(bitwise_equal(a.stderr_, b.stderr_));
}

TEST(P0Mc, MirroredSingleGaugeRunsCoincideBitwise) {
  const auto up = make_spec(1.2, {0.0, 0.7, 3.0}, DotPair::p12, GaugeMode::up);
  const auto down = make_spec(1.2, {0.0, 0.7, 3.0}, DotPair::p12, GaugeMode::down);
  McOptions mirrored;
  mirrored.mirror_fields = true;
  const Curve a = p0_mc(up, ref_sigmas, 500, 5), b = p0_mc(down, ref_sigmas, 500, 5, mirrored);
  EXPECT_TRUE(bitwise_equal(a.values, b.values));
}

TEST(P0Mc, ZeroExchangeMatchesGaussianDecay) {
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i)
    t.push_back(0.25 * i);
  const auto spec = make_spec(0.0, t);
  const Curve c = p0_mc(spec, ref_sigmas, 20000, 17);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double exact = 0.5 * (1.0 + std::exp(-0.5 * 1.25 * t[i] * t[i]));
    EXPECT_NEAR(c.values[i], exact, 4.0 * c.stderr_[i] + 1e-9) << "t=" << t[i];
  }
}

TEST(P0Mc, RepresentationsAgreeOnAverage) {
  const auto spec = make_spec(2.0, {0.0, 1.0, 3.0});
  McOptions su3;
  su3.rep = Representation::su3;
  const Curve a = p0_mc(spec, ref_sigmas, 300, 8), b = p0_mc(spec, ref_sigmas, 300, 8, su3);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
  EXPECT_EQ(a.method, Method::mc8);
  EXPECT_EQ(b.method, Method::mc3);
}

TEST(P0Mc, RejectsBadInput) {
  auto spec = make_spec(1.0, {1.0, 0.5});
  EXPECT_THROW(p0_mc(spec, ref_sigmas, 10, 1), UsageError);
  spec.times = {0.0};
  EXPECT_THROW(p0_mc(spec, ref_sigmas, 0, 1), UsageError);
  EXPECT_THROW(p0_mc(spec, DotSigmas{-1, 1, 1}, 10, 1), UsageError);
}
