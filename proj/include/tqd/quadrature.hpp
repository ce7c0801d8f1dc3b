#pragma once

// Expectations E[f(x)] under the standard normal weight for even integrands f.
// Primary rule: Gauss-Hermite with a node-doubling error estimate. Fallback:
// adaptive Gauss-Kronrod on the truncated half line, for integrands that are
// oscillatory or nearly non-smooth (small exchange) where Hermite converges slowly.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tqd/errors.hpp"

namespace tqd {

struct QuadratureSpec {
  int node_count = 200;         ///< Hermite nodes; the check uses 2 * node_count
  double truncation = 8.0;      ///< half-width of the fallback range, in standard deviations
  double target_abs_tol = 1e-8;
  unsigned max_depth = 20;      ///< bisection depth of the adaptive fallback

  void validate() const {
    if (node_count < 32)
      throw UsageError("QuadratureSpec: node_count must be >= 32");
    if (!(truncation >= 6.0))
      throw UsageError("QuadratureSpec: truncation must be >= 6");
    if (!(target_abs_tol > 0.0))
      throw UsageError("QuadratureSpec: target_abs_tol must be > 0");
  }
};

/// Gauss-Hermite rule for the probabilists' weight exp(-x^2/2)/sqrt(2 pi);
/// weights sum to 1.
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the monic
/// Hermite recurrence (off-diagonal sqrt(k)); weights are the squared first
/// eigenvector components. Rules are cached per node count.
inline const HermiteRule &hermite_rule(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const HermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto &slot = cache[n];
  if (!slot) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k)
      sub(k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    auto rule = std::make_unique<HermiteRule>();
    rule->nodes.resize(n);
    rule->weights.resize(n);
    for (int i = 0; i < n; ++i) {
      rule->nodes[i] = es.eigenvalues()(i);
      const double v0 = es.eigenvectors()(0, i);
      rule->weights[i] = v0 * v0;
    }
    slot = std::move(rule);
  }
  return *slot;
}

namespace detail {

template <std::size_t K, typename F>
std::array<double, K> hermite_expectation(const F &f, int n) {
  const HermiteRule &rule = hermite_rule(n);
  std::array<double, K> acc{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const std::array<double, K> v = f(rule.nodes[i]);
    for (std::size_t k = 0; k < K; ++k)
      acc[k] += rule.weights[i] * v[k];
  }
  return acc;
}

} // namespace detail

/// E[f(x)], x ~ N(0,1), for an even, vector-valued integrand f: double -> array<double,K>.
/// Throws NumericError when neither rule reaches q.target_abs_tol.
template <std::size_t K, typename F>
std::array<double, K> gaussian_expectation_even(const F &f, const QuadratureSpec &q,
                                                const char *what = "integral") {
  q.validate();
  const auto coarse = detail::hermite_expectation<K>(f, q.node_count);
  const auto fine = detail::hermite_expectation<K>(f, 2 * q.node_count);
  double hermite_err = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    hermite_err = std::max(hermite_err, std::abs(fine[k] - coarse[k]));
  if (hermite_err <= q.target_abs_tol)
    return fine;

  constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  std::array<double, K> result{};
  double worst = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    auto component = [&](double x) { return 2.0 * inv_sqrt_2pi * std::exp(-0.5 * x * x) * f(x)[k]; };
    double err = 0.0;
    result[k] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        component, 0.0, q.truncation, q.max_depth, q.target_abs_tol * 1e-2, &err);
    worst = std::max(worst, err);
  }
  if (!(worst <= q.target_abs_tol)) {
    std::ostringstream diag;
    diag << what << ": hermite doubling delta " << hermite_err << ", adaptive error estimate "
         << worst << ", tolerance " << q.target_abs_tol;
    throw NumericError(std::string(what) + ": quadrature did not reach tolerance", diag.str());
  }
  return result;
}

} // namespace tqd
