#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "thinlaw/estimate.hpp"
#include "thinlaw/pmf.hpp"
#include "thinlaw/rng.hpp"

namespace thinlaw {

/// A non-negative-integer law from a small closed-form catalog, or an
/// explicit finite pmf. Immutable once constructed; safe to share across
/// threads. All sampling goes through an explicit RngStream.
class IntegerDistribution {
 public:
  enum class Kind { deterministic, bernoulli, poisson, binomial, finite_pmf };

  static IntegerDistribution deterministic(std::uint64_t k);
  static IntegerDistribution bernoulli(double q);
  static IntegerDistribution poisson(double lambda);
  static IntegerDistribution binomial(std::uint64_t m, double p);
  /// weights[k] = P(X = k). Must sum to 1 within 1e-12; rejected otherwise,
  /// never renormalized.
  static IntegerDistribution finite_pmf(std::vector<double> weights);

  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  bool finite_support() const noexcept { return kind_ != Kind::poisson; }

  /// Exact pmf as a dense vector over {0..max support}. Finite support only.
  std::vector<double> pmf() const;

  std::uint64_t sample(RngStream& rng) const;

  /// Short label for CSV metric names, e.g. "bernoulli_0.7".
  std::string name() const;

  // Catalog parameters; each is meaningful only for its own kind.
  std::uint64_t k() const noexcept { return k_; }
  double q() const noexcept { return q_; }
  double lambda() const noexcept { return lambda_; }
  std::uint64_t m() const noexcept { return m_; }
  double p() const noexcept { return p_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  IntegerDistribution() = default;

  Kind kind_ = Kind::deterministic;
  std::uint64_t k_ = 0;
  std::uint64_t m_ = 0;
  double q_ = 0.0;
  double lambda_ = 0.0;
  double p_ = 0.0;
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // finite_pmf inversion sampling
  double mean_ = 0.0;
  double variance_ = 0.0;
};

/// Binomial thinning of a count: keep each of x items independently with
/// probability p. Returns a Binomial(x, p) draw, sampled as x Bernoulli
/// trials so the semantics stay item-by-item exact.
std::uint64_t thin_count(std::uint64_t x, double p, RngStream& rng);

/// One draw of the thinned sum: sum n IID copies, then thin by 1/n.
std::uint64_t thinned_sum_sample(const IntegerDistribution& dist, std::uint64_t n,
                                 RngStream& rng);

/// One draw of the scaled sum: arithmetic mean of n IID copies.
double scaled_sum_sample(const IntegerDistribution& dist, std::uint64_t n, RngStream& rng);

/// Alternate probability generating function A_X(u) = E (1-u)^X, evaluated
/// in closed form. Domain u in [0, 2]; values outside are rejected.
double apgf_exact(const IntegerDistribution& dist, double u);

/// Monte Carlo A_X(u) from integer samples: mean of (1-u)^x with CLT stderr.
Estimate apgf_empirical(std::span<const std::uint64_t> samples, double u);

/// Degenerate real-valued law concentrated at one location; the limit law
/// of the scaled sum.
struct PointMass {
  double location = 0.0;
};

/// Laplace transform L_X(u) = E e^{-uX} in closed form, u >= 0.
double laplace_exact(const IntegerDistribution& dist, double u);
double laplace_exact(PointMass target, double u);

/// Monte Carlo L_X(u) from real samples: mean of e^{-ux} with CLT stderr.
Estimate laplace_empirical(std::span<const double> samples, double u);

/// Factorial moment E X(X-1)...(X-j+1), exact, for j in {1, 2}.
double factorial_moment(const IntegerDistribution& dist, unsigned order);

/// Convolution of two dense pmf vectors (law of an independent sum),
/// accumulated in a fixed order.
std::vector<double> convolve_pmf(std::span<const double> a, std::span<const double> b);

/// Exact law of the thinned sum Y_n = (1/n) o (X_1 + ... + X_n) for a
/// finite-support distribution: n-fold convolution, then the binomial
/// thinning mixture. Mass beyond kmax is reported in the tail.
Pmf pmf_thinned_sum_exact(const IntegerDistribution& dist, std::uint64_t n, std::size_t kmax);

/// Same, with kmax from the default truncation policy at the law's mean.
Pmf pmf_thinned_sum_exact(const IntegerDistribution& dist, std::uint64_t n);

}  // namespace thinlaw
