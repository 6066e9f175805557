#pragma once

#include <cmath>
#include <cstdint>

#include "thinlaw/pmf.hpp"

namespace testhelpers {

// Oracle binomial pmf via log-gamma, independent of the library's recurrences.
inline double binom_pmf_oracle(std::uint64_t n, double p, std::uint64_t k) {
  if (k > n) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double logc = std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
                      std::lgamma(double(n - k) + 1.0);
  return std::exp(logc + double(k) * std::log(p) + double(n - k) * std::log1p(-p));
}

inline double poisson_pmf_oracle(double lambda, std::uint64_t k) {
  return std::exp(double(k) * std::log(lambda) - lambda - std::lgamma(double(k) + 1.0));
}

inline double tv_between(const thinlaw::EmpiricalPmf& a, const thinlaw::EmpiricalPmf& b) {
  const std::uint64_t top = std::max(a.max_value(), b.max_value());
  double acc = 0.0;
  for (std::uint64_t k = 0; k <= top; ++k)
    acc += std::abs(double(a.count_at(k)) / double(a.total()) -
                    double(b.count_at(k)) / double(b.total()));
  return 0.5 * acc;
}

// Conservative sampling-noise allowance for a TV statistic between two
// empirical laws with about `bins` occupied bins and `n` samples each.
inline double tv_noise(double bins, double n) { return 5.0 * std::sqrt(bins / n); }

}  // namespace testhelpers
