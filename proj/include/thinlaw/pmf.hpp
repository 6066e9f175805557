#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace thinlaw {

/// Integer power by repeated multiplication in a fixed order. Used for the
/// exact transform closed forms so results do not depend on libm pow.
constexpr double ipow(double base, std::uint64_t e) noexcept {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

/// Probability mass function on {0, 1, ..., probs.size()-1}, with any mass
/// beyond the last stored index carried explicitly in `tail`.
struct Pmf {
  std::vector<double> probs;
  double tail = 0.0;

  double at(std::size_t k) const noexcept { return k < probs.size() ? probs[k] : 0.0; }

  double total() const noexcept {
    double s = tail;
    for (double p : probs) s += p;
    return s;
  }
};

/// Observed counts per non-negative integer value.
class EmpiricalPmf {
 public:
  void add(std::uint64_t value) {
    if (value >= counts_.size()) counts_.resize(value + 1, 0);
    ++counts_[value];
    ++total_;
  }

  std::uint64_t total() const noexcept { return total_; }

  std::uint64_t count_at(std::size_t k) const noexcept {
    return k < counts_.size() ? counts_[k] : 0;
  }

  std::size_t occupied_bins() const noexcept {
    std::size_t n = 0;
    for (auto c : counts_)
      if (c > 0) ++n;
    return n;
  }

  std::size_t max_value() const noexcept { return counts_.empty() ? 0 : counts_.size() - 1; }

  /// Full empirical pmf; tail is zero because every observation is stored.
  Pmf to_pmf() const {
    Pmf out;
    out.probs.reserve(counts_.size());
    const double n = static_cast<double>(total_);
    for (auto c : counts_) out.probs.push_back(static_cast<double>(c) / n);
    return out;
  }

  /// Truncated at kmax; observations beyond kmax become tail mass.
  Pmf to_pmf(std::size_t kmax) const {
    Pmf out;
    out.probs.assign(kmax + 1, 0.0);
    const double n = static_cast<double>(total_);
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (k <= kmax)
        out.probs[k] = static_cast<double>(counts_[k]) / n;
      else
        out.tail += static_cast<double>(counts_[k]) / n;
    }
    return out;
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Default truncation point for exact pmf oracles: the smallest k whose
/// upper tail under a Poisson(mean + 3*sqrt(mean)) envelope is below 1e-12.
/// Deterministic in the mean, independent of any seed.
inline std::size_t default_kmax(double mean) {
  const double env = mean + 3.0 * std::sqrt(std::max(mean, 0.0));
  if (env <= 0.0) return 0;
  if (env > 700.0) {
    // exp(-env) would underflow; a 10-sigma cap is far beyond the 1e-12 tail
    return static_cast<std::size_t>(std::ceil(env + 10.0 * std::sqrt(env) + 10.0));
  }
  double p = std::exp(-env);
  double cum = p;
  std::size_t k = 0;
  while (1.0 - cum >= 1e-12) {
    ++k;
    p *= env / static_cast<double>(k);
    cum += p;
  }
  return k;
}

}  // namespace thinlaw
