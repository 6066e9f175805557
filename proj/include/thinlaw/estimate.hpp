#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace thinlaw {

/// Monte Carlo estimate of an expectation: sample mean, CLT standard error,
/// and the sample count it came from.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(n_samples)
  std::size_t n_samples = 0;
};

/// One-pass Welford accumulator. Additions happen in caller order, so a
/// fixed sampling order gives reproducible estimates.
class MeanAccumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d1 = x - mean_;
    mean_ += d1 / static_cast<double>(n_);
    m2_ += d1 * (x - mean_);
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }

  double sample_variance() const {
    if (n_ < 2) throw std::invalid_argument("MeanAccumulator: need at least 2 samples");
    return std::max(m2_, 0.0) / static_cast<double>(n_ - 1);
  }

  double sample_sd() const { return std::sqrt(sample_variance()); }

  Estimate estimate() const {
    return Estimate{mean(), sample_sd() / std::sqrt(static_cast<double>(n_)), n_};
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace thinlaw
