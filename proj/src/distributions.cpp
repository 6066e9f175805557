#include "thinlaw/distributions.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "thinlaw/format.hpp"

namespace thinlaw {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) + ": probability must be in [0,1]");
}

}  // namespace

IntegerDistribution IntegerDistribution::deterministic(std::uint64_t k) {
  IntegerDistribution d;
  d.kind_ = Kind::deterministic;
  d.k_ = k;
  d.mean_ = static_cast<double>(k);
  d.variance_ = 0.0;
  return d;
}

IntegerDistribution IntegerDistribution::bernoulli(double q) {
  require_probability(q, "IntegerDistribution::bernoulli");
  IntegerDistribution d;
  d.kind_ = Kind::bernoulli;
  d.q_ = q;
  d.mean_ = q;
  d.variance_ = q * (1.0 - q);
  return d;
}

IntegerDistribution IntegerDistribution::poisson(double lambda) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("IntegerDistribution::poisson: lambda must be >= 0");
  IntegerDistribution d;
  d.kind_ = Kind::poisson;
  d.lambda_ = lambda;
  d.mean_ = lambda;
  d.variance_ = lambda;
  return d;
}

IntegerDistribution IntegerDistribution::binomial(std::uint64_t m, double p) {
  require_probability(p, "IntegerDistribution::binomial");
  IntegerDistribution d;
  d.kind_ = Kind::binomial;
  d.m_ = m;
  d.p_ = p;
  d.mean_ = static_cast<double>(m) * p;
  d.variance_ = static_cast<double>(m) * p * (1.0 - p);
  return d;
}

IntegerDistribution IntegerDistribution::finite_pmf(std::vector<double> weights) {
  if (weights.empty())
    throw std::invalid_argument("IntegerDistribution::finite_pmf: empty weight vector");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0))
      throw std::invalid_argument("IntegerDistribution::finite_pmf: weight outside [0,1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument(
        "IntegerDistribution::finite_pmf: weights must sum to 1 within 1e-12");
  IntegerDistribution d;
  d.kind_ = Kind::finite_pmf;
  d.weights_ = std::move(weights);
  d.cumulative_.resize(d.weights_.size());
  double cum = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < d.weights_.size(); ++k) {
    cum += d.weights_[k];
    d.cumulative_[k] = cum;
    mean += static_cast<double>(k) * d.weights_[k];
    m2 += static_cast<double>(k) * static_cast<double>(k) * d.weights_[k];
  }
  d.cumulative_.back() = 1.0;
  d.mean_ = mean;
  d.variance_ = std::max(m2 - mean * mean, 0.0);
  return d;
}

std::vector<double> IntegerDistribution::pmf() const {
  switch (kind_) {
    case Kind::deterministic: {
      std::vector<double> out(k_ + 1, 0.0);
      out[k_] = 1.0;
      return out;
    }
    case Kind::bernoulli:
      return {1.0 - q_, q_};
    case Kind::binomial: {
      if (p_ == 1.0) {
        std::vector<double> out(m_ + 1, 0.0);
        out[m_] = 1.0;
        return out;
      }
      std::vector<double> out(m_ + 1);
      out[0] = ipow(1.0 - p_, m_);
      const double ratio = p_ / (1.0 - p_);
      for (std::uint64_t j = 0; j < m_; ++j)
        out[j + 1] = out[j] * ratio * static_cast<double>(m_ - j) / static_cast<double>(j + 1);
      return out;
    }
    case Kind::finite_pmf:
      return weights_;
    case Kind::poisson:
      break;
  }
  throw std::invalid_argument("IntegerDistribution::pmf: infinite support");
}

std::uint64_t IntegerDistribution::sample(RngStream& rng) const {
  switch (kind_) {
    case Kind::deterministic:
      return k_;
    case Kind::bernoulli:
      return rng.bernoulli(q_) ? 1 : 0;
    case Kind::poisson:
      return rng.poisson(lambda_);
    case Kind::binomial: {
      std::uint64_t total = 0;
      for (std::uint64_t j = 0; j < m_; ++j)
        if (rng.bernoulli(p_)) ++total;
      return total;
    }
    case Kind::finite_pmf: {
      const double u = rng.uniform01();
      for (std::size_t k = 0; k < cumulative_.size(); ++k)
        if (u < cumulative_[k]) return k;
      return cumulative_.size() - 1;
    }
  }
  throw std::logic_error("IntegerDistribution::sample: bad kind");
}

std::string IntegerDistribution::name() const {
  switch (kind_) {
    case Kind::deterministic:
      return "deterministic_" + format_u64(k_);
    case Kind::bernoulli:
      return "bernoulli_" + format_double(q_);
    case Kind::poisson:
      return "poisson_" + format_double(lambda_);
    case Kind::binomial:
      return "binomial_" + format_u64(m_) + "_" + format_double(p_);
    case Kind::finite_pmf:
      return "finitepmf_" + format_u64(weights_.size());
  }
  return "unknown";
}

std::uint64_t thin_count(std::uint64_t x, double p, RngStream& rng) {
  require_probability(p, "thin_count");
  std::uint64_t kept = 0;
  for (std::uint64_t i = 0; i < x; ++i)
    if (rng.bernoulli(p)) ++kept;
  return kept;
}

std::uint64_t thinned_sum_sample(const IntegerDistribution& dist, std::uint64_t n,
                                 RngStream& rng) {
  if (n == 0) throw std::invalid_argument("thinned_sum_sample: n must be >= 1");
  std::uint64_t sum = 0;
  for (std::uint64_t i = 0; i < n; ++i) sum += dist.sample(rng);
  return thin_count(sum, 1.0 / static_cast<double>(n), rng);
}

double scaled_sum_sample(const IntegerDistribution& dist, std::uint64_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("scaled_sum_sample: n must be >= 1");
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) sum += static_cast<double>(dist.sample(rng));
  return sum / static_cast<double>(n);
}

double apgf_exact(const IntegerDistribution& dist, double u) {
  if (!(u >= 0.0 && u <= 2.0)) throw std::domain_error("apgf_exact: u must be in [0,2]");
  switch (dist.kind()) {
    case IntegerDistribution::Kind::deterministic:
      return ipow(1.0 - u, dist.k());
    case IntegerDistribution::Kind::bernoulli:
      return 1.0 - dist.q() * u;
    case IntegerDistribution::Kind::poisson:
      return std::exp(-dist.lambda() * u);
    case IntegerDistribution::Kind::binomial:
      return ipow(1.0 - dist.p() * u, dist.m());
    case IntegerDistribution::Kind::finite_pmf: {
      double acc = 0.0;
      const auto& w = dist.weights();
      for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * ipow(1.0 - u, k);
      return acc;
    }
  }
  throw std::logic_error("apgf_exact: bad kind");
}

Estimate apgf_empirical(std::span<const std::uint64_t> samples, double u) {
  if (samples.empty()) throw std::invalid_argument("apgf_empirical: empty sample set");
  if (!(u >= 0.0 && u <= 2.0)) throw std::domain_error("apgf_empirical: u must be in [0,2]");
  MeanAccumulator acc;
  for (std::uint64_t x : samples) acc.add(ipow(1.0 - u, x));
  return acc.estimate();
}

double laplace_exact(const IntegerDistribution& dist, double u) {
  if (!(u >= 0.0)) throw std::domain_error("laplace_exact: u must be >= 0");
  const double t = std::exp(-u);
  switch (dist.kind()) {
    case IntegerDistribution::Kind::deterministic:
      return ipow(t, dist.k());
    case IntegerDistribution::Kind::bernoulli:
      return 1.0 - dist.q() + dist.q() * t;
    case IntegerDistribution::Kind::poisson:
      return std::exp(dist.lambda() * (t - 1.0));
    case IntegerDistribution::Kind::binomial:
      return ipow(1.0 - dist.p() + dist.p() * t, dist.m());
    case IntegerDistribution::Kind::finite_pmf: {
      double acc = 0.0;
      const auto& w = dist.weights();
      for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * ipow(t, k);
      return acc;
    }
  }
  throw std::logic_error("laplace_exact: bad kind");
}

double laplace_exact(PointMass target, double u) {
  if (!(u >= 0.0)) throw std::domain_error("laplace_exact: u must be >= 0");
  return std::exp(-target.location * u);
}

Estimate laplace_empirical(std::span<const double> samples, double u) {
  if (samples.empty()) throw std::invalid_argument("laplace_empirical: empty sample set");
  if (!(u >= 0.0)) throw std::domain_error("laplace_empirical: u must be >= 0");
  MeanAccumulator acc;
  for (double x : samples) acc.add(std::exp(-u * x));
  return acc.estimate();
}

double factorial_moment(const IntegerDistribution& dist, unsigned order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("factorial_moment: only orders 1 and 2 are supported");
  if (order == 1) return dist.mean();
  switch (dist.kind()) {
    case IntegerDistribution::Kind::deterministic:
      return static_cast<double>(dist.k()) * (static_cast<double>(dist.k()) - 1.0);
    case IntegerDistribution::Kind::bernoulli:
      return 0.0;
    case IntegerDistribution::Kind::poisson:
      return dist.lambda() * dist.lambda();
    case IntegerDistribution::Kind::binomial:
      return static_cast<double>(dist.m()) * (static_cast<double>(dist.m()) - 1.0) * dist.p() *
             dist.p();
    case IntegerDistribution::Kind::finite_pmf: {
      double acc = 0.0;
      const auto& w = dist.weights();
      for (std::size_t k = 2; k < w.size(); ++k)
        acc += static_cast<double>(k) * (static_cast<double>(k) - 1.0) * w[k];
      return acc;
    }
  }
  throw std::logic_error("factorial_moment: bad kind");
}

std::vector<double> convolve_pmf(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("convolve_pmf: empty operand");
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Pmf pmf_thinned_sum_exact(const IntegerDistribution& dist, std::uint64_t n, std::size_t kmax) {
  if (n == 0) throw std::invalid_argument("pmf_thinned_sum_exact: n must be >= 1");
  if (!dist.finite_support())
    throw std::invalid_argument("pmf_thinned_sum_exact: unsupported for infinite-support laws");

  const std::vector<double> base = dist.pmf();
  std::vector<double> conv = base;
  for (std::uint64_t i = 1; i < n; ++i) conv = convolve_pmf(conv, base);

  Pmf out;
  out.probs.assign(kmax + 1, 0.0);

  if (n == 1) {
    // p = 1 thinning is the identity
    for (std::size_t s = 0; s < conv.size(); ++s) {
      if (s <= kmax)
        out.probs[s] = conv[s];
      else
        out.tail += conv[s];
    }
    return out;
  }

  const double p = 1.0 / static_cast<double>(n);
  const double ratio = p / (1.0 - p);
  for (std::size_t s = 0; s < conv.size(); ++s) {
    const double ps = conv[s];
    if (ps == 0.0) continue;
    // Binomial(s, p) row via the pmf recurrence, accumulated up to kmax.
    double b = ipow(1.0 - p, s);
    double row_sum = 0.0;
    const std::size_t top = std::min<std::size_t>(s, kmax);
    for (std::size_t k = 0; k <= top; ++k) {
      out.probs[k] += ps * b;
      row_sum += b;
      b *= ratio * static_cast<double>(s - k) / static_cast<double>(k + 1);
    }
    if (s > kmax) out.tail += ps * std::max(1.0 - row_sum, 0.0);
  }
  return out;
}

Pmf pmf_thinned_sum_exact(const IntegerDistribution& dist, std::uint64_t n) {
  return pmf_thinned_sum_exact(dist, n, default_kmax(dist.mean()));
}

}  // namespace thinlaw
