#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thinlaw/distributions.hpp"
#include "thinlaw/functionals.hpp"
#include "thinlaw/pmf.hpp"
#include "thinlaw/point_process.hpp"
#include "thinlaw/rng.hpp"

namespace thinlaw {

struct ConvergencePoint {
  std::uint64_t n = 1;
  std::string metric;
  double value = 0.0;
  double target = 0.0;
  std::optional<double> std_error;
};

enum class CurveMode { exact, mc };

// 1/2 sum |a(k) - b(k)| + 1/2 |tail_a - tail_b|, missing keys read as 0.
double tv_distance(const Pmf& a, const Pmf& b);

Pmf poisson_pmf(double lambda, std::size_t kmax);
Pmf poisson_pmf(double lambda);

// TV between the law of the thinned sum and the Poisson law with the same mean,
// per n. Exact mode needs finite support; mc mode attaches a noise-scale stderr.
std::vector<ConvergencePoint> thin_numbers_curve(const IntegerDistribution& dist,
                                                 std::span<const std::uint64_t> n_list,
                                                 CurveMode mode, std::uint64_t n_samples,
                                                 RngStream& rng);

// Mean error, standard deviation, and Laplace-transform gaps of the scaled sum.
std::vector<ConvergencePoint> large_numbers_check(const IntegerDistribution& dist,
                                                  std::span<const std::uint64_t> n_list,
                                                  std::uint64_t n_samples, RngStream& rng);

struct NamedRegion {
  std::string id;
  Region region;
};

// Five fixed regions: full window, left half, centered half, corner quarter,
// and a thin slab along the first axis.
std::vector<NamedRegion> standard_regions(const Window& window);

struct ThinProcessesResult {
  std::vector<ConvergencePoint> points;
  std::vector<GapReport> gap_reports;
};

// Per n: functional gaps against the Poisson target over the dictionary, plus
// count TV and void-probability gaps per region.
ThinProcessesResult thin_processes_curve(const ProcessSpec& spec,
                                         std::span<const std::uint64_t> n_list,
                                         std::span<const NamedTestFunction> dictionary,
                                         std::span<const NamedRegion> regions,
                                         std::uint64_t n_samples, RngStream& rng);

using PatternSampler = std::function<PointPattern()>;

double two_sample_count_tv(const PatternSampler& sampler_a, const PatternSampler& sampler_b,
                           const Region& region, std::uint64_t n_samples);

// Conservative noise allowance for a TV statistic between empirical pmfs.
double tv_noise_bound(std::uint64_t occupied_bins, std::uint64_t n_samples);

}  // namespace thinlaw
