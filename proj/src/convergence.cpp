#include "thinlaw/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thinlaw {

double tv_distance(const Pmf& a, const Pmf& b) {
  double total_a = a.tail, total_b = b.tail;
  for (double v : a.probs) {
    if (v < 0.0) throw std::invalid_argument("tv_distance: negative mass");
    total_a += v;
  }
  for (double v : b.probs) {
    if (v < 0.0) throw std::invalid_argument("tv_distance: negative mass");
    total_b += v;
  }
  if (a.tail < 0.0 || b.tail < 0.0) throw std::invalid_argument("tv_distance: negative mass");
  if (total_a > 1.0 + 1e-9 || total_b > 1.0 + 1e-9)
    throw std::invalid_argument("tv_distance: mass exceeds 1");

  const std::size_t top = std::max(a.probs.size(), b.probs.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < top; ++k) acc += std::abs(a.at(k) - b.at(k));
  return 0.5 * acc + 0.5 * std::abs(a.tail - b.tail);
}

Pmf poisson_pmf(double lambda, std::size_t kmax) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_pmf: lambda must be >= 0");
  Pmf out;
  out.probs.resize(kmax + 1);
  double cum = 0.0;
  if (lambda < 700.0) {
    double pk = std::exp(-lambda);
    for (std::size_t k = 0; k <= kmax; ++k) {
      out.probs[k] = pk;
      cum += pk;
      pk *= lambda / double(k + 1);
    }
  } else {
    for (std::size_t k = 0; k <= kmax; ++k) {
      out.probs[k] =
          std::exp(double(k) * std::log(lambda) - lambda - std::lgamma(double(k) + 1.0));
      cum += out.probs[k];
    }
  }
  out.tail = std::max(1.0 - cum, 0.0);
  return out;
}

Pmf poisson_pmf(double lambda) { return poisson_pmf(lambda, default_kmax(lambda)); }

std::vector<ConvergencePoint> thin_numbers_curve(const IntegerDistribution& dist,
                                                 std::span<const std::uint64_t> n_list,
                                                 CurveMode mode, std::uint64_t n_samples,
                                                 RngStream& rng) {
  if (mode == CurveMode::exact && !dist.finite_support())
    throw std::invalid_argument("thin_numbers_curve: exact mode needs finite support");
  const double mean = dist.mean();
  const std::size_t kmax = default_kmax(mean);
  const Pmf target = poisson_pmf(mean, kmax);

  std::vector<ConvergencePoint> out;
  out.reserve(n_list.size());
  for (std::uint64_t n : n_list) {
    if (n == 0) throw std::invalid_argument("thin_numbers_curve: n must be >= 1");
    ConvergencePoint point;
    point.n = n;
    point.metric = "tv_poisson";
    if (mode == CurveMode::exact) {
      point.value = tv_distance(pmf_thinned_sum_exact(dist, n, kmax), target);
    } else {
      RngStream cell(rng.derive("thin-numbers", n));
      EmpiricalPmf emp;
      for (std::uint64_t i = 0; i < n_samples; ++i)
        emp.add(thinned_sum_sample(dist, n, cell));
      point.value = tv_distance(emp.to_pmf(kmax), target);
      point.std_error = std::sqrt(double(emp.occupied_bins()) / double(n_samples));
    }
    out.push_back(std::move(point));
  }
  return out;
}

std::vector<ConvergencePoint> large_numbers_check(const IntegerDistribution& dist,
                                                  std::span<const std::uint64_t> n_list,
                                                  std::uint64_t n_samples, RngStream& rng) {
  if (n_samples < 2) throw std::invalid_argument("large_numbers_check: need n_samples >= 2");
  const double mu = dist.mean();
  std::vector<ConvergencePoint> out;
  for (std::uint64_t n : n_list) {
    if (n == 0) throw std::invalid_argument("large_numbers_check: n must be >= 1");
    RngStream cell(rng.derive("large-numbers", n));
    std::vector<double> samples(n_samples);
    for (auto& x : samples) x = scaled_sum_sample(dist, n, cell);

    MeanAccumulator acc;
    for (double x : samples) acc.add(x);
    const Estimate mean_est = acc.estimate();
    const double sd = acc.sample_sd();

    out.push_back({n, "mean_error", std::abs(mean_est.value - mu), 0.0, mean_est.std_error});
    out.push_back({n, "sd", sd, std::sqrt(dist.variance() / double(n)),
                   sd / std::sqrt(2.0 * double(n_samples - 1))});
    for (double u : {0.5, 1.0}) {
      const Estimate lap = laplace_empirical(samples, u);
      const double limit = laplace_exact(PointMass{mu}, u);
      out.push_back({n, u == 0.5 ? "laplace_gap_u0.5" : "laplace_gap_u1",
                     std::abs(lap.value - limit), 0.0, lap.std_error});
    }
  }
  return out;
}

std::vector<NamedRegion> standard_regions(const Window& w) {
  Point mid{}, quarter_lo{}, quarter_hi{}, slab_hi = w.upper;
  for (int a = 0; a < w.dim; ++a) {
    mid[a] = w.lower[a] + 0.5 * w.extent(a);
    quarter_lo[a] = w.lower[a] + 0.25 * w.extent(a);
    quarter_hi[a] = w.lower[a] + 0.75 * w.extent(a);
  }
  Point half_hi = w.upper;
  half_hi[0] = mid[0];
  slab_hi[0] = w.lower[0] + 0.125 * w.extent(0);
  return {
      {"R1", Region::full(w)},
      {"R2", Region::box(w, w.lower, half_hi)},
      {"R3", Region::box(w, quarter_lo, quarter_hi)},
      {"R4", Region::box(w, w.lower, mid)},
      {"R5", Region::box(w, w.lower, slab_hi)},
  };
}

ThinProcessesResult thin_processes_curve(const ProcessSpec& spec,
                                         std::span<const std::uint64_t> n_list,
                                         std::span<const NamedTestFunction> dictionary,
                                         std::span<const NamedRegion> regions,
                                         std::uint64_t n_samples, RngStream& rng) {
  if (n_samples < 2) throw std::invalid_argument("thin_processes_curve: need n_samples >= 2");
  const IntensityMeasure mu = intensity_of_spec(spec);

  std::vector<double> fn_targets;
  for (const auto& named : dictionary)
    fn_targets.push_back(apgfl_poisson(mu, named.fn));

  std::vector<double> region_means;
  for (const auto& named : regions) region_means.push_back(measure_of(mu, named.region));

  ThinProcessesResult result;
  for (std::uint64_t n : n_list) {
    if (n == 0) throw std::invalid_argument("thin_processes_curve: n must be >= 1");
    RngStream cell(rng.derive("thin-processes", n));

    std::vector<MeanAccumulator> fn_acc(dictionary.size());
    std::vector<EmpiricalPmf> counts(regions.size());
    for (std::uint64_t i = 0; i < n_samples; ++i) {
      const PointPattern pat = thinned_superposition_sample(spec, n, cell);
      for (std::size_t j = 0; j < dictionary.size(); ++j)
        fn_acc[j].add(apgfl_on_pattern(pat, dictionary[j].fn));
      for (std::size_t j = 0; j < regions.size(); ++j)
        counts[j].add(count_in(pat, regions[j].region));
    }

    std::vector<GapEntry> entries;
    for (std::size_t j = 0; j < dictionary.size(); ++j)
      entries.push_back({dictionary[j].id, fn_acc[j].estimate(), fn_targets[j], 0.0});
    GapReport report = make_gap_report(std::move(entries), n);

    double worst_se = 0.0;
    for (const auto& e : report.entries) {
      result.points.push_back(
          {n, "apgfl_gap_" + e.id, e.gap, 0.0, e.empirical.std_error});
      if (e.gap == report.max_gap) worst_se = e.empirical.std_error;
    }
    result.points.push_back({n, "apgfl_max_gap", report.max_gap, 0.0, worst_se});

    for (std::size_t j = 0; j < regions.size(); ++j) {
      const double lambda_a = region_means[j];
      const std::size_t kmax = default_kmax(lambda_a);
      const double tv = tv_distance(counts[j].to_pmf(kmax), poisson_pmf(lambda_a, kmax));
      result.points.push_back(
          {n, "count_tv_" + regions[j].id, tv, 0.0,
           std::sqrt(double(counts[j].occupied_bins()) / double(n_samples))});

      const double void_hat = double(counts[j].count_at(0)) / double(n_samples);
      const double void_target = std::exp(-lambda_a);
      const double void_se =
          std::sqrt(std::max(void_hat * (1.0 - void_hat), 1e-12) / double(n_samples));
      result.points.push_back(
          {n, "void_gap_" + regions[j].id, std::abs(void_hat - void_target), 0.0, void_se});
    }

    result.gap_reports.push_back(std::move(report));
  }
  return result;
}

double two_sample_count_tv(const PatternSampler& sampler_a, const PatternSampler& sampler_b,
                           const Region& region, std::uint64_t n_samples) {
  if (n_samples < 1000) throw std::invalid_argument("two_sample_count_tv: need N >= 1000");
  EmpiricalPmf a, b;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    a.add(count_in(sampler_a(), region));
    b.add(count_in(sampler_b(), region));
  }
  return tv_distance(a.to_pmf(), b.to_pmf());
}

double tv_noise_bound(std::uint64_t occupied_bins, std::uint64_t n_samples) {
  return 5.0 * std::sqrt(double(occupied_bins) / double(n_samples));
}

}  // namespace thinlaw
