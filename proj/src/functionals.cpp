#include "thinlaw/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thinlaw/pmf.hpp"

namespace thinlaw {

namespace {

bool box_inside_window(const Point& lo, const Point& hi, int dim, const Window& window) {
  if (dim != window.dim) return false;
  for (int a = 0; a < dim; ++a)
    if (lo[a] < window.lower[a] || hi[a] > window.upper[a]) return false;
  return true;
}

}  // namespace

TestFunction TestFunction::scaled_indicator(double c, const Region& region) {
  if (!(c >= 0.0 && c <= 1.0))
    throw std::invalid_argument("test function: scale must be in [0,1]");
  TestFunction u;
  u.kind_ = Kind::scaled_indicator;
  u.scale_ = c;
  u.region_ = region;
  return u;
}

TestFunction TestFunction::grid_function(Grid grid) {
  for (double v : grid.values)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("test function: grid values must be in [0,1]");
  TestFunction u;
  u.kind_ = Kind::grid_function;
  u.grid_ = std::move(grid);
  return u;
}

int TestFunction::dim() const {
  return kind_ == Kind::scaled_indicator ? region_.dim : grid_.window.dim;
}

double TestFunction::scale() const {
  if (kind_ != Kind::scaled_indicator)
    throw std::logic_error("test function: not a scaled indicator");
  return scale_;
}

const Region& TestFunction::region() const {
  if (kind_ != Kind::scaled_indicator)
    throw std::logic_error("test function: not a scaled indicator");
  return region_;
}

const Grid& TestFunction::grid() const {
  if (kind_ != Kind::grid_function) throw std::logic_error("test function: not a grid function");
  return grid_;
}

Point TestFunction::support_lower() const {
  return kind_ == Kind::scaled_indicator ? region_.lower : grid_.window.lower;
}

Point TestFunction::support_upper() const {
  return kind_ == Kind::scaled_indicator ? region_.upper : grid_.window.upper;
}

double eval_test(const TestFunction& u, const Point& x) {
  switch (u.kind()) {
    case TestFunction::Kind::scaled_indicator:
      return u.region().contains(x) ? u.scale() : 0.0;
    case TestFunction::Kind::grid_function:
      return u.grid().window.contains(x) ? u.grid().value_at(x) : 0.0;
  }
  throw std::logic_error("eval_test: bad kind");
}

TestFunction scale_test(const TestFunction& u, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("scale_test: p must be in [0,1]");
  switch (u.kind()) {
    case TestFunction::Kind::scaled_indicator:
      return TestFunction::scaled_indicator(p * u.scale(), u.region());
    case TestFunction::Kind::grid_function: {
      Grid g = u.grid();
      for (double& v : g.values) v *= p;
      return TestFunction::grid_function(std::move(g));
    }
  }
  throw std::logic_error("scale_test: bad kind");
}

double integrate(const TestFunction& u, const IntensityMeasure& mu) {
  if (!box_inside_window(u.support_lower(), u.support_upper(), u.dim(), mu.window()))
    throw std::invalid_argument("integrate: support outside the measure's window");

  if (u.kind() == TestFunction::Kind::scaled_indicator)
    return u.scale() * measure_of(mu, u.region());

  const Grid& g = u.grid();
  switch (mu.kind()) {
    case IntensityMeasure::Kind::constant_density:
      return mu.density() * g.total_mass();
    case IntensityMeasure::Kind::grid_density: {
      const Grid& f = mu.grid();
      double acc = 0.0;
      for (std::size_t cu = 0; cu < g.cell_count(); ++cu) {
        if (g.values[cu] == 0.0) continue;
        auto [ulo, uhi] = g.cell_bounds(cu);
        for (std::size_t cf = 0; cf < f.cell_count(); ++cf) {
          if (f.values[cf] == 0.0) continue;
          auto [flo, fhi] = f.cell_bounds(cf);
          double overlap = 1.0;
          for (int a = 0; a < g.window.dim; ++a)
            overlap *= std::max(0.0, std::min(uhi[a], fhi[a]) - std::max(ulo[a], flo[a]));
          acc += g.values[cu] * f.values[cf] * overlap;
        }
      }
      return acc;
    }
    case IntensityMeasure::Kind::atomic: {
      double acc = 0.0;
      for (const Atom& a : mu.atoms()) acc += a.weight * eval_test(u, a.location);
      return acc;
    }
  }
  throw std::logic_error("integrate: bad measure kind");
}

double apgfl_on_pattern(const PointPattern& pattern, const TestFunction& u) {
  if (pattern.dim != u.dim())
    throw std::invalid_argument("apgfl_on_pattern: dimension mismatch");
  double prod = 1.0;
  for (const Point& x : pattern.points) prod *= 1.0 - eval_test(u, x);
  return prod;
}

Estimate apgfl_empirical(std::span<const PointPattern> samples, const TestFunction& u) {
  if (samples.empty()) throw std::invalid_argument("apgfl_empirical: empty sample set");
  MeanAccumulator acc;
  for (const PointPattern& p : samples) acc.add(apgfl_on_pattern(p, u));
  return acc.estimate();
}

double apgfl_poisson(const IntensityMeasure& mu, const TestFunction& u) {
  return std::exp(-integrate(u, mu));
}

std::optional<double> apgfl_exact(const ProcessSpec& spec, const TestFunction& u) {
  switch (spec.kind()) {
    case ProcessSpec::Kind::fixed_atoms: {
      double prod = 1.0;
      for (const Point& x : spec.points()) prod *= 1.0 - eval_test(u, x);
      return prod;
    }
    case ProcessSpec::Kind::poisson_process:
      return apgfl_poisson(spec.intensity(), u);
    case ProcessSpec::Kind::binomial_process: {
      const double mean_u = integrate(u, IntensityMeasure::grid_density(spec.density()));
      return ipow(1.0 - mean_u, spec.m());
    }
    case ProcessSpec::Kind::neyman_scott:
      return std::nullopt;
  }
  throw std::logic_error("apgfl_exact: bad spec kind");
}

double first_order_residual(const ProcessSpec& spec, const TestFunction& u, double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("first_order_residual: p must be in (0,1]");
  const auto exact = apgfl_exact(spec, scale_test(u, p));
  if (!exact)
    throw std::invalid_argument(
        "first_order_residual: no closed form for this spec; use the sampling overload");
  const double linear = 1.0 - p * integrate(u, intensity_of_spec(spec));
  return *exact - linear;
}

Estimate first_order_residual(const ProcessSpec& spec, const TestFunction& u, double p,
                              std::uint64_t n_samples, RngStream& rng) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("first_order_residual: p must be in (0,1]");
  if (n_samples < 2) throw std::invalid_argument("first_order_residual: need n_samples >= 2");
  const TestFunction pu = scale_test(u, p);
  MeanAccumulator acc;
  for (std::uint64_t i = 0; i < n_samples; ++i)
    acc.add(apgfl_on_pattern(sample_process(spec, rng), pu));
  const double linear = 1.0 - p * integrate(u, intensity_of_spec(spec));
  Estimate est = acc.estimate();
  est.value -= linear;
  return est;
}

GapReport make_gap_report(std::vector<GapEntry> entries, std::uint64_t n) {
  GapReport report;
  report.n = n;
  report.entries = std::move(entries);
  for (auto& e : report.entries) {
    e.gap = std::abs(e.empirical.value - e.target);
    report.max_gap = std::max(report.max_gap, e.gap);
  }
  return report;
}

std::vector<NamedTestFunction> standard_dictionary(const Window& window) {
  std::vector<NamedTestFunction> dict;

  // Nested boxes: the full window, the centered half, and the centered quarter.
  auto centered = [&](double frac) {
    Point lo{}, hi{};
    for (int a = 0; a < window.dim; ++a) {
      const double e = window.extent(a);
      lo[a] = window.lower[a] + (1.0 - frac) / 2.0 * e;
      hi[a] = window.lower[a] + (1.0 + frac) / 2.0 * e;
    }
    return Region::box(window, lo, hi);
  };
  dict.push_back({"ind_c0.3_A1",
                  TestFunction::scaled_indicator(0.3, Region::full(window))});
  dict.push_back({"ind_c0.6_A2", TestFunction::scaled_indicator(0.6, centered(0.5))});
  dict.push_back({"ind_c1.0_A3", TestFunction::scaled_indicator(1.0, centered(0.25))});

  const std::array<int, 3> res{4, window.dim >= 2 ? 4 : 1, window.dim >= 3 ? 4 : 1};
  dict.push_back({"grid_const", TestFunction::grid_function(Grid::constant(window, res, 0.5))});

  Grid ramp = Grid::constant(window, res, 0.0);
  for (std::size_t idx = 0; idx < ramp.cell_count(); ++idx) {
    const std::size_t i0 = idx % std::size_t(res[0]);
    ramp.values[idx] = (double(i0) + 0.5) / double(res[0]);
  }
  dict.push_back({"grid_ramp", TestFunction::grid_function(std::move(ramp))});

  Grid checker = Grid::constant(window, res, 0.0);
  for (std::size_t idx = 0; idx < checker.cell_count(); ++idx) {
    std::size_t rest = idx;
    std::size_t parity = 0;
    for (int a = 0; a < 3; ++a) {
      parity += rest % std::size_t(res[a]);
      rest /= std::size_t(res[a]);
    }
    checker.values[idx] = parity % 2 == 0 ? 0.8 : 0.0;
  }
  dict.push_back({"grid_checker", TestFunction::grid_function(std::move(checker))});

  return dict;
}

}  // namespace thinlaw
