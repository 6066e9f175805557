#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thinlaw/estimate.hpp"
#include "thinlaw/point_process.hpp"
#include "thinlaw/rng.hpp"

namespace thinlaw {

// A function from the window into [0,1], zero outside its support box.
class TestFunction {
 public:
  enum class Kind { scaled_indicator, grid_function };

  static TestFunction scaled_indicator(double c, const Region& region);
  static TestFunction grid_function(Grid grid);

  Kind kind() const { return kind_; }
  int dim() const;
  double scale() const;
  const Region& region() const;
  const Grid& grid() const;

  Point support_lower() const;
  Point support_upper() const;

 private:
  TestFunction() = default;

  Kind kind_ = Kind::scaled_indicator;
  double scale_ = 0.0;
  Region region_;
  Grid grid_;
};

double eval_test(const TestFunction& u, const Point& x);

// Pointwise p*u; stays a valid test function for p in [0,1].
TestFunction scale_test(const TestFunction& u, double p);

// Exact integral of u against mu; both sides are piecewise constant or atomic.
double integrate(const TestFunction& u, const IntensityMeasure& mu);

// Product of (1 - u(x)) over the pattern's points; empty pattern gives 1.
double apgfl_on_pattern(const PointPattern& pattern, const TestFunction& u);

Estimate apgfl_empirical(std::span<const PointPattern> samples, const TestFunction& u);

double apgfl_poisson(const IntensityMeasure& mu, const TestFunction& u);

// Closed-form functional where the catalog admits one; absent for Neyman-Scott.
std::optional<double> apgfl_exact(const ProcessSpec& spec, const TestFunction& u);

// A(pu) - (1 - p * integral of u against the spec's intensity).
double first_order_residual(const ProcessSpec& spec, const TestFunction& u, double p);
Estimate first_order_residual(const ProcessSpec& spec, const TestFunction& u, double p,
                              std::uint64_t n_samples, RngStream& rng);

struct GapEntry {
  std::string id;
  Estimate empirical;
  double target = 0.0;
  double gap = 0.0;
};

struct GapReport {
  std::vector<GapEntry> entries;
  double max_gap = 0.0;
  std::uint64_t n = 0;
};

GapReport make_gap_report(std::vector<GapEntry> entries, std::uint64_t n);

struct NamedTestFunction {
  std::string id;
  TestFunction fn;
};

// Fixed six-function dictionary on the window: three nested scaled indicators
// plus constant, ramp, and checkerboard grid functions.
std::vector<NamedTestFunction> standard_dictionary(const Window& window);

}  // namespace thinlaw
