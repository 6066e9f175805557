#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thinlaw/rng.hpp"

namespace thinlaw {

// Coordinates are fixed-width arrays; axes at or beyond the ambient dim stay zero.
using Point = std::array<double, 3>;

Point make_point(double x);
Point make_point(double x, double y);
Point make_point(double x, double y, double z);

struct Window {
  int dim = 1;
  Point lower{};
  Point upper{};

  static Window box(int dim, Point lower, Point upper);
  static Window unit(int dim);

  double extent(int axis) const { return upper[axis] - lower[axis]; }
  double volume() const;
  bool contains(const Point& x) const;
  Window dilated(double r) const;
};

struct PointPattern {
  int dim = 1;
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Axis-aligned box clipped to a window at construction; [lower, upper) on every axis.
struct Region {
  int dim = 1;
  Point lower{};
  Point upper{};

  static Region box(const Window& window, Point lower, Point upper);
  static Region full(const Window& window);

  double volume() const;
  bool contains(const Point& x) const;
};

// Piecewise-constant cell values on a regular subdivision of the window.
// Cell (i0,i1,i2) lives at index i0 + res[0]*(i1 + res[1]*i2).
struct Grid {
  Window window;
  std::array<int, 3> resolution{1, 1, 1};
  std::vector<double> values;

  static Grid make(const Window& window, std::array<int, 3> resolution,
                   std::vector<double> values);
  static Grid constant(const Window& window, std::array<int, 3> resolution, double value);

  std::size_t cell_count() const;
  double cell_volume() const;
  double cell_edge(int axis) const { return window.extent(axis) / resolution[axis]; }
  double value_at(const Point& x) const;
  std::pair<Point, Point> cell_bounds(std::size_t idx) const;
  double total_mass() const;
};

struct Atom {
  Point location{};
  double weight = 0.0;
};

class IntensityMeasure {
 public:
  enum class Kind { constant_density, grid_density, atomic };

  static IntensityMeasure constant_density(double lambda, const Window& window);
  static IntensityMeasure grid_density(Grid grid);
  static IntensityMeasure atomic(std::vector<Atom> atoms, const Window& window);

  Kind kind() const { return kind_; }
  const Window& window() const { return window_; }
  double total_mass() const { return total_mass_; }

  double density() const;
  const Grid& grid() const;
  const std::vector<Atom>& atoms() const;

 private:
  IntensityMeasure() = default;

  Kind kind_ = Kind::constant_density;
  Window window_;
  double lambda_ = 0.0;
  Grid grid_;
  std::vector<Atom> atoms_;
  double total_mass_ = 0.0;
};

class ProcessSpec {
 public:
  enum class Kind { poisson_process, fixed_atoms, binomial_process, neyman_scott };

  static ProcessSpec poisson_process(IntensityMeasure intensity);
  static ProcessSpec fixed_atoms(std::vector<Point> points, const Window& window);
  static ProcessSpec binomial_process(std::uint64_t m, Grid density);
  static ProcessSpec neyman_scott(double kappa, double mean_children, double radius,
                                  const Window& window);

  Kind kind() const { return kind_; }
  const Window& window() const { return window_; }
  std::string name() const;

  const IntensityMeasure& intensity() const;
  const std::vector<Point>& points() const;
  std::uint64_t m() const;
  const Grid& density() const;
  double kappa() const;
  double mean_children() const;
  double radius() const;

 private:
  ProcessSpec() = default;

  Kind kind_ = Kind::poisson_process;
  Window window_;
  IntensityMeasure intensity_ = IntensityMeasure::constant_density(0.0, Window::unit(1));
  std::vector<Point> points_;
  std::uint64_t m_ = 0;
  Grid density_;
  double kappa_ = 0.0;
  double mean_children_ = 0.0;
  double radius_ = 0.0;
};

PointPattern sample_process(const ProcessSpec& spec, RngStream& rng);

PointPattern thin_pattern(const PointPattern& pattern, double p, RngStream& rng);

PointPattern superpose(const PointPattern& a, const PointPattern& b);
PointPattern superpose(std::span<const PointPattern> patterns);

// Samples n IID patterns, superposes, then thins with p = 1/n, in that order.
PointPattern thinned_superposition_sample(const ProcessSpec& spec, std::uint64_t n,
                                          RngStream& rng);

std::uint64_t count_in(const PointPattern& pattern, const Region& region);

double measure_of(const IntensityMeasure& mu, const Region& region);

IntensityMeasure intensity_of_spec(const ProcessSpec& spec);

struct PatternFile {
  PointPattern pattern;
  Window window;
};

void write_pattern(std::ostream& out, const PointPattern& pattern, const Window& window);
PatternFile read_pattern(std::istream& in);

}  // namespace thinlaw
