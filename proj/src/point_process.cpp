#include "thinlaw/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "thinlaw/format.hpp"

namespace thinlaw {

namespace {

void require_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("window dim must be 1, 2, or 3");
}

bool region_inside_window(const Region& region, const Window& window) {
  if (region.dim != window.dim) return false;
  for (int a = 0; a < region.dim; ++a)
    if (region.lower[a] < window.lower[a] || region.upper[a] > window.upper[a]) return false;
  return true;
}

std::string join_coords(const Point& x, int dim) {
  std::string out = format_double(x[0]);
  for (int a = 1; a < dim; ++a) {
    out += ',';
    out += format_double(x[a]);
  }
  return out;
}

std::vector<double> split_coords(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string piece =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      throw std::runtime_error("pattern file: bad coordinate '" + piece + "'");
    }
    if (used != piece.size())
      throw std::runtime_error("pattern file: bad coordinate '" + piece + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Point to_point(const std::vector<double>& coords) {
  Point x{};
  for (std::size_t a = 0; a < coords.size(); ++a) x[a] = coords[a];
  return x;
}

// Uniform point inside the grid cell with the given flat index.
Point uniform_in_cell(const Grid& grid, std::size_t idx, RngStream& rng) {
  auto [lo, hi] = grid.cell_bounds(idx);
  Point x{};
  for (int a = 0; a < grid.window.dim; ++a) x[a] = rng.uniform(lo[a], hi[a]);
  return x;
}

// Flat cell index sampled proportionally to cumulative cell masses.
std::size_t pick_cell(const std::vector<double>& cumulative, RngStream& rng) {
  const double u = rng.uniform01() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const std::size_t idx = std::size_t(it - cumulative.begin());
  return std::min(idx, cumulative.size() - 1);
}

std::vector<double> cell_mass_cumulative(const Grid& grid) {
  std::vector<double> cum(grid.cell_count());
  const double vol = grid.cell_volume();
  double acc = 0.0;
  for (std::size_t i = 0; i < cum.size(); ++i) {
    acc += grid.values[i] * vol;
    cum[i] = acc;
  }
  return cum;
}

}  // namespace

Point make_point(double x) { return Point{x, 0.0, 0.0}; }
Point make_point(double x, double y) { return Point{x, y, 0.0}; }
Point make_point(double x, double y, double z) { return Point{x, y, z}; }

Window Window::box(int dim, Point lower, Point upper) {
  require_dim(dim);
  for (int a = 0; a < dim; ++a)
    if (!(lower[a] < upper[a]))
      throw std::invalid_argument("window: lower must be strictly below upper on every axis");
  Window w;
  w.dim = dim;
  w.lower = lower;
  w.upper = upper;
  for (int a = dim; a < 3; ++a) {
    w.lower[a] = 0.0;
    w.upper[a] = 0.0;
  }
  return w;
}

Window Window::unit(int dim) {
  Point lo{}, hi{};
  for (int a = 0; a < dim; ++a) hi[a] = 1.0;
  return box(dim, lo, hi);
}

double Window::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= extent(a);
  return v;
}

bool Window::contains(const Point& x) const {
  for (int a = 0; a < dim; ++a)
    if (x[a] < lower[a] || x[a] >= upper[a]) return false;
  return true;
}

Window Window::dilated(double r) const {
  Window w = *this;
  for (int a = 0; a < dim; ++a) {
    w.lower[a] -= r;
    w.upper[a] += r;
  }
  return w;
}

Region Region::box(const Window& window, Point lower, Point upper) {
  Region r;
  r.dim = window.dim;
  for (int a = 0; a < window.dim; ++a) {
    r.lower[a] = std::max(lower[a], window.lower[a]);
    r.upper[a] = std::min(upper[a], window.upper[a]);
    if (r.upper[a] < r.lower[a]) r.upper[a] = r.lower[a];
  }
  return r;
}

Region Region::full(const Window& window) {
  return box(window, window.lower, window.upper);
}

double Region::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= upper[a] - lower[a];
  return v;
}

bool Region::contains(const Point& x) const {
  for (int a = 0; a < dim; ++a)
    if (x[a] < lower[a] || x[a] >= upper[a]) return false;
  return true;
}

Grid Grid::make(const Window& window, std::array<int, 3> resolution, std::vector<double> values) {
  Grid g;
  g.window = window;
  g.resolution = resolution;
  std::size_t cells = 1;
  for (int a = 0; a < window.dim; ++a) {
    if (resolution[a] < 1) throw std::invalid_argument("grid: resolution must be >= 1");
    cells *= std::size_t(resolution[a]);
  }
  for (int a = window.dim; a < 3; ++a) g.resolution[a] = 1;
  if (values.size() != cells) throw std::invalid_argument("grid: value count must match cells");
  for (double v : values)
    if (!(v >= 0.0)) throw std::invalid_argument("grid: cell values must be >= 0");
  g.values = std::move(values);
  return g;
}

Grid Grid::constant(const Window& window, std::array<int, 3> resolution, double value) {
  std::size_t cells = 1;
  for (int a = 0; a < window.dim; ++a) cells *= std::size_t(std::max(resolution[a], 1));
  return make(window, resolution, std::vector<double>(cells, value));
}

std::size_t Grid::cell_count() const { return values.size(); }

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < window.dim; ++a) v *= cell_edge(a);
  return v;
}

double Grid::value_at(const Point& x) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int a = 0; a < window.dim; ++a) {
    const double t = (x[a] - window.lower[a]) / cell_edge(a);
    int i = int(std::floor(t));
    i = std::clamp(i, 0, resolution[a] - 1);
    idx += stride * std::size_t(i);
    stride *= std::size_t(resolution[a]);
  }
  return values[idx];
}

std::pair<Point, Point> Grid::cell_bounds(std::size_t idx) const {
  Point lo{}, hi{};
  std::size_t rest = idx;
  for (int a = 0; a < window.dim; ++a) {
    const std::size_t i = rest % std::size_t(resolution[a]);
    rest /= std::size_t(resolution[a]);
    lo[a] = window.lower[a] + double(i) * cell_edge(a);
    hi[a] = window.lower[a] + double(i + 1) * cell_edge(a);
  }
  return {lo, hi};
}

double Grid::total_mass() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * cell_volume();
}

IntensityMeasure IntensityMeasure::constant_density(double lambda, const Window& window) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("intensity: density must be >= 0");
  IntensityMeasure mu;
  mu.kind_ = Kind::constant_density;
  mu.window_ = window;
  mu.lambda_ = lambda;
  mu.total_mass_ = lambda * window.volume();
  return mu;
}

IntensityMeasure IntensityMeasure::grid_density(Grid grid) {
  IntensityMeasure mu;
  mu.kind_ = Kind::grid_density;
  mu.window_ = grid.window;
  mu.total_mass_ = grid.total_mass();
  mu.grid_ = std::move(grid);
  return mu;
}

IntensityMeasure IntensityMeasure::atomic(std::vector<Atom> atoms, const Window& window) {
  IntensityMeasure mu;
  mu.kind_ = Kind::atomic;
  mu.window_ = window;
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.weight >= 0.0)) throw std::invalid_argument("intensity: atom weight must be >= 0");
    if (!window.contains(a.location))
      throw std::invalid_argument("intensity: atom outside window");
    total += a.weight;
  }
  mu.atoms_ = std::move(atoms);
  mu.total_mass_ = total;
  return mu;
}

double IntensityMeasure::density() const {
  if (kind_ != Kind::constant_density)
    throw std::logic_error("intensity: not a constant density");
  return lambda_;
}

const Grid& IntensityMeasure::grid() const {
  if (kind_ != Kind::grid_density) throw std::logic_error("intensity: not a grid density");
  return grid_;
}

const std::vector<Atom>& IntensityMeasure::atoms() const {
  if (kind_ != Kind::atomic) throw std::logic_error("intensity: not atomic");
  return atoms_;
}

ProcessSpec ProcessSpec::poisson_process(IntensityMeasure intensity) {
  ProcessSpec s;
  s.kind_ = Kind::poisson_process;
  s.window_ = intensity.window();
  s.intensity_ = std::move(intensity);
  return s;
}

ProcessSpec ProcessSpec::fixed_atoms(std::vector<Point> points, const Window& window) {
  for (const Point& x : points)
    if (!window.contains(x)) throw std::invalid_argument("fixed_atoms: point outside window");
  ProcessSpec s;
  s.kind_ = Kind::fixed_atoms;
  s.window_ = window;
  s.points_ = std::move(points);
  return s;
}

ProcessSpec ProcessSpec::binomial_process(std::uint64_t m, Grid density) {
  if (std::abs(density.total_mass() - 1.0) > 1e-9)
    throw std::invalid_argument("binomial_process: density must integrate to 1");
  ProcessSpec s;
  s.kind_ = Kind::binomial_process;
  s.window_ = density.window;
  s.m_ = m;
  s.density_ = std::move(density);
  return s;
}

ProcessSpec ProcessSpec::neyman_scott(double kappa, double mean_children, double radius,
                                      const Window& window) {
  if (!(kappa >= 0.0) || !(mean_children >= 0.0) || !(radius > 0.0))
    throw std::invalid_argument("neyman_scott: need kappa >= 0, c >= 0, r > 0");
  ProcessSpec s;
  s.kind_ = Kind::neyman_scott;
  s.window_ = window;
  s.kappa_ = kappa;
  s.mean_children_ = mean_children;
  s.radius_ = radius;
  return s;
}

std::string ProcessSpec::name() const {
  switch (kind_) {
    case Kind::poisson_process:
      switch (intensity_.kind()) {
        case IntensityMeasure::Kind::constant_density:
          return "poisson_const_" + format_double(intensity_.density());
        case IntensityMeasure::Kind::grid_density:
          return "poisson_grid";
        case IntensityMeasure::Kind::atomic:
          return "poisson_atoms_" + format_u64(intensity_.atoms().size());
      }
      return "poisson";
    case Kind::fixed_atoms:
      return "fixed_atoms_" + format_u64(points_.size());
    case Kind::binomial_process:
      return "binomial_process_" + format_u64(m_);
    case Kind::neyman_scott:
      return "neyman_scott_" + format_double(kappa_) + "_" + format_double(mean_children_) +
             "_" + format_double(radius_);
  }
  return "unknown";
}

const IntensityMeasure& ProcessSpec::intensity() const {
  if (kind_ != Kind::poisson_process) throw std::logic_error("spec: not a Poisson process");
  return intensity_;
}

const std::vector<Point>& ProcessSpec::points() const {
  if (kind_ != Kind::fixed_atoms) throw std::logic_error("spec: not fixed atoms");
  return points_;
}

std::uint64_t ProcessSpec::m() const {
  if (kind_ != Kind::binomial_process) throw std::logic_error("spec: not a binomial process");
  return m_;
}

const Grid& ProcessSpec::density() const {
  if (kind_ != Kind::binomial_process) throw std::logic_error("spec: not a binomial process");
  return density_;
}

double ProcessSpec::kappa() const {
  if (kind_ != Kind::neyman_scott) throw std::logic_error("spec: not Neyman-Scott");
  return kappa_;
}

double ProcessSpec::mean_children() const {
  if (kind_ != Kind::neyman_scott) throw std::logic_error("spec: not Neyman-Scott");
  return mean_children_;
}

double ProcessSpec::radius() const {
  if (kind_ != Kind::neyman_scott) throw std::logic_error("spec: not Neyman-Scott");
  return radius_;
}

namespace {

PointPattern sample_poisson(const IntensityMeasure& mu, RngStream& rng) {
  const Window& w = mu.window();
  PointPattern out;
  out.dim = w.dim;
  switch (mu.kind()) {
    case IntensityMeasure::Kind::constant_density: {
      const std::uint64_t n = rng.poisson(mu.total_mass());
      out.points.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        Point x{};
        for (int a = 0; a < w.dim; ++a) x[a] = rng.uniform(w.lower[a], w.upper[a]);
        out.points.push_back(x);
      }
      return out;
    }
    case IntensityMeasure::Kind::grid_density: {
      const std::uint64_t n = rng.poisson(mu.total_mass());
      if (n == 0) return out;
      const auto cum = cell_mass_cumulative(mu.grid());
      out.points.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i)
        out.points.push_back(uniform_in_cell(mu.grid(), pick_cell(cum, rng), rng));
      return out;
    }
    case IntensityMeasure::Kind::atomic: {
      for (const Atom& a : mu.atoms()) {
        const std::uint64_t k = rng.poisson(a.weight);
        for (std::uint64_t i = 0; i < k; ++i) out.points.push_back(a.location);
      }
      return out;
    }
  }
  throw std::logic_error("sample_poisson: bad intensity kind");
}

// Uniform offset in the Euclidean ball of the given radius, by cube rejection.
Point ball_offset(int dim, double radius, RngStream& rng) {
  for (;;) {
    Point d{};
    double norm2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      d[a] = rng.uniform(-radius, radius);
      norm2 += d[a] * d[a];
    }
    if (norm2 <= radius * radius) return d;
  }
}

PointPattern sample_neyman_scott(const ProcessSpec& spec, RngStream& rng) {
  const Window& w = spec.window();
  // Parents live in the r-dilated window, so every point of the window sees the
  // full ball of potential parents and the child intensity is exactly kappa*c.
  const Window parent_window = w.dilated(spec.radius());
  PointPattern out;
  out.dim = w.dim;
  const std::uint64_t parents = rng.poisson(spec.kappa() * parent_window.volume());
  for (std::uint64_t i = 0; i < parents; ++i) {
    Point parent{};
    for (int a = 0; a < w.dim; ++a)
      parent[a] = rng.uniform(parent_window.lower[a], parent_window.upper[a]);
    const std::uint64_t kids = rng.poisson(spec.mean_children());
    for (std::uint64_t j = 0; j < kids; ++j) {
      const Point d = ball_offset(w.dim, spec.radius(), rng);
      Point child{};
      for (int a = 0; a < w.dim; ++a) child[a] = parent[a] + d[a];
      if (w.contains(child)) out.points.push_back(child);
    }
  }
  return out;
}

}  // namespace

PointPattern sample_process(const ProcessSpec& spec, RngStream& rng) {
  switch (spec.kind()) {
    case ProcessSpec::Kind::poisson_process:
      return sample_poisson(spec.intensity(), rng);
    case ProcessSpec::Kind::fixed_atoms: {
      PointPattern out;
      out.dim = spec.window().dim;
      out.points = spec.points();
      return out;
    }
    case ProcessSpec::Kind::binomial_process: {
      PointPattern out;
      out.dim = spec.window().dim;
      const auto cum = cell_mass_cumulative(spec.density());
      out.points.reserve(spec.m());
      for (std::uint64_t i = 0; i < spec.m(); ++i)
        out.points.push_back(uniform_in_cell(spec.density(), pick_cell(cum, rng), rng));
      return out;
    }
    case ProcessSpec::Kind::neyman_scott:
      return sample_neyman_scott(spec, rng);
  }
  throw std::logic_error("sample_process: bad spec kind");
}

PointPattern thin_pattern(const PointPattern& pattern, double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("thin_pattern: probability must be in [0,1]");
  PointPattern out;
  out.dim = pattern.dim;
  for (const Point& x : pattern.points)
    if (rng.bernoulli(p)) out.points.push_back(x);
  return out;
}

PointPattern superpose(const PointPattern& a, const PointPattern& b) {
  if (a.dim != b.dim) throw std::invalid_argument("superpose: dimension mismatch");
  PointPattern out;
  out.dim = a.dim;
  out.points.reserve(a.size() + b.size());
  out.points.insert(out.points.end(), a.points.begin(), a.points.end());
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  return out;
}

PointPattern superpose(std::span<const PointPattern> patterns) {
  if (patterns.empty()) throw std::invalid_argument("superpose: empty pattern list");
  PointPattern out;
  out.dim = patterns.front().dim;
  std::size_t total = 0;
  for (const auto& p : patterns) {
    if (p.dim != out.dim) throw std::invalid_argument("superpose: dimension mismatch");
    total += p.size();
  }
  out.points.reserve(total);
  for (const auto& p : patterns)
    out.points.insert(out.points.end(), p.points.begin(), p.points.end());
  return out;
}

PointPattern thinned_superposition_sample(const ProcessSpec& spec, std::uint64_t n,
                                          RngStream& rng) {
  if (n == 0) throw std::invalid_argument("thinned_superposition_sample: n must be >= 1");
  std::vector<PointPattern> parts;
  parts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) parts.push_back(sample_process(spec, rng));
  const PointPattern merged = superpose(parts);
  return thin_pattern(merged, 1.0 / double(n), rng);
}

std::uint64_t count_in(const PointPattern& pattern, const Region& region) {
  std::uint64_t n = 0;
  for (const Point& x : pattern.points)
    if (region.contains(x)) ++n;
  return n;
}

double measure_of(const IntensityMeasure& mu, const Region& region) {
  if (!region_inside_window(region, mu.window()))
    throw std::invalid_argument("measure_of: region outside the measure's window");
  switch (mu.kind()) {
    case IntensityMeasure::Kind::constant_density:
      return mu.density() * region.volume();
    case IntensityMeasure::Kind::grid_density: {
      const Grid& g = mu.grid();
      double acc = 0.0;
      for (std::size_t c = 0; c < g.cell_count(); ++c) {
        auto [lo, hi] = g.cell_bounds(c);
        double overlap = 1.0;
        for (int a = 0; a < g.window.dim; ++a)
          overlap *= std::max(0.0, std::min(hi[a], region.upper[a]) -
                                       std::max(lo[a], region.lower[a]));
        acc += g.values[c] * overlap;
      }
      return acc;
    }
    case IntensityMeasure::Kind::atomic: {
      double acc = 0.0;
      for (const Atom& a : mu.atoms())
        if (region.contains(a.location)) acc += a.weight;
      return acc;
    }
  }
  throw std::logic_error("measure_of: bad intensity kind");
}

IntensityMeasure intensity_of_spec(const ProcessSpec& spec) {
  switch (spec.kind()) {
    case ProcessSpec::Kind::poisson_process:
      return spec.intensity();
    case ProcessSpec::Kind::fixed_atoms: {
      std::vector<Atom> atoms;
      atoms.reserve(spec.points().size());
      for (const Point& x : spec.points()) atoms.push_back(Atom{x, 1.0});
      return IntensityMeasure::atomic(std::move(atoms), spec.window());
    }
    case ProcessSpec::Kind::binomial_process: {
      Grid g = spec.density();
      for (double& v : g.values) v *= double(spec.m());
      return IntensityMeasure::grid_density(std::move(g));
    }
    case ProcessSpec::Kind::neyman_scott:
      return IntensityMeasure::constant_density(spec.kappa() * spec.mean_children(),
                                                spec.window());
  }
  throw std::logic_error("intensity_of_spec: bad spec kind");
}

void write_pattern(std::ostream& out, const PointPattern& pattern, const Window& window) {
  out << "# dim=" << window.dim << " lower=" << join_coords(window.lower, window.dim)
      << " upper=" << join_coords(window.upper, window.dim) << "\n";
  for (const Point& x : pattern.points) out << join_coords(x, pattern.dim) << "\n";
}

PatternFile read_pattern(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw std::runtime_error("pattern file: missing '#' header line");

  int dim = 0;
  std::vector<double> lo, hi;
  std::istringstream header(line.substr(1));
  std::string field;
  while (header >> field) {
    if (field.rfind("dim=", 0) == 0)
      dim = std::stoi(field.substr(4));
    else if (field.rfind("lower=", 0) == 0)
      lo = split_coords(field.substr(6));
    else if (field.rfind("upper=", 0) == 0)
      hi = split_coords(field.substr(6));
    else
      throw std::runtime_error("pattern file: unknown header field '" + field + "'");
  }
  if (dim < 1 || dim > 3 || lo.size() != std::size_t(dim) || hi.size() != std::size_t(dim))
    throw std::runtime_error("pattern file: malformed header");

  PatternFile out;
  out.window = Window::box(dim, to_point(lo), to_point(hi));
  out.pattern.dim = dim;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto coords = split_coords(line);
    if (coords.size() != std::size_t(dim))
      throw std::runtime_error("pattern file: point with wrong coordinate count");
    out.pattern.points.push_back(to_point(coords));
  }
  return out;
}

}  // namespace thinlaw
