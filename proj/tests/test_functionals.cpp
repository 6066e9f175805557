#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "thinlaw/distributions.hpp"
#include "thinlaw/functionals.hpp"
#include "thinlaw/pmf.hpp"
#include "thinlaw/point_process.hpp"

using namespace thinlaw;

namespace {

const Window unit1 = Window::unit(1);
const Window unit2 = Window::unit(2);

std::vector<PointPattern> draw_patterns(const ProcessSpec& spec, int n, RngStream& rng) {
  std::vector<PointPattern> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(sample_process(spec, rng));
  return out;
}

}  // namespace

TEST_CASE("eval_test") {
  auto half = Region::box(unit2, make_point(0, 0), make_point(0.5, 1));
  auto ind = TestFunction::scaled_indicator(1.0, half);
  CHECK(eval_test(ind, make_point(0.25, 0.5)) == 1.0);
  CHECK(eval_test(ind, make_point(0.75, 0.5)) == 0.0);
  CHECK(eval_test(ind, make_point(0.5, 0.5)) == 0.0);

  auto flat = TestFunction::grid_function(Grid::constant(unit2, {4, 4, 1}, 0.5));
  CHECK(eval_test(flat, make_point(0.1, 0.9)) == 0.5);
  CHECK(eval_test(flat, make_point(1.5, 0.5)) == 0.0);

  CHECK_THROWS_AS(TestFunction::scaled_indicator(1.2, half), std::invalid_argument);
  CHECK_THROWS_AS(TestFunction::grid_function(Grid::constant(unit2, {2, 2, 1}, 1.1)),
                  std::invalid_argument);
}

TEST_CASE("scale_test scales pointwise") {
  auto u = TestFunction::scaled_indicator(0.6, Region::full(unit2));
  CHECK(eval_test(scale_test(u, 0.5), make_point(0.5, 0.5)) == doctest::Approx(0.3));

  auto g = TestFunction::grid_function(Grid::make(unit1, {2, 1, 1}, {0.2, 0.8}));
  auto gs = scale_test(g, 0.25);
  CHECK(eval_test(gs, make_point(0.1)) == doctest::Approx(0.05));
  CHECK(eval_test(gs, make_point(0.9)) == doctest::Approx(0.2));
}

TEST_CASE("integrate exact cases") {
  auto u_half = TestFunction::scaled_indicator(
      0.5, Region::box(unit1, make_point(0.0), make_point(0.5)));
  CHECK(integrate(u_half, IntensityMeasure::constant_density(2.0, unit1)) ==
        doctest::Approx(0.5));

  auto atom = IntensityMeasure::atomic({Atom{make_point(0.3), 1.0}}, unit1);
  CHECK(integrate(u_half, atom) == doctest::Approx(0.5));

  auto zero = TestFunction::scaled_indicator(0.0, Region::full(unit1));
  CHECK(integrate(zero, IntensityMeasure::constant_density(5.0, unit1)) == 0.0);

  // Piecewise-constant against piecewise-constant, cells not aligned.
  auto u = TestFunction::grid_function(Grid::make(unit1, {2, 1, 1}, {0.2, 0.4}));
  auto f = IntensityMeasure::grid_density(Grid::make(unit1, {3, 1, 1}, {1.0, 2.0, 3.0}));
  CHECK(integrate(u, f) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  auto big = Window::box(1, make_point(-1), make_point(2));
  auto wide = TestFunction::scaled_indicator(0.5, Region::full(big));
  CHECK_THROWS_AS(integrate(wide, IntensityMeasure::constant_density(1.0, unit1)),
                  std::invalid_argument);
}

TEST_CASE("apgfl_on_pattern") {
  PointPattern empty;
  empty.dim = 2;
  auto u = TestFunction::grid_function(Grid::constant(unit2, {1, 1, 1}, 0.5));
  CHECK(apgfl_on_pattern(empty, u) == 1.0);

  PointPattern two;
  two.dim = 2;
  two.points = {make_point(0.2, 0.2), make_point(0.7, 0.7)};
  CHECK(apgfl_on_pattern(two, u) == doctest::Approx(0.25));

  // Full indicator turns the product into the void indicator of the region.
  auto left = Region::box(unit2, make_point(0, 0), make_point(0.5, 1));
  auto void_ind = TestFunction::scaled_indicator(1.0, left);
  CHECK(apgfl_on_pattern(two, void_ind) == 0.0);
  PointPattern right;
  right.dim = 2;
  right.points = {make_point(0.7, 0.1)};
  CHECK(apgfl_on_pattern(right, void_ind) == 1.0);

  PointPattern wrong_dim;
  wrong_dim.dim = 1;
  CHECK_THROWS_AS(apgfl_on_pattern(wrong_dim, u), std::invalid_argument);
}

TEST_CASE("apgfl_empirical basics") {
  std::vector<PointPattern> empties(10);
  for (auto& p : empties) p.dim = 2;
  auto u = TestFunction::grid_function(Grid::constant(unit2, {2, 2, 1}, 0.7));
  auto est = apgfl_empirical(empties, u);
  CHECK(est.value == 1.0);
  CHECK(est.std_error == 0.0);

  auto zero = TestFunction::scaled_indicator(0.0, Region::full(unit2));
  RngStream rng(21);
  auto pats = draw_patterns(
      ProcessSpec::poisson_process(IntensityMeasure::constant_density(3.0, unit2)), 50, rng);
  CHECK(apgfl_empirical(pats, zero).value == 1.0);

  CHECK_THROWS_AS(apgfl_empirical(std::vector<PointPattern>{}, u), std::invalid_argument);
}

TEST_CASE("void probability of a Poisson process") {
  auto mu = IntensityMeasure::constant_density(3.0, unit1);
  auto spec = ProcessSpec::poisson_process(mu);
  auto full = TestFunction::scaled_indicator(1.0, Region::full(unit1));

  CHECK(apgfl_poisson(mu, full) == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));

  RngStream rng(22);
  auto pats = draw_patterns(spec, 100000, rng);
  auto est = apgfl_empirical(pats, full);
  CHECK(std::abs(est.value - std::exp(-3.0)) < 3.0 * est.std_error);
}

TEST_CASE("apgfl_poisson closed form") {
  auto zero = TestFunction::scaled_indicator(0.0, Region::full(unit1));
  CHECK(apgfl_poisson(IntensityMeasure::constant_density(3.0, unit1), zero) == 1.0);

  auto atom = IntensityMeasure::atomic({Atom{make_point(0.5), 1.0}}, unit1);
  auto u = TestFunction::grid_function(Grid::constant(unit1, {2, 1, 1}, 0.5));
  CHECK(apgfl_poisson(atom, u) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("apgfl_exact per variant") {
  auto two = ProcessSpec::fixed_atoms({make_point(0.2, 0.2), make_point(0.7, 0.7)}, unit2);
  auto u = TestFunction::grid_function(Grid::constant(unit2, {1, 1, 1}, 0.5));
  CHECK(apgfl_exact(two, u).value() == doctest::Approx(0.25));

  auto zero = TestFunction::scaled_indicator(0.0, Region::full(unit2));
  for (const auto& spec :
       {two, ProcessSpec::poisson_process(IntensityMeasure::constant_density(2.0, unit2)),
        ProcessSpec::binomial_process(3, Grid::constant(unit2, {2, 2, 1}, 1.0))})
    CHECK(apgfl_exact(spec, zero).value() == 1.0);

  CHECK(!apgfl_exact(ProcessSpec::neyman_scott(2.0, 3.0, 0.1, unit2), u).has_value());
}

TEST_CASE("binomial process functional matches sampling") {
  auto spec = ProcessSpec::binomial_process(2, Grid::constant(unit1, {1, 1, 1}, 1.0));
  auto u = TestFunction::scaled_indicator(
      1.0, Region::box(unit1, make_point(0.0), make_point(0.5)));
  const double exact = apgfl_exact(spec, u).value();
  CHECK(exact == doctest::Approx(0.25).epsilon(1e-12));

  RngStream rng(23);
  auto pats = draw_patterns(spec, 100000, rng);
  auto est = apgfl_empirical(pats, u);
  CHECK(std::abs(est.value - exact) < 3.0 * est.std_error);
}

TEST_CASE("first_order_residual closed forms") {
  auto one_atom = ProcessSpec::fixed_atoms({make_point(0.5, 0.5)}, unit2);
  auto dict = standard_dictionary(unit2);
  for (const auto& named : dict)
    for (double p : {0.2, 0.7, 1.0})
      CHECK(first_order_residual(one_atom, named.fn, p) == doctest::Approx(0.0).epsilon(1e-12));

  // Two atoms under the full indicator: (1-p)^2 - (1-2p) = p^2.
  auto two = ProcessSpec::fixed_atoms({make_point(0.2, 0.2), make_point(0.7, 0.7)}, unit2);
  auto full = TestFunction::scaled_indicator(1.0, Region::full(unit2));
  for (double p : {0.2, 0.1, 0.05, 0.025})
    CHECK(first_order_residual(two, full, p) == doctest::Approx(p * p).epsilon(1e-12));

  // Poisson: residual = e^{-pI} - 1 + pI with I the intensity integral.
  auto pois = ProcessSpec::poisson_process(IntensityMeasure::constant_density(2.0, unit1));
  auto u = TestFunction::scaled_indicator(
      0.5, Region::box(unit1, make_point(0.0), make_point(0.4)));
  // I = 0.5 * 2 * 0.4 = 0.4, so p = 0.25 puts pI at 0.1.
  CHECK(first_order_residual(pois, u, 0.25) ==
        doctest::Approx(std::exp(-0.1) - 1.0 + 0.1).epsilon(1e-9));
  CHECK(std::exp(-0.1) - 1.0 + 0.1 == doctest::Approx(0.0048374).epsilon(1e-4));

  CHECK_THROWS_AS(first_order_residual(two, full, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(
      first_order_residual(ProcessSpec::neyman_scott(2.0, 3.0, 0.1, unit2), full, 0.5),
      std::invalid_argument);
}

TEST_CASE("first_order_residual sampling overload") {
  auto ns = ProcessSpec::neyman_scott(2.0, 3.0, 0.1, unit2);
  auto u = TestFunction::scaled_indicator(0.6, Region::full(unit2));
  RngStream rng(24);
  auto est = first_order_residual(ns, u, 0.1, 50000, rng);
  CHECK(est.std_error > 0.0);
  // Truncating the alternating product expansion after the linear term bounds
  // the residual by p^2 v^2 E[N(N-1)] / 2, and E[N(N-1)] <= 36 + 18 = 54 here.
  CHECK(std::abs(est.value) <= 0.5 * 0.01 * 0.36 * 54.0 + 5.0 * est.std_error);

  RngStream rng2(25);
  auto again = first_order_residual(ns, u, 0.1, 50000, rng2);
  CHECK(std::abs(est.value - again.value) <
        5.0 * std::hypot(est.std_error, again.std_error));
}

TEST_CASE("residual decays at second order in p") {
  const std::vector<ProcessSpec> specs{
      ProcessSpec::poisson_process(IntensityMeasure::constant_density(4.0, unit2)),
      ProcessSpec::binomial_process(5, Grid::constant(unit2, {2, 2, 1}, 1.0)),
      ProcessSpec::fixed_atoms({make_point(0.2, 0.2), make_point(0.7, 0.7)}, unit2)};
  auto u = TestFunction::grid_function(Grid::constant(unit2, {4, 4, 1}, 0.5));
  const std::vector<double> ps{0.2, 0.1, 0.05, 0.025};
  for (const auto& spec : specs) {
    // residual/p^2 rises toward its p -> 0 limit, so the constant fitted at
    // p = 0.2 needs a cushion to act as an envelope for the smaller p values.
    const double c_fit = 1.25 * std::abs(first_order_residual(spec, u, 0.2)) / (0.2 * 0.2);
    REQUIRE(c_fit > 0.0);
    double sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_xy = 0.0;
    for (double p : ps) {
      const double r = std::abs(first_order_residual(spec, u, p));
      CHECK(r <= c_fit * p * p * (1.0 + 1e-9));
      const double x = std::log(p), y = std::log(r);
      sum_x += x;
      sum_y += y;
      sum_xx += x * x;
      sum_xy += x * y;
    }
    const double n = double(ps.size());
    const double slope = (n * sum_xy - sum_x * sum_y) / (n * sum_xx - sum_x * sum_x);
    CHECK(slope >= 1.9);
  }
}

TEST_CASE("thinning property of the functional") {
  auto dict = standard_dictionary(unit2);
  const std::vector<ProcessSpec> specs{
      ProcessSpec::poisson_process(IntensityMeasure::constant_density(4.0, unit2)),
      ProcessSpec::fixed_atoms({make_point(0.3, 0.3), make_point(0.8, 0.6)}, unit2),
      ProcessSpec::binomial_process(4, Grid::constant(unit2, {2, 2, 1}, 1.0)),
      ProcessSpec::neyman_scott(2.0, 3.0, 0.1, unit2)};
  const int N = 20000;
  const double p = 0.5;
  RngStream master(25);
  int stream = 0;
  for (const auto& spec : specs) {
    RngStream rng(master.derive("thin-prop", ++stream));
    std::vector<PointPattern> thinned(N);
    for (auto& pat : thinned) pat = thin_pattern(sample_process(spec, rng), p, rng);
    for (const auto& named : dict) {
      auto lhs = apgfl_empirical(thinned, named.fn);
      const auto pu = scale_test(named.fn, p);
      const auto exact = apgfl_exact(spec, pu);
      if (exact) {
        CHECK(std::abs(lhs.value - *exact) < std::max(5.0 * lhs.std_error, 1e-12));
      } else {
        RngStream rng2(master.derive("thin-prop-ref", stream));
        auto base = draw_patterns(spec, N, rng2);
        auto rhs = apgfl_empirical(base, pu);
        const double se = std::hypot(lhs.std_error, rhs.std_error);
        CHECK(std::abs(lhs.value - rhs.value) < 5.0 * se);
      }
    }
  }
}

TEST_CASE("superposition multiplies the functional") {
  auto spec_a = ProcessSpec::poisson_process(IntensityMeasure::constant_density(3.0, unit2));
  auto spec_b = ProcessSpec::neyman_scott(1.5, 2.0, 0.1, unit2);
  const int N = 20000;
  RngStream ra(26), rb(27), rc(28), rd(29);
  std::vector<PointPattern> merged(N), only_a(N), only_b(N);
  for (int i = 0; i < N; ++i) {
    merged[i] = superpose(sample_process(spec_a, ra), sample_process(spec_b, rb));
    only_a[i] = sample_process(spec_a, rc);
    only_b[i] = sample_process(spec_b, rd);
  }
  for (const auto& named : standard_dictionary(unit2)) {
    auto lhs = apgfl_empirical(merged, named.fn);
    auto ea = apgfl_empirical(only_a, named.fn);
    auto eb = apgfl_empirical(only_b, named.fn);
    const double product = ea.value * eb.value;
    const double se = std::sqrt(lhs.std_error * lhs.std_error +
                                ea.value * ea.value * eb.std_error * eb.std_error +
                                eb.value * eb.value * ea.std_error * ea.std_error);
    CHECK(std::abs(lhs.value - product) < 5.0 * se);
  }
}

TEST_CASE("scaled indicators bridge to the count transform") {
  auto region = Region::box(unit2, make_point(0, 0), make_point(0.5, 1));
  const double c = 0.6;
  auto u = TestFunction::scaled_indicator(c, region);

  // Per pattern the product collapses to (1-c)^count, an exact identity.
  RngStream rng(30);
  auto ns = ProcessSpec::neyman_scott(2.0, 3.0, 0.1, unit2);
  for (int i = 0; i < 200; ++i) {
    auto pat = sample_process(ns, rng);
    CHECK(apgfl_on_pattern(pat, u) ==
          doctest::Approx(ipow(1.0 - c, count_in(pat, region))).epsilon(1e-12));
  }

  // Poisson: the functional equals the count APGF in closed form.
  auto mu = IntensityMeasure::constant_density(4.0, unit2);
  auto pois = ProcessSpec::poisson_process(mu);
  const double count_mean = measure_of(mu, region);
  CHECK(apgfl_exact(pois, u).value() ==
        doctest::Approx(apgf_exact(IntegerDistribution::poisson(count_mean), c))
            .epsilon(1e-12));

  // Fixed atoms: counts are deterministic.
  auto fa = ProcessSpec::fixed_atoms({make_point(0.1, 0.5), make_point(0.9, 0.5)}, unit2);
  CHECK(apgfl_exact(fa, u).value() ==
        doctest::Approx(apgf_exact(IntegerDistribution::deterministic(1), c)).epsilon(1e-12));
}

TEST_CASE("functional is monotone under pointwise increase of u") {
  RngStream rng(31);
  auto spec = ProcessSpec::poisson_process(IntensityMeasure::constant_density(5.0, unit2));
  for (const auto& named : standard_dictionary(unit2)) {
    auto smaller = scale_test(named.fn, 0.5);
    for (int i = 0; i < 100; ++i) {
      auto pat = sample_process(spec, rng);
      CHECK(apgfl_on_pattern(pat, smaller) >= apgfl_on_pattern(pat, named.fn));
    }
  }
}

TEST_CASE("standard dictionary shape") {
  auto dict = standard_dictionary(unit2);
  REQUIRE(dict.size() == 6);
  CHECK(dict[0].id == "ind_c0.3_A1");
  CHECK(dict[1].id == "ind_c0.6_A2");
  CHECK(dict[2].id == "ind_c1.0_A3");
  CHECK(dict[3].id == "grid_const");
  CHECK(dict[4].id == "grid_ramp");
  CHECK(dict[5].id == "grid_checker");

  // The indicator regions are nested: A3 inside A2 inside A1.
  const auto& a1 = dict[0].fn.region();
  const auto& a2 = dict[1].fn.region();
  const auto& a3 = dict[2].fn.region();
  for (int a = 0; a < 2; ++a) {
    CHECK(a1.lower[a] <= a2.lower[a]);
    CHECK(a2.lower[a] <= a3.lower[a]);
    CHECK(a3.upper[a] <= a2.upper[a]);
    CHECK(a2.upper[a] <= a1.upper[a]);
  }

  for (const auto& named : dict) {
    RngStream rng(32);
    for (int i = 0; i < 50; ++i) {
      Point x = make_point(rng.uniform01(), rng.uniform01());
      const double v = eval_test(named.fn, x);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  // Checkerboard alternates between 0 and 0.8 on adjacent cells.
  const auto& checker = dict[5].fn.grid();
  CHECK(checker.values[0] == 0.8);
  CHECK(checker.values[1] == 0.0);
}

TEST_CASE("gap report tracks the worst entry") {
  Estimate a{0.5, 0.01, 100};
  Estimate b{0.9, 0.01, 100};
  auto report = make_gap_report({{"u1", a, 0.52, 0.0}, {"u2", b, 0.8, 0.0}}, 100);
  CHECK(report.entries[0].gap == doctest::Approx(0.02));
  CHECK(report.entries[1].gap == doctest::Approx(0.1));
  CHECK(report.max_gap == doctest::Approx(0.1));
  CHECK(report.n == 100);
}
