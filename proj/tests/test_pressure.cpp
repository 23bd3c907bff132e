#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "test_helpers.hpp"
#include "zipcurve/pressure.hpp"
#include "zipcurve/rng.hpp"

using namespace zipcurve;
using ziptest::derham_by_hand;

namespace {

MatrixSystem scalar_system(double c0, double c1) {
  MatrixSystem s;
  s.dim = 2;
  s.matrices = {Mat(2, {c0, 0, 0, c0}), Mat(2, {c1, 0, 0, c1})};
  s.weights = {0.5, 0.5};
  return s;
}

// Closed form for the asymmetric scalar oracle: P(t) = -log2(4^-t + 2^-t).
double scalar_pressure(double t) {
  // stable two-term log-sum-exp in base 2
  const double a = -2.0 * t, b = -t;
  const double m = std::max(a, b);
  return -(m + std::log2(std::exp2(a - m) + std::exp2(b - m)));
}

}  // namespace

TEST_CASE("scalar oracle: P_n equals the closed form at every depth") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  PressureOptions opt;
  opt.depths = {1, 4, 9};
  const PressureEvaluator ev(sys, opt);
  for (double t : {-10.0, -3.0, -1.0, 0.0, 0.5, 1.0, 3.0, 10.0})
    for (int n : opt.depths)
      REQUIRE(ev.finite_depth(t, n) == Catch::Approx(scalar_pressure(t)).margin(1e-11));
}

TEST_CASE("uniform scalar system has P(t) = t - 1") {
  const MatrixSystem sys = scalar_system(0.5, 0.5);
  REQUIRE(pressure_at(sys, 3.0, 5) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(pressure_at(sys, 0.0, 7) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("P_n(0) = -1 for arbitrary systems at every depth") {
  Rng rng(555);
  for (int trial = 0; trial < 5; ++trial) {
    MatrixSystem sys;
    sys.dim = 2;
    const int nsym = 2 + static_cast<int>(rng.below(2));
    double wsum = 0.0;
    std::vector<double> w;
    for (int i = 0; i < nsym; ++i) {
      Mat m(2);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = rng.uniform(0.05, 0.45);
      sys.matrices.push_back(m);
      w.push_back(rng.uniform(0.2, 1.0));
      wsum += w.back();
    }
    for (double& x : w) x /= wsum;
    sys.weights = w;
    for (int depth : {1, 3, 6})
      REQUIRE(pressure_at(sys, 0.0, depth) == Catch::Approx(-1.0).margin(1e-12));
  }
}

TEST_CASE("asymmetric scalar value at t = 1") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  REQUIRE(pressure_at(sys, 1.0, 6) == Catch::Approx(-std::log2(0.75)).margin(1e-12));
}

TEST_CASE("pressure curve on the asymmetric scalar oracle") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  PressureOptions opt;
  opt.depths = {4, 8, 12};
  const PressureEvaluator ev(sys, opt);
  const PressureCurve curve = pressure_curve(ev, make_grid(-10.0, 10.0, 0.25));

  for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
    REQUIRE(curve.pressure[i] == Catch::Approx(scalar_pressure(curve.t_grid[i])).margin(1e-10));

  // d0 solves x^2 + x = 1 with x = 2^{-d}
  const double d0_oracle = -std::log2((std::sqrt(5.0) - 1.0) / 2.0);
  REQUIRE(curve.d0 == Catch::Approx(d0_oracle).margin(1e-9));
  REQUIRE(curve.alpha_min == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(curve.alpha_max == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(curve.alpha_hat == Catch::Approx(1.5).margin(1e-7));
  REQUIRE(curve.concave_ok);

  // monotone nondecreasing on the grid
  for (std::size_t i = 1; i < curve.pressure.size(); ++i)
    REQUIRE(curve.pressure[i] >= curve.pressure[i - 1] - 1e-12);
}

TEST_CASE("straight-line control collapses to P(t) = t - 1") {
  const MatrixSystem sys = system_of(uniform_line_zipper(2));
  PressureOptions opt;
  opt.depths = {2, 4, 6};
  const PressureEvaluator ev(sys, opt);
  const PressureCurve curve = pressure_curve(ev, make_grid(-4.0, 4.0, 0.5));
  for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
    REQUIRE(curve.pressure[i] == Catch::Approx(curve.t_grid[i] - 1.0).margin(1e-12));
  REQUIRE(curve.d0 == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(curve.alpha_min == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(curve.alpha_max == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("legendre transform of the scalar oracle") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  PressureOptions opt;
  opt.depths = {4, 8, 12};
  const PressureEvaluator ev(sys, opt);
  const PressureCurve curve = pressure_curve(ev, make_grid(-10.0, 10.0, 0.05));

  // at beta = alpha_hat the infimum sits at t = 0 with value 1
  const LegendreResult mid = legendre(curve, 1.5);
  REQUIRE(mid.value == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(std::fabs(mid.t_star) < 1e-3);

  // beta = P'(1) = 4/3: D = P'(1) - P(1)
  const LegendreResult at1 = legendre(curve, 4.0 / 3.0);
  REQUIRE(at1.value == Catch::Approx(4.0 / 3.0 + std::log2(0.75)).margin(1e-5));
  REQUIRE(at1.t_star == Catch::Approx(1.0).margin(1e-2));

  // spectrum endpoint: clamped tail limit, D(2) = 0
  const LegendreResult top = legendre(curve, 2.0);
  REQUIRE(top.clamped);
  REQUIRE(top.value == Catch::Approx(0.0).margin(2e-3));

  REQUIRE_THROWS_AS(legendre(curve, 2.5), std::domain_error);

  // duality identity D(P'(t)) = t P'(t) - P(t) across the grid
  for (std::size_t i = 5; i + 5 < curve.t_grid.size(); i += 7) {
    const double beta = curve.derivative[i];
    const LegendreResult lr = legendre(curve, beta);
    const double expected = curve.t_grid[i] * beta - curve.pressure[i];
    REQUIRE(lr.value == Catch::Approx(expected).margin(1e-4));
  }
}

TEST_CASE("spectrum windows and degenerate case") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  PressureOptions opt;
  opt.depths = {4, 8, 12};
  const PressureEvaluator ev(sys, opt);
  const PressureCurve curve = pressure_curve(ev, make_grid(-10.0, 10.0, 0.05));

  const std::vector<double> betas = make_grid(1.1, 1.9, 0.1);
  const SpectrumCurve plain = spectrum_curve(curve, betas, false, false);
  for (const SpectrumPoint& p : plain.points) {
    if (p.beta >= curve.alpha_hat - 1e-9)
      REQUIRE(p.window == "nondeg-qualitative");
    else
      REQUIRE(p.window == "outside-window");
    REQUIRE(p.regular_window == "none");
  }

  const SpectrumCurve full = spectrum_curve(curve, betas, true, true);
  for (const SpectrumPoint& p : full.points) {
    REQUIRE(p.window == "assA-full");
    REQUIRE(p.regular_window == "assA-full");
  }

  // concavity of D on the grid
  for (std::size_t i = 1; i + 1 < full.points.size(); ++i) {
    const double mid = 0.5 * (full.points[i - 1].value + full.points[i + 1].value);
    REQUIRE(full.points[i].value >= mid - 1e-6);
  }

  const SpectrumCurve degenerate =
      spectrum_curve(pressure_curve(PressureEvaluator(system_of(uniform_line_zipper(2)),
                                                      PressureOptions{{2, 4, 6}}),
                                    make_grid(-4.0, 4.0, 0.5)),
                     betas, false, false);
  REQUIRE(degenerate.degenerate);
  REQUIRE(degenerate.points.size() == 1);
  REQUIRE(degenerate.points[0].value == Catch::Approx(1.0));
}

TEST_CASE("gibbs weights") {
  const MatrixSystem line = system_of(uniform_line_zipper(2));
  PressureOptions opt;
  opt.depths = {2, 4, 6};
  const PressureCurve curve =
      pressure_curve(PressureEvaluator(line, opt), make_grid(-4.0, 4.0, 0.5));

  // t=0: weights reduce to the Bernoulli measure
  for (const Word& w : {Word{{0, 1}}, Word{{1, 1, 0}}}) {
    double lw = 0.0;
    for (int s : w.symbols) lw += std::log(0.5);
    REQUIRE(gibbs_weight(line, curve, w, 0.0) == Catch::Approx(std::exp(lw)).margin(1e-12));
  }
  // straight line, any t: level-2 weight is exactly 1/4
  for (double t : {-1.5, 0.7, 2.0})
    REQUIRE(gibbs_weight(line, curve, Word{{0, 1}}, t) == Catch::Approx(0.25).margin(1e-10));

  // normalizer at level n is 1 when P is exact (scalar system)
  const double logz = gibbs_log_normalizer(line, 5, 1.3, curve.interp(1.3));
  REQUIRE(logz == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("gibbs dimension from the curve") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  PressureOptions opt;
  opt.depths = {4, 8, 12};
  const PressureCurve curve =
      pressure_curve(PressureEvaluator(sys, opt), make_grid(-10.0, 10.0, 0.05));
  REQUIRE(gibbs_dimension(curve, 0.0) == Catch::Approx(1.0).margin(1e-9));
  const double expected = 4.0 / 3.0 + std::log2(0.75);  // t P'(t) - P(t) at t = 1
  REQUIRE(gibbs_dimension(curve, 1.0) == Catch::Approx(expected).margin(2e-4));
}

TEST_CASE("counting spectrum: straight line concentrates at beta 1") {
  const MatrixSystem line = system_of(uniform_line_zipper(2));
  const CountingSpectrum cs = counting_spectrum(line, std::pow(2.0, -10), 0.05, {0.8, 1.0, 1.2});
  REQUIRE(cs.bin_count[1] == 1024);
  REQUIRE(cs.value[1] == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cs.bin_count[0] == 0);
  REQUIRE(cs.value[0] == -std::numeric_limits<double>::infinity());
}

TEST_CASE("counting spectrum equals the binomial oracle on the scalar system") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  const int n = 12;
  // bin half-width chosen so no lattice ratio (n+k)/n sits on a bin edge
  const double r = std::pow(2.0, -n), delta = 0.06;
  const std::vector<double> betas = make_grid(1.1, 1.9, 0.1);
  const CountingSpectrum cs = counting_spectrum(sys, r, delta, betas);
  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    // oracle: words with k copies of the 1/4-map have ratio (n+k)/n
    long long cnt = 0;
    double binom = 1.0;  // C(n, 0)
    for (int k = 0; k <= n; ++k) {
      if (std::fabs((n + k) / static_cast<double>(n) - betas[bi]) <= delta)
        cnt += static_cast<long long>(std::llround(binom));
      binom = binom * (n - k) / (k + 1);
    }
    REQUIRE(cs.bin_count[bi] == cnt);
  }
}

TEST_CASE("norm robustness on de Rham") {
  const MatrixSystem sys = system_of(derham_by_hand(0.1));
  PressureOptions two;
  two.depths = {8, 12, 16};
  PressureOptions one = two;
  one.norm = MatrixNorm::one;
  const PressureEvaluator ev2(sys, two), ev1(sys, one);
  for (double t : {-2.0, 0.5, 1.0, 2.0})
    REQUIRE(std::fabs(ev2.extrapolated(t) - ev1.extrapolated(t)) < 2e-3);
}

TEST_CASE("three-dimensional scalar system goes through the generic norm path") {
  MatrixSystem sys;
  sys.dim = 3;
  sys.matrices = {Mat(3, {0.5, 0, 0, 0, 0.5, 0, 0, 0, 0.5}),
                  Mat(3, {0.25, 0, 0, 0, 0.25, 0, 0, 0, 0.25})};
  sys.weights = {0.5, 0.5};
  // same closed form as the planar scalar oracle
  REQUIRE(pressure_at(sys, 1.0, 5) == Catch::Approx(-std::log2(0.75)).margin(1e-11));
  REQUIRE(pressure_at(sys, 0.0, 5) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("root search reports missing sign change on expanding systems") {
  MatrixSystem sys;
  sys.dim = 2;
  sys.matrices = {Mat(2, {2.0, 0, 0, 2.0}), Mat(2, {2.0, 0, 0, 2.0})};
  sys.weights = {0.5, 0.5};
  PressureOptions opt;
  opt.depths = {2, 4};
  const PressureEvaluator ev(sys, opt);
  REQUIRE_THROWS_AS(ev.root(), std::domain_error);
}

TEST_CASE("budget and input validation") {
  const MatrixSystem sys = scalar_system(0.25, 0.5);
  PressureOptions opt;
  opt.depths = {30};
  REQUIRE_THROWS_AS(PressureEvaluator(sys, opt), std::invalid_argument);

  MatrixSystem bad = sys;
  bad.weights = {0.6, 0.6};
  REQUIRE_THROWS_AS(pressure_at(bad, 0.0, 4), std::invalid_argument);

  REQUIRE_THROWS_AS(counting_spectrum(sys, 1e-9, 0.05, {1.5}), std::invalid_argument);
}
