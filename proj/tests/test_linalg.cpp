#include <catch2/catch_amalgamated.hpp>

#include "zipcurve/linalg.hpp"
#include "zipcurve/rng.hpp"

using namespace zipcurve;

TEST_CASE("2x2 spectral norm matches singular value algebra") {
  // diag: norms are the diagonal magnitudes
  Mat d(2, {0.5, 0.0, 0.0, 0.25});
  REQUIRE(spectral_norm(d) == Catch::Approx(0.5).epsilon(1e-14));
  double s1, s2;
  singular_values_2x2(d.data(), s1, s2);
  REQUIRE(s2 == Catch::Approx(0.25).epsilon(1e-14));

  // rotation is an isometry
  const double th = 0.7;
  Mat r(2, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)});
  REQUIRE(spectral_norm(r) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("jacobi eigen agrees with closed-form 2x2 on random matrices") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    Mat m(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
    double s1, s2;
    singular_values_2x2(m.data(), s1, s2);
    // route via the generic path
    std::vector<double> g(4, 0.0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0;
        for (int k = 0; k < 2; ++k) s += m(k, i) * m(k, j);
        g[i * 2 + j] = s;
      }
    double ev[2];
    jacobi_eigen(g.data(), 2, ev);
    REQUIRE(std::sqrt(std::max(ev[0], 0.0)) == Catch::Approx(s1).margin(1e-12));
    REQUIRE(std::sqrt(std::max(ev[1], 0.0)) == Catch::Approx(s2).margin(1e-12));
  }
}

TEST_CASE("3x3 norm via power identity") {
  Mat m(3, {2, 1, 0, 0, 1, 0, 0, 0, 0.5});
  const double n1 = spectral_norm(m);
  // ||A||^2 = ||A^T A|| for the spectral norm
  Mat g = m.transpose() * m;
  REQUIRE(spectral_norm(g) == Catch::Approx(n1 * n1).epsilon(1e-12));
}

TEST_CASE("solve and determinant") {
  Mat m(3, {2, 1, 0, 1, 3, 1, 0, 1, 2});
  Vec b{1, 2, 3};
  Vec x = solve(m, b);
  Vec r = m * x;
  for (int i = 0; i < 3; ++i) REQUIRE(r[i] == Catch::Approx(b[i]).margin(1e-12));
  REQUIRE(determinant(Mat(2, {1, 2, 3, 4})) == Catch::Approx(-2.0).margin(1e-14));

  Mat inv = inverse(m);
  Mat id = m * inv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(id(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
}

TEST_CASE("least singular direction of a diagonal matrix is the weak axis") {
  Mat m(2, {0.5, 0.0, 0.0, 0.25});
  double vx, vy;
  bool reliable;
  least_singular_direction_2x2(m.data(), vx, vy, reliable);
  REQUIRE(reliable);
  REQUIRE(std::fabs(vx) < 1e-12);
  REQUIRE(std::fabs(std::fabs(vy) - 1.0) < 1e-12);

  // conformal: flagged unreliable
  Mat c(2, {0.5, 0.0, 0.0, 0.5});
  least_singular_direction_2x2(c.data(), vx, vy, reliable);
  REQUIRE_FALSE(reliable);
}

TEST_CASE("entrywise one norm") {
  Mat m(2, {1, -2, 3, -4});
  REQUIRE(entry_abs_sum(m) == Catch::Approx(10.0));
  REQUIRE(induced_one_norm(m) == Catch::Approx(6.0));
}

TEST_CASE("rng is deterministic and uniform-ish") {
  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) REQUIRE(a.next_u64() == b.next_u64());
  Rng c(7);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += c.uniform01();
  mean /= n;
  REQUIRE(mean == Catch::Approx(0.5).margin(0.02));
}
