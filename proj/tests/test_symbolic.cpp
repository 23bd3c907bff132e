#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"
#include "zipcurve/rng.hpp"
#include "zipcurve/symbolic.hpp"

using namespace zipcurve;
using ziptest::derham_by_hand;

TEST_CASE("wedge counts agreeing leading symbols") {
  // 010000... vs 011000...
  REQUIRE(wedge(SymbolStream({0, 1, 0}, {0}), SymbolStream({0, 1, 1}, {0})) == 2);
  // all-zero vs 1000...
  REQUIRE(wedge(SymbolStream::constant(0), SymbolStream({1}, {0})) == 0);
  // (012)-periodic vs 012012100...
  REQUIRE(wedge(SymbolStream({}, {0, 1, 2}), SymbolStream({0, 1, 2, 0, 1, 2, 1}, {0})) == 6);
  // identical streams written differently
  REQUIRE_THROWS_AS(wedge(SymbolStream({0}, {1, 0}), SymbolStream({0, 1}, {0, 1})),
                    std::invalid_argument);
}

TEST_CASE("vee follows the adjacency case table") {
  const std::vector<int> sig0 = {0, 0};
  // i = 0 1110..., j = 1 0001...: w=0, runs of 1s/0s after the split are 3
  REQUIRE(vee(SymbolStream({0, 1, 1, 1}, {0}), SymbolStream({1, 0, 0, 0}, {1}), sig0).value == 3);
  // i = 010..., j = 011...: w=2, both runs empty
  REQUIRE(vee(SymbolStream({0, 1}, {0}), SymbolStream({0, 1}, {1}), sig0).value == 0);
  // symbols differing by 2: otherwise-case
  const std::vector<int> sig3 = {0, 0, 0};
  REQUIRE(vee(SymbolStream({0, 2}, {0}), SymbolStream({0, 0}, {0}), sig3).value == 0);
  // double coding 01... vs 10...: both runs unbounded, capped
  const VeeResult v = vee(SymbolStream({0}, {1}), SymbolStream({1}, {0}), sig0, 64);
  REQUIRE(v.capped);
  REQUIRE(v.value == 64);
}

TEST_CASE("vee respects general signatures") {
  // with eps = (1, 0) and i starting 0, j starting 1: case two of the
  // table counts leading 0s on both shifted streams
  const std::vector<int> sig = {1, 0};
  REQUIRE(vee(SymbolStream({0, 0, 0, 0, 1}, {1}), SymbolStream({1, 0, 0, 0, 0, 1}, {1}), sig).value == 3);
  // eps = (0, 1): both runs count leading 1s
  const std::vector<int> sig2 = {0, 1};
  REQUIRE(vee(SymbolStream({0, 1, 1, 0}, {0}), SymbolStream({1, 1, 1, 1, 0}, {0}), sig2).value == 2);
}

TEST_CASE("pi_project evaluates binary and ternary expansions exactly") {
  const Zipper half = uniform_line_zipper(2);
  REQUIRE(pi_project(half, SymbolStream({0}, {1})) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(pi_project(half, SymbolStream::constant(1)) == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(pi_project(half, SymbolStream({0, 1}, {0, 1})) == Catch::Approx(1.0 / 3.0).margin(1e-15));

  const Zipper thirds = uniform_line_zipper(3);
  REQUIRE(pi_project(thirds, SymbolStream::constant(1)) == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("Pi_project hits fixed points and one-step images") {
  const Zipper z = derham_by_hand(0.1);
  const AttractorBound bound = attractor_bound(z);
  const Vec a = Pi_project(z, SymbolStream::constant(0), 1e-10, bound);
  REQUIRE(a[0] == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(a[1] == Catch::Approx(-1.0).margin(1e-9));
  const Vec b = Pi_project(z, SymbolStream({1}, {0}), 1e-10, bound);
  REQUIRE(b[0] == Catch::Approx(0.1).margin(1e-9));
  REQUIRE(b[1] == Catch::Approx(-0.1).margin(1e-9));

  const Zipper line = uniform_line_zipper(2);
  const Vec c = Pi_project(line, SymbolStream({}, {0, 1}), 1e-12);
  REQUIRE(c[0] == Catch::Approx(1.0 / 3.0).margin(1e-11));
  REQUIRE_THROWS_AS(Pi_project(line, SymbolStream::constant(0), 0.0), std::invalid_argument);
}

TEST_CASE("xi_partition implements the stopping rule") {
  const auto p1 = xi_partition({0.5, 0.5}, 0.3);
  REQUIRE(p1.words.size() == 4);
  for (const Word& w : p1.words) REQUIRE(w.size() == 2);

  const auto p2 = xi_partition({0.5, 0.25, 0.25}, 0.3);
  std::vector<std::string> got;
  for (const Word& w : p2.words) got.push_back(w.str(3));
  REQUIRE(got == std::vector<std::string>{"00", "01", "02", "1", "2"});

  const auto p3 = xi_partition({0.5, 0.5}, 0.5);
  REQUIRE(p3.words.size() == 2);
  REQUIRE_THROWS_AS(xi_partition({0.5, 0.5}, 1.5), std::invalid_argument);
}

TEST_CASE("xi_partition weights telescope to one") {
  Rng rng(99);
  const std::vector<double> weights = {0.5, 0.2, 0.3};
  for (int trial = 0; trial < 20; ++trial) {
    const double r = rng.uniform(1e-4, 0.9);
    const auto part = xi_partition(weights, r);
    double sum = 0.0;
    for (double w : part.word_weights) sum += w;
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("pi is monotone for signature-zero zippers") {
  const Zipper z = uniform_line_zipper(3);
  Rng rng(4);
  auto random_stream = [&]() {
    std::vector<int> pre, per;
    const int np = static_cast<int>(rng.below(6));
    for (int i = 0; i < np; ++i) pre.push_back(static_cast<int>(rng.below(3)));
    const int pp = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < pp; ++i) per.push_back(static_cast<int>(rng.below(3)));
    return SymbolStream(pre, per);
  };
  for (int trial = 0; trial < 10000; ++trial) {
    const SymbolStream a = random_stream();
    const SymbolStream b = random_stream();
    // lexicographic comparison via first difference
    std::size_t k = 0;
    const std::size_t horizon = stream_equality_horizon(a, b);
    while (k <= horizon && a.at(k) == b.at(k)) ++k;
    if (k > horizon) continue;
    const bool a_less = a.at(k) < b.at(k);
    const double pa = pi_project(z, a), pb = pi_project(z, b);
    if (a_less)
      REQUIRE(pa <= pb + 1e-15);
    else
      REQUIRE(pb <= pa + 1e-15);
  }
}

TEST_CASE("v(pi(i)) equals Pi(i) for random streams") {
  const Zipper z = derham_by_hand(0.2);
  const AttractorBound bound = attractor_bound(z);
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> pre, per;
    const int np = static_cast<int>(rng.below(8));
    for (int i = 0; i < np; ++i) pre.push_back(static_cast<int>(rng.below(2)));
    const int pp = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < pp; ++i) per.push_back(static_cast<int>(rng.below(2)));
    const SymbolStream s(pre, per);
    const double x = pi_project(z, s);
    const Vec via_pi = Pi_project(z, s, 1e-9, bound);
    const Vec via_v = evaluate_v(z, x, 1e-9, bound).position;
    REQUIRE(norm2(via_pi - via_v) < 5e-9);
  }
}

TEST_CASE("distance bracket brackets the parameter distance") {
  const Zipper z = uniform_line_zipper(2);
  // i = 00..., j = 01...: w=1, v=0, s = 1/2 + 1/2
  const DistanceBracket b1 =
      distance_bracket(z, SymbolStream::constant(0), SymbolStream({0, 1}, {1}));
  REQUIRE(b1.wedge == 1);
  REQUIRE(b1.vee == 0);
  REQUIRE(b1.s == Catch::Approx(1.0));

  // i = 0..., j = 1...: degenerate top-level bracket
  const DistanceBracket b2 =
      distance_bracket(z, SymbolStream::constant(0), SymbolStream::constant(1));
  REQUIRE(b2.wedge == 0);
  REQUIRE(b2.vee == 0);
  REQUIRE(b2.s == Catch::Approx(2.0));

  // double coding 01... / 10...: v capped, s -> 0
  const DistanceBracket b3 = distance_bracket(z, SymbolStream({0}, {1}), SymbolStream({1}, {0}), 40);
  REQUIRE(b3.vee_capped);
  REQUIRE(b3.s < 1e-10);

  Zipper sig = z;
  sig.signature = {0, 1};
  REQUIRE_THROWS_AS(
      distance_bracket(sig, SymbolStream::constant(0), SymbolStream::constant(1)),
      std::invalid_argument);
}

TEST_CASE("empirical two-sided bound on de Rham") {
  const Zipper z = derham_by_hand(0.1);
  Rng rng(31337);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  int used = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<int> pre_a, pre_b, per_a, per_b;
    const int na = static_cast<int>(rng.below(10)), nb = static_cast<int>(rng.below(10));
    for (int i = 0; i < na; ++i) pre_a.push_back(static_cast<int>(rng.below(2)));
    for (int i = 0; i < nb; ++i) pre_b.push_back(static_cast<int>(rng.below(2)));
    for (int i = 0; i < 1 + static_cast<int>(rng.below(3)); ++i)
      per_a.push_back(static_cast<int>(rng.below(2)));
    for (int i = 0; i < 1 + static_cast<int>(rng.below(3)); ++i)
      per_b.push_back(static_cast<int>(rng.below(2)));
    const SymbolStream a(pre_a, per_a), b(pre_b, per_b);
    DistanceBracket br;
    try {
      br = distance_bracket(z, a, b, 64);
    } catch (const std::invalid_argument&) {
      continue;  // identical streams
    }
    if (br.vee_capped) continue;  // double codings excluded from the bound
    const double dist = std::fabs(pi_project(z, a) - pi_project(z, b));
    if (dist == 0.0) continue;
    const double ratio = dist / br.s;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    ++used;
  }
  REQUIRE(used > 5000);
  REQUIRE(hi < 1e3);
  REQUIRE(lo > 1e-3);
  INFO("ratio bracket [" << lo << ", " << hi << "]");
}

TEST_CASE("word serialization switches to commas on wide alphabets") {
  const Word w{{0, 7, 11, 3}};
  REQUIRE(w.str(12) == "0,7,11,3");
  REQUIRE(Word{{0, 1, 2}}.str(3) == "012");
}

TEST_CASE("stream parse and print round trip") {
  const SymbolStream s = SymbolStream::parse("011(10)");
  REQUIRE(s.prefix() == std::vector<int>{0, 1, 1});
  REQUIRE(s.period() == std::vector<int>{1, 0});
  REQUIRE(s.str() == "011(10)");
  REQUIRE(s.at(2) == 1);
  REQUIRE(s.at(3) == 1);
  REQUIRE(s.at(4) == 0);
  REQUIRE(s.at(5) == 1);
  REQUIRE_THROWS_AS(SymbolStream::parse("011"), std::invalid_argument);
  REQUIRE_THROWS_AS(SymbolStream({0}, {}), std::invalid_argument);
}
