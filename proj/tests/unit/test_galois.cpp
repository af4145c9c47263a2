#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ncndn/galois.hpp"

using namespace ncndn::galois;

namespace {

// Shift-and-add multiply with reduction after each shift. Independent of the
// table construction in the library.
Element slow_mul(Element a, Element b) {
  unsigned acc = 0;
  unsigned x = a;
  for (int bit = 0; bit < 8; ++bit) {
    if (b & (1u << bit)) acc ^= x;
    x <<= 1;
    if (x & 0x100) x ^= 0x11B;
  }
  return static_cast<Element>(acc);
}

CoefficientMatrix random_matrix(std::size_t rows, std::size_t cols,
                                std::mt19937_64& rng) {
  CoefficientMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rng() & 0xFF;
  return m;
}

std::vector<Bytes> random_payloads(std::size_t n, std::size_t len,
                                   std::mt19937_64& rng) {
  std::vector<Bytes> p(n, Bytes(len));
  for (auto& b : p)
    for (auto& x : b) x = rng() & 0xFF;
  return p;
}

}  // namespace

TEST_CASE("addition is xor") {
  CHECK(add(0x57, 0x00) == 0x57);
  CHECK(add(0x57, 0x57) == 0x00);
  CHECK(add(0x57, 0x83) == (0x57 ^ 0x83));
  CHECK(add(0x57, 0x83) == 0xD4);
  CHECK(sub(0xD4, 0x83) == 0x57);
}

TEST_CASE("multiplication matches bit-level reference on every pair") {
  for (int a = 0; a < 256; ++a) {
    for (int b = 0; b < 256; ++b) {
      REQUIRE(mul(a, b) == slow_mul(a, b));
    }
  }
  CHECK(mul(0x02, 0x01) == 0x02);
  CHECK(mul(0x00, 0xFF) == 0x00);
  CHECK(slow_mul(0x57, 0x83) == 0xC1);
  CHECK(mul(0x57, 0x83) == 0xC1);
}

TEST_CASE("inverse of every nonzero element") {
  for (int a = 1; a < 256; ++a) CHECK(mul(a, inv(a)) == 1);
  CHECK_THROWS_AS(inv(0), std::domain_error);
  CHECK(ncndn::galois::div(mul(0x53, 0xCA), 0xCA) == 0x53);
}

TEST_CASE("distributivity over sampled triples") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    Element a = rng(), b = rng(), c = rng();
    REQUIRE(mul(a, add(b, c)) == add(mul(a, b), mul(a, c)));
    REQUIRE(mul(a, mul(b, c)) == mul(mul(a, b), c));
  }
}

TEST_CASE("rank basics") {
  CHECK(rank(CoefficientMatrix::identity(3)) == 3);

  CoefficientMatrix dup({{1, 2, 3}, {4, 5, 6}, {1, 2, 3}});
  CHECK(rank(dup) == 2);

  CoefficientMatrix zero(4, 5);
  CHECK(rank(zero) == 0);

  CoefficientMatrix wide({{1, 0, 0, 7}, {0, 1, 0, 9}});
  CHECK(rank(wide) == 2);

  CHECK_THROWS_AS(CoefficientMatrix({{1, 2}, {3}}), std::invalid_argument);
}

TEST_CASE("rank invariant under row scaling and swaps") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_matrix(6, 8, rng);
    // Force a dependency so rank is not trivially full.
    for (std::size_t j = 0; j < 8; ++j) m.at(5, j) = add(m.at(0, j), mul(3, m.at(1, j)));
    const auto r = rank(m);
    auto m2 = m;
    m2.swap_rows(0, 4);
    scale(m2.row(2), static_cast<Element>(1 + rng() % 255));
    CHECK(rank(m2) == r);
    CHECK(r <= 5);
  }
}

TEST_CASE("random 73x73 matrices are full rank with the expected probability") {
  double p_full = 1.0;
  for (int i = 1; i <= 73; ++i) p_full *= 1.0 - std::pow(256.0, -i);
  std::mt19937_64 rng(2024);
  int full = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) full += rank(random_matrix(73, 73, rng)) == 73;
  // Expected ~996 successes; allow a generous binomial margin.
  const double expected = p_full * trials;
  const double sd = std::sqrt(trials * p_full * (1 - p_full));
  CHECK(full >= expected - 5 * sd - 1);
  MESSAGE("full rank in " << full << " of " << trials << " trials");
}

TEST_CASE("solve inverts identity and permutation systems") {
  std::mt19937_64 rng(3);
  auto p = random_payloads(4, 16, rng);
  CHECK(solve(CoefficientMatrix::identity(4), p) == p);

  CoefficientMatrix perm({{0, 1, 0, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, 0, 1, 0}});
  std::vector<Bytes> permuted = {p[1], p[3], p[0], p[2]};
  CHECK(solve(perm, permuted) == p);
}

TEST_CASE("solve round-trips random full-rank systems") {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 12;
    auto m = random_matrix(n, n, rng);
    if (rank(m) != n) continue;
    auto s = random_payloads(n, 24, rng);
    auto y = multiply(m, s);
    REQUIRE(solve(m, y) == s);
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("solve reports singular systems") {
  CoefficientMatrix m({{1, 2, 3}, {2, 4, 6}, {0, 0, 1}});
  std::vector<Bytes> y(3, Bytes{1, 2});
  CHECK(rank(m) == 2);
  try {
    solve(m, y);
    FAIL("expected SingularMatrix");
  } catch (const SingularMatrix& e) {
    CHECK(e.rank() == 2);
  }
  CHECK_THROWS_AS(solve(CoefficientMatrix(2, 3), std::vector<Bytes>(2)),
                  std::invalid_argument);
}
