#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ncndn/lp.hpp"

using namespace ncndn::lp;

TEST_CASE("textbook maximum") {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
  Problem p;
  int x = p.add_var(3), y = p.add_var(5);
  p.add({{x, 1}}, Sense::kLessEqual, 4);
  p.add({{y, 2}}, Sense::kLessEqual, 12);
  p.add({{x, 3}, {y, 2}}, Sense::kLessEqual, 18);
  auto s = maximize(p);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(36));
  CHECK(s.x[x] == doctest::Approx(2));
  CHECK(s.x[y] == doctest::Approx(6));
}

TEST_CASE("equality and lower-bound rows need phase one") {
  // max -x - y, x + y = 5, x >= 2 -> value -5
  Problem p;
  int x = p.add_var(-1), y = p.add_var(-1);
  p.add({{x, 1}, {y, 1}}, Sense::kEqual, 5);
  p.add({{x, 1}}, Sense::kGreaterEqual, 2);
  auto s = maximize(p);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(-5));
  CHECK(s.x[x] >= 2 - 1e-9);
}

TEST_CASE("infeasible and unbounded are reported") {
  Problem inf;
  int x = inf.add_var(1);
  inf.add({{x, 1}}, Sense::kLessEqual, 1);
  inf.add({{x, 1}}, Sense::kGreaterEqual, 2);
  CHECK(maximize(inf).status == Status::kInfeasible);

  Problem unb;
  int a = unb.add_var(1), b = unb.add_var(0);
  unb.add({{a, 1}, {b, -1}}, Sense::kLessEqual, 1);
  CHECK(maximize(unb).status == Status::kUnbounded);
}

TEST_CASE("negative right-hand sides") {
  // -x <= -3 means x >= 3; min x -> 3
  Problem p;
  int x = p.add_var(-1);
  p.add({{x, -1}}, Sense::kLessEqual, -3);
  auto s = maximize(p);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.x[x] == doctest::Approx(3));
}

TEST_CASE("random box-constrained problems match the separable optimum") {
  // max sum c_i x_i with 0 <= x_i <= u_i and one loose coupling row: the
  // optimum takes every positive c_i to its bound.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coef(-1, 1), ub(0.5, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Problem p;
    double expect = 0, total = 0;
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < 8; ++i) {
      const double c = coef(rng), u = ub(rng);
      int v = p.add_var(c);
      p.add({{v, 1}}, Sense::kLessEqual, u);
      if (c > 0) expect += c * u;
      total += u;
      row.push_back({v, 1.0});
    }
    p.add(row, Sense::kLessEqual, total + 1);
    auto s = maximize(p);
    REQUIRE(s.status == Status::kOptimal);
    CHECK(s.objective == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("degenerate vertices do not cycle") {
  // Beale's classic cycling example for Dantzig pricing.
  Problem p;
  int x1 = p.add_var(0.75), x2 = p.add_var(-150), x3 = p.add_var(0.02), x4 = p.add_var(-6);
  p.add({{x1, 0.25}, {x2, -60}, {x3, -0.04}, {x4, 9}}, Sense::kLessEqual, 0);
  p.add({{x1, 0.5}, {x2, -90}, {x3, -0.02}, {x4, 3}}, Sense::kLessEqual, 0);
  p.add({{x3, 1}}, Sense::kLessEqual, 1);
  auto s = maximize(p);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(0.05));
}
