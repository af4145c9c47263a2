#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "ncndn/config.hpp"
#include "ncndn/optimizer.hpp"

using namespace ncndn;
using namespace ncndn::optimizer;

namespace {

const std::filesystem::path kFixtures = NCNDN_FIXTURES_DIR;
const CostVector kCosts = {0.01, 0.015, 0.017};

VideoProfile cif() { return VideoProfile::foreman_cif(); }

// server <- relay <- client, both links at `bw` bits/s.
NetworkGraph line(double bw) {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kIntermediate);
  g.add_node(Role::kClient);
  g.add_link(2, 1, bw, 0.01);
  g.add_link(1, 0, bw, 0.01);
  return g;
}

bool has_rule(const std::vector<CostViolation>& v, int layer, const std::string& rule) {
  for (const auto& x : v) {
    if (x.layer == layer && x.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("cost validation") {
  const auto p = cif();
  SUBCASE("(0.01, 0.02, 0.025) breaks the quality-gain bound on the top class") {
    auto v = validate_costs(p, {0.01, 0.02, 0.025});
    REQUIRE(v.size() == 1);
    CHECK(v[0].layer == 2);
    CHECK(v[0].rule == "quality-gain");
    CHECK(v[0].bound == doctest::Approx((39.09 - 37.82) / 73));
    CHECK(v[0].bound == doctest::Approx(0.0174).epsilon(0.01));
  }
  SUBCASE("layer 1 bound") {
    CHECK(validate_costs(p, {0.01, 0.0252, 0.026}).size() == 1);  // only layer 2
    CHECK(has_rule(validate_costs(p, {0.01, 0.0254, 0.026}), 1, "quality-gain"));
  }
  SUBCASE("non-monotone vector") {
    CHECK(has_rule(validate_costs(p, {0.02, 0.01, 0.03}), 1, "monotone"));
  }
  SUBCASE("small increasing vector is admissible") {
    CHECK(validate_costs(p, {0.001, 0.002, 0.003}).empty());
    CHECK(validate_costs(p, kCosts).empty());
  }
  SUBCASE("c_2 below c_1 is not increasing") {
    auto v = validate_costs(p, {0.01, 0.02, 0.017});
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == "monotone");
  }
  SUBCASE("shape and sign") {
    CHECK(validate_costs(p, {0.01, 0.02}).front().rule == "shape");
    CHECK(has_rule(validate_costs(p, {0.0, 0.01, 0.015}), 0, "positive"));
  }
}

TEST_CASE("quality is all-or-nothing per cumulative layer") {
  const auto p = cif();
  CHECK(quality(p, {38, 15, 20}) == doctest::Approx(39.09));
  CHECK(quality(p, {38, 0, 0}) == doctest::Approx(36.48));
  CHECK(quality(p, {37.9, 15, 20}) == 0.0);
  CHECK(quality(p, {38, 15, 19.9}) == doctest::Approx(37.82));
  // A surplus in a lower class covers a higher cumulative requirement.
  CHECK(quality(p, {53, 0, 0}) == doctest::Approx(37.82));
  CHECK(decodable_layer(p, {0, 0, 0}) == -1);
}

TEST_CASE("link subproblem") {
  const auto p = cif();
  const double nine = 9 * p.exchange_bits();
  CHECK(solve_link_subproblem({0, 0, 0}, nine, p) == std::vector<double>{0, 0, 0});
  CHECK(solve_link_subproblem({1, 2, 3}, nine, p) == std::vector<double>{0, 0, 9});
  CHECK(solve_link_subproblem({5, 5, 1}, nine, p) == std::vector<double>{9, 0, 0});

  // Vertex enumeration: the feasible set is a simplex scaled by the budget.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> w(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> wt = {w(rng), w(rng), w(rng)};
    auto x = solve_link_subproblem(wt, nine, p);
    double got = 0;
    for (int l = 0; l < 3; ++l) got += wt[l] * x[l];
    double best = 0;
    for (int l = 0; l < 3; ++l) best = std::max(best, 9 * wt[l]);
    CHECK(got == doctest::Approx(best));
  }
}

TEST_CASE("user subproblem closed form") {
  const auto p = cif();
  SUBCASE("free links and ample capacity: everything on the only path") {
    auto g = line(2e6);
    ClassFlows mu(3, std::vector<double>(2, 0.0));
    auto s = solve_user_subproblem(g, 2, mu, p, kCosts, 1);
    CHECK(s.level == 2);
    for (int l = 0; l < 3; ++l) {
      CHECK(s.source_rates[l] == doctest::Approx(p.rates[l]));
      CHECK(s.flows[l][0] == doctest::Approx(p.rates[l]));
      CHECK(s.flows[l][1] == doctest::Approx(p.rates[l]));
    }
  }
  SUBCASE("prohibitive multipliers: nothing") {
    auto g = line(2e6);
    ClassFlows mu(3, std::vector<double>(2, 100.0));
    auto s = solve_user_subproblem(g, 2, mu, p, kCosts, 1);
    CHECK(s.level == -1);
    CHECK(s.value == 0.0);
    for (const auto& f : s.flows) {
      for (double v : f) CHECK(v == 0.0);
    }
  }
  SUBCASE("unreachable server") {
    NetworkGraph g;
    g.add_node(Role::kServer);
    g.add_node(Role::kClient);
    g.add_node(Role::kIntermediate);
    g.add_link(1, 2, 1e6, 0);
    ClassFlows mu(3, std::vector<double>(1, 0.0));
    CHECK_THROWS_AS(solve_user_subproblem(g, 1, mu, p, kCosts, 1), NoPathToServer);
    CHECK_THROWS_AS(solve_user_subproblem_lp(g, 1, mu, p, kCosts, 1), NoPathToServer);
  }
}

TEST_CASE("user subproblem matches the LP formulation on random multipliers") {
  const auto p = cif();
  std::mt19937 rng(17);
  for (const char* name : {"line", "diamond", "butterfly", "bottleneck", "tree"}) {
    auto g = config::parse_topology(kFixtures / "small" / (std::string(name) + ".topo"));
    const auto clients = g.clients();
    const int U = static_cast<int>(clients.size());
    for (double scale : {0.0, 1e-4, 1e-3, 1e-2}) {
      std::uniform_real_distribution<double> draw(0, scale);
      for (int trial = 0; trial < 6; ++trial) {
        for (int u : clients) {
          ClassFlows mu(3, std::vector<double>(g.link_count()));
          for (auto& row : mu) {
            for (double& v : row) v = draw(rng);
          }
          auto fast = solve_user_subproblem(g, u, mu, p, kCosts, U);
          auto ref = solve_user_subproblem_lp(g, u, mu, p, kCosts, U);
          CHECK(fast.value == doctest::Approx(ref.value).epsilon(1e-9));
          // The closed-form flows must achieve the value they report.
          double v = p.quality_of(fast.level) / U;
          for (int l = 0; l < 3; ++l) {
            v -= kCosts[l] / U * source_rate(g, u, fast.flows[l]);
            for (int e = 0; e < g.link_count(); ++e) v -= mu[l][e] * fast.flows[l][e];
          }
          CHECK(v == doctest::Approx(fast.value).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("subgradient step") {
  SUBCASE("first step copies the iterate into the averages") {
    DualState st(1, 1, 2, {1, 0, 1});
    Flows r = {{{3, 1}}};
    std::vector<std::vector<double>> x = {{1, 1}};
    subgradient_step(st, r, x);
    CHECK(st.r_hat[0][0] == std::vector<double>{3, 1});
    CHECK(st.x_hat[0] == std::vector<double>{1, 1});
    // theta(1) = 1, mu = r - x clipped at zero.
    CHECK(st.mu[0][0] == std::vector<double>{2, 0});
  }
  SUBCASE("zero subgradient leaves mu alone") {
    DualState st(1, 1, 2, {1, 10, 0.1}, 0.5);
    Flows r = {{{2, 2}}};
    std::vector<std::vector<double>> x = {{2, 2}};
    subgradient_step(st, r, x);
    CHECK(st.mu[0][0] == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("multipliers never go negative and averages are 1/t means") {
    DualState st(1, 1, 1, {1, 0, 1}, 0.1);
    std::vector<double> seen;
    for (int t = 1; t <= 5; ++t) {
      Flows r = {{{static_cast<double>(t)}}};
      std::vector<std::vector<double>> x = {{10.0}};
      subgradient_step(st, r, x);
      CHECK(st.mu[0][0][0] >= 0.0);
    }
    CHECK(st.r_hat[0][0][0] == doctest::Approx(3.0));
    CHECK(st.x_hat[0][0] == doctest::Approx(10.0));
    CHECK(st.mu[0][0][0] == 0.0);
  }
  SUBCASE("multiplier-only steps do not enter the averages") {
    DualState st(1, 1, 1, {1, 0, 1});
    subgradient_step(st, {{{100.0}}}, {{0.0}}, false);
    subgradient_step(st, {{{4.0}}}, {{2.0}}, true);
    CHECK(st.t == 2);
    CHECK(st.r_hat[0][0][0] == 4.0);
    CHECK(st.x_hat[0][0] == 2.0);
  }
}

TEST_CASE("oracle closed forms") {
  const auto p = cif();
  SUBCASE("no bandwidth") {
    auto g = line(0.0);
    auto o = oracle_solve(g, p, kCosts);
    CHECK(o.objective == 0.0);
    CHECK(o.level == std::vector<int>{-1});
  }
  SUBCASE("single client, ample path") {
    auto g = line(2e6);
    auto o = oracle_solve(g, p, kCosts);
    double cost = 0;
    for (int l = 0; l < 3; ++l) cost += kCosts[l] * p.rates[l];
    CHECK(o.objective == doctest::Approx(39.09 - cost));
    CHECK(o.level == std::vector<int>{2});
  }
  SUBCASE("bandwidth exactly at the layer-1 threshold") {
    auto g = line(53 * p.exchange_bits());
    auto o = oracle_solve(g, p, kCosts);
    CHECK(o.level == std::vector<int>{1});
  }
  SUBCASE("too large") {
    auto g = config::parse_topology(kFixtures / "planetlab" / "planetlab.topo");
    CHECK_THROWS_AS(oracle_solve(g, p, kCosts), TooLarge);
  }
}

TEST_CASE("optimizer stays within 1% of the oracle on every small fixture") {
  const auto p = cif();
  for (const char* name : {"line", "diamond", "butterfly", "bottleneck", "tree"}) {
    CAPTURE(name);
    auto g = config::parse_topology(kFixtures / "small" / (std::string(name) + ".topo"));
    const auto t0 = std::chrono::steady_clock::now();
    auto a = optimize(g, p, kCosts);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto o = oracle_solve(g, p, kCosts);
    CHECK(o.objective > 0);
    CHECK(std::abs(a.objective() - o.objective) <= 0.01 * o.objective);
    CHECK(seconds < 60);
  }
}

TEST_CASE("shared bottleneck serves both clients through aggregation") {
  // One link that carries exactly one full stream feeds two clients.
  const auto p = cif();
  const double full = 73 * p.exchange_bits();
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kIntermediate);
  g.add_node(Role::kClient);
  g.add_node(Role::kClient);
  g.add_link(1, 0, full, 0.01);
  g.add_link(2, 1, 2 * full, 0.01);
  g.add_link(3, 1, 2 * full, 0.01);
  auto o = oracle_solve(g, p, kCosts);
  CHECK(o.level == std::vector<int>{2, 2});
  auto a = optimize(g, p, kCosts);
  CHECK(a.plan.level == std::vector<int>{2, 2});
  CHECK(a.objective() == doctest::Approx(o.objective).epsilon(0.01));
}

TEST_CASE("optimizer invariants along the run") {
  const auto p = cif();
  for (const char* name : {"diamond", "tree", "butterfly"}) {
    CAPTURE(name);
    auto g = config::parse_topology(kFixtures / "small" / (std::string(name) + ".topo"));
    OptimizerParams params;
    params.tol = -1;  // run the full budget
    params.max_iter = 400;
    auto a = optimize(g, p, kCosts, params);
    REQUIRE(a.trace.size() == 400);
    double best_dual = 1e300;
    for (const auto& row : a.trace) {
      best_dual = std::min(best_dual, row.dual);
      CHECK(row.primal <= best_dual + 1e-9);
    }
    const int U = static_cast<int>(a.clients.size());
    for (int u = 0; u < U; ++u) {
      const int c = a.clients[u];
      double cum = 0;
      for (int l = 0; l < 3; ++l) {
        const auto& f = a.r_raw[u][l];
        // Conservation at every node other than the client and server.
        for (int v = 0; v < g.node_count(); ++v) {
          if (v == c || v == g.server()) continue;
          double net = 0;
          for (int e : g.out_links(v)) net += f[e];
          for (int e : g.in_links(v)) net -= f[e];
          CHECK(net == doctest::Approx(0.0).scale(1.0));
        }
        for (double v : f) CHECK(v >= 0.0);
        cum += source_rate(g, c, f);
        CHECK(cum <= p.cumulative_rate(l) + 1e-9);
      }
    }
    // Restored flows and the integer plan both fit every link.
    for (int e = 0; e < g.link_count(); ++e) {
      double load = 0;
      int packets = 0;
      for (int l = 0; l < 3; ++l) {
        double z = 0;
        for (int u = 0; u < U; ++u) z = std::max(z, a.r_hat[u][l][e]);
        load += z * p.exchange_bits();
        packets += a.plan.z[l][e];
        for (int u = 0; u < U; ++u) CHECK(a.plan.r[u][l][e] <= a.plan.z[l][e]);
      }
      CHECK(load <= g.link(e).bandwidth * (1 + 1e-6) + 1e-9);
      CHECK(packets * p.exchange_bits() <= g.link(e).bandwidth * p.gen_duration + 1e-6);
    }
    // Integer counts respect the nested generation sizes and the level.
    for (int u = 0; u < U; ++u) {
      int cum = 0;
      for (int l = 0; l < 3; ++l) {
        cum += a.plan.counts[u][l];
        CHECK(cum <= p.beta(l));
        if (l > a.plan.level[u]) CHECK(a.plan.counts[u][l] == 0);
      }
      if (a.plan.level[u] >= 0) {
        int upto = 0;
        for (int l = 0; l <= a.plan.level[u]; ++l) upto += a.plan.counts[u][l];
        CHECK(upto == p.beta(a.plan.level[u]));
      }
    }
  }
}

TEST_CASE("restoration scales over-subscribed flows") {
  const auto p = cif();
  auto g = line(38 * p.exchange_bits());
  Flows r(1, ClassFlows(3, std::vector<double>(2, 0.0)));
  for (int e = 0; e < 2; ++e) {
    r[0][0][e] = 38;
    r[0][1][e] = 15;
    r[0][2][e] = 20;
  }
  auto out = restore_feasibility(g, p, r);
  double total = 0;
  for (int l = 0; l < 3; ++l) total += out[0][l][0];
  CHECK(total == doctest::Approx(38));
  CHECK(out[0][0][0] == doctest::Approx(out[0][0][1]));
}

TEST_CASE("integerization picks the level the recovered rates reach") {
  const auto p = cif();
  auto g = line(2e6);
  Flows r(1, ClassFlows(3, std::vector<double>(2, 0.0)));
  auto set = [&](double a, double b, double c) {
    for (int e = 0; e < 2; ++e) {
      r[0][0][e] = a;
      r[0][1][e] = b;
      r[0][2][e] = c;
    }
  };
  set(37.9, 0.1, 0.0);
  auto plan = integerize(g, p, kCosts, {2}, r);
  CHECK(plan.level == std::vector<int>{0});
  CHECK(plan.counts[0] == std::vector<int>{38, 0, 0});
  CHECK(plan.objective == doctest::Approx(36.48 - 0.38));

  set(38, 14.9, 19.95);
  plan = integerize(g, p, kCosts, {2}, r);
  CHECK(plan.level == std::vector<int>{2});
  CHECK(plan.counts[0] == std::vector<int>{38, 15, 20});

  set(30, 0, 0);
  plan = integerize(g, p, kCosts, {2}, r);
  CHECK(plan.level == std::vector<int>{-1});
  CHECK(plan.objective == 0.0);

  // Capacity for 40 packets: the full plan does not fit, so the level drops.
  auto narrow = line(40 * p.exchange_bits());
  set(38, 15, 20);
  plan = integerize(narrow, p, kCosts, {2}, r);
  CHECK(plan.level == std::vector<int>{0});
  CHECK(plan.z[0][0] == 38);

  // An unsettled mix that spreads the base-layer budget over higher classes
  // still earns the level its total rate pays for once it fits.
  auto tight = line(38.19 * p.exchange_bits());
  set(35.72, 14.1, 4.38);
  plan = integerize(tight, p, kCosts, {2}, r);
  CHECK(plan.level == std::vector<int>{0});
  CHECK(plan.counts[0] == std::vector<int>{38, 0, 0});
}

TEST_CASE("EXP steps at the first sweep point past each layer threshold") {
  const auto p = cif();
  const double step = 50000;
  for (int l = 0; l < p.layers(); ++l) {
    CAPTURE(l);
    const double threshold = p.cumulative_rate(l) * p.exchange_bits();
    const double above = std::ceil(threshold / step) * step;
    const auto a = optimize(line(above), p, kCosts);
    CHECK(a.plan.level[0] == l);
    const auto b = optimize(line(above - step), p, kCosts);
    CHECK(b.plan.level[0] == l - 1);
  }
}

TEST_CASE("unreachable client is infeasible") {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kClient);
  g.add_node(Role::kClient);
  g.add_link(1, 0, 1e6, 0.01);
  auto p = cif();
  try {
    optimize(g, p, kCosts);
    FAIL("expected NoPathToServer");
  } catch (const NoPathToServer& e) {
    CHECK(e.client() == 2);
  }
}
