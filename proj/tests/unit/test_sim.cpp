#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "ncndn/config.hpp"
#include "ncndn/sim.hpp"

using namespace ncndn;

namespace {

const std::filesystem::path kFixtures = NCNDN_FIXTURES_DIR;
const optimizer::CostVector kCosts = {0.01, 0.015, 0.017};

prlnc::VideoProfile cif() { return prlnc::VideoProfile::foreman_cif(); }

NetworkGraph line(double bw) {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kIntermediate);
  g.add_node(Role::kClient);
  g.add_link(2, 1, bw, 0.01);
  g.add_link(1, 0, bw, 0.01);
  return g;
}

struct Session {
  NetworkGraph graph;
  optimizer::RateAllocation alloc;
  sim::Report report;
  std::string trace;
};

Session simulate(NetworkGraph g, config::SimParams params = {}, std::uint64_t seed = 1) {
  Session s{std::move(g), {}, {}, {}};
  s.alloc = optimizer::optimize(s.graph, cif(), kCosts);
  std::ostringstream trace;
  s.report = sim::run(s.graph, cif(), s.alloc.clients, s.alloc.plan, params, seed, &trace);
  s.trace = trace.str();
  return s;
}

struct TraceLine {
  double time;
  int node;
  std::string action;
  std::string name;
};

std::vector<TraceLine> parse_trace(const std::string& text) {
  std::vector<TraceLine> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    TraceLine t;
    std::string bf;
    ls >> t.time >> t.node >> t.action >> t.name >> bf;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("serialization plus propagation on an idle link") {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kClient);
  g.add_link(1, 0, 512000, 0.010);
  sim::LinkModel link(g, config::LinkSharing::kShared, cif());
  const auto t = link.transmit(0, false, 1600, 2.0);
  REQUIRE(t);
  CHECK(*t == doctest::Approx(2.035).epsilon(1e-12));
  CHECK(link.bits(0, false) == 12800);
}

TEST_CASE("both directions share one serialization budget") {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kClient);
  g.add_link(1, 0, 512000, 0.010);
  sim::LinkModel link(g, config::LinkSharing::kShared, cif());
  const auto a = link.transmit(0, false, 1600, 0.0);
  const auto b = link.transmit(0, true, 1600, 0.0);
  CHECK(*a == doctest::Approx(0.035));
  CHECK(*b == doctest::Approx(0.060));
  // Sustained load in both directions never exceeds the link rate.
  double last = 0;
  for (int i = 0; i < 100; ++i) last = *link.transmit(0, i % 2 == 0, 1600, 0.0);
  CHECK((last - 0.010) * 512000 == doctest::Approx(102 * 12800));
}

TEST_CASE("static split gives each direction its own share") {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kClient);
  g.add_link(1, 0, 576000, 0.0);
  sim::LinkModel link(g, config::LinkSharing::kStaticSplit, cif());
  // Interest : Data = 200 : 1600, so Data gets 8/9 of the link.
  CHECK(*link.transmit(0, false, 1600, 0.0) == doctest::Approx(12800.0 / 512000));
  CHECK(*link.transmit(0, true, 200, 0.0) == doctest::Approx(1600.0 / 64000));
}

TEST_CASE("an empty frame only pays propagation") {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kClient);
  g.add_link(1, 0, 512000, 0.012);
  sim::LinkModel link(g, config::LinkSharing::kShared, cif());
  CHECK(*link.transmit(0, true, 0, 1.0) == doctest::Approx(1.012));
}

TEST_CASE("a link without bandwidth carries nothing") {
  NetworkGraph g;
  g.add_node(Role::kServer);
  g.add_node(Role::kClient);
  g.add_link(1, 0, 0, 0.01);
  sim::LinkModel link(g, config::LinkSharing::kShared, cif());
  CHECK_FALSE(link.transmit(0, true, 200, 0.0));
}

TEST_CASE("zero bandwidth leaves every generation undecodable") {
  const auto s = simulate(line(0));
  REQUIRE(s.report.clients.size() == 1);
  const auto& c = s.report.clients[0];
  CHECK(c.mean_psnr == 0.0);
  for (double p : c.psnr) CHECK(p == 0.0);
  for (int l : c.layer) CHECK(l == -1);
}

TEST_CASE("a single client with an ample path sees the top layer") {
  const auto s = simulate(line(2e6));
  const auto& c = s.report.clients[0];
  REQUIRE(c.psnr.size() == 40);
  int top = 0;
  for (double p : c.psnr) top += p == 39.09;
  CHECK(top >= 38);
  CHECK(c.issued == 40 * 73);
  CHECK(c.delivered == c.issued);
}

TEST_CASE("Interest schedule: constant rate per class, one jitter offset per client") {
  const auto s = simulate(line(2e6));
  std::map<std::string, std::vector<double>> issued;
  for (const auto& t : parse_trace(s.trace)) {
    if (t.action == "issue") issued[t.name].push_back(t.time);
  }
  const auto& g0 = issued["/video/1/0/0"];
  const auto& g3 = issued["/video/1/0/3"];
  REQUIRE(g0.size() == 38);
  REQUIRE(issued["/video/1/1/0"].size() == 15);
  REQUIRE(issued["/video/1/2/0"].size() == 20);
  const double jitter = g0.front();
  CHECK(jitter >= 0.0);
  CHECK(jitter < 0.1);
  for (std::size_t i = 0; i < g0.size(); ++i) {
    CHECK(g0[i] == doctest::Approx(jitter + i / 38.0));
    CHECK(g3[i] == doctest::Approx(3.0 + jitter + i / 38.0));
  }
  CHECK(issued["/video/1/2/0"].front() == doctest::Approx(jitter));
}

TEST_CASE("no issue events for a client without rates") {
  const auto s = simulate(line(1000));
  CHECK(s.alloc.plan.level[0] == -1);
  CHECK(s.report.clients[0].issued == 0);
  CHECK(s.trace.find(" issue ") == std::string::npos);
}

TEST_CASE("runs are deterministic for a seed") {
  const auto g = config::parse_topology(kFixtures / "small" / "diamond.topo");
  const auto a = simulate(g, {}, 42);
  const auto b = simulate(g, {}, 42);
  const auto c = simulate(g, {}, 43);
  CHECK(a.trace == b.trace);
  CHECK(a.trace != c.trace);
  for (std::size_t u = 0; u < a.report.clients.size(); ++u) {
    CHECK(a.report.clients[u].psnr == b.report.clients[u].psnr);
  }
  CHECK(a.report.events == b.report.events);
}

TEST_CASE("simulation invariants on the small fixtures") {
  for (const char* name : {"line", "diamond", "butterfly", "bottleneck", "tree"}) {
    CAPTURE(name);
    const auto g = config::parse_topology(kFixtures / "small" / (std::string(name) + ".topo"));
    config::SimParams params;
    params.exact_bloom = true;
    params.generations = 10;
    const auto s = simulate(g, params, 7);
    const double T = cif().gen_duration;
    const double slack = 8.0 * cif().payload_size;
    for (const auto& l : s.report.links) {
      CHECK(l.peak_window_bits <= l.bandwidth * T + slack);
    }
    const auto ub = sim::upper_bound_psnr(s.graph, cif(), s.alloc.clients);
    for (std::size_t u = 0; u < s.report.clients.size(); ++u) {
      const auto& c = s.report.clients[u];
      const double exp = cif().quality_of(s.alloc.plan.level[u]);
      CHECK(c.excess_deliveries == 0);
      CHECK(c.identical_deliveries == 0);
      CHECK(c.delivered <= c.issued);
      CHECK(c.mean_psnr <= exp + 1e-9);
      CHECK(exp <= ub[u] + 1e-9);
      for (std::size_t k = 0; k < c.psnr.size(); ++k) {
        CHECK(c.psnr[k] == cif().quality_of(c.layer[k]));
      }
    }
  }
}

TEST_CASE("upper bound from max-flow") {
  // 1800 * 8 bits per exchanged packet: 73 pkt/s needs 1.0512 Mbps.
  CHECK(sim::upper_bound_psnr(line(1.06e6), cif(), {2})[0] == 39.09);
  CHECK(sim::upper_bound_psnr(line(1.04e6), cif(), {2})[0] == 37.82);
  CHECK(sim::upper_bound_psnr(line(0.6e6), cif(), {2})[0] == 36.48);
  CHECK(sim::upper_bound_psnr(line(0.5e6), cif(), {2})[0] == 0.0);

  // Two 600 kbps routes add up past the two-layer threshold.
  const auto g = config::parse_topology(kFixtures / "small" / "diamond.topo");
  const auto ub = sim::upper_bound_psnr(g, cif(), {4, 5});
  CHECK(ub[0] == 39.09);
  CHECK(ub[1] == 39.09);
}
