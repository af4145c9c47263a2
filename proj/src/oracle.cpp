#include <algorithm>
#include <numeric>

#include "ncndn/lp.hpp"
#include "ncndn/optimizer.hpp"

namespace ncndn::optimizer {
namespace {

struct Combo {
  std::vector<int> level;
  double bound = 0.0;
};

std::vector<Combo> all_combos(int U, int L, const VideoProfile& profile) {
  std::vector<Combo> out;
  std::vector<int> k(U, -1);
  while (true) {
    Combo c{k, 0.0};
    for (int v : k) c.bound += profile.quality_of(v);
    c.bound /= U;
    out.push_back(c);
    int i = 0;
    while (i < U && k[i] == L - 1) k[i++] = -1;
    if (i == U) break;
    ++k[i];
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Combo& a, const Combo& b) { return a.bound > b.bound; });
  return out;
}

}  // namespace

OracleResult oracle_solve(const NetworkGraph& g, const VideoProfile& profile,
                          const CostVector& costs) {
  profile.validate();
  g.validate();
  const auto clients = g.clients();
  const int U = static_cast<int>(clients.size());
  const int L = profile.layers();
  const int E = g.link_count();
  if (U > 3 || L > 3 || E > 20) {
    throw TooLarge("oracle handles at most 3 clients, 3 layers and 20 links");
  }
  if (static_cast<int>(costs.size()) != L) {
    throw std::invalid_argument("cost vector needs one entry per layer");
  }
  const int server = g.server();
  std::vector<std::vector<bool>> usable(U);
  for (int u = 0; u < U; ++u) usable[u] = usable_links(g, clients[u]);

  OracleResult best;
  best.level.assign(U, -1);
  best.flows.assign(U, ClassFlows(L, std::vector<double>(E, 0.0)));
  best.objective = 0.0;

  for (const Combo& combo : all_combos(U, L, profile)) {
    if (combo.bound <= best.objective + 1e-12) break;
    lp::Problem p;
    std::vector<std::vector<std::vector<int>>> r(
        U, std::vector<std::vector<int>>(L, std::vector<int>(E, -1)));
    std::vector<std::vector<int>> z(L, std::vector<int>(E, -1));
    for (int u = 0; u < U; ++u) {
      for (int l = 0; l <= combo.level[u]; ++l) {
        for (int e = 0; e < E; ++e) {
          if (!usable[u][e]) continue;
          double obj = 0.0;
          if (g.link(e).from == clients[u]) obj = -costs[l] / U;
          r[u][l][e] = p.add_var(obj);
          if (z[l][e] < 0) z[l][e] = p.add_var(0.0);
          p.add({{r[u][l][e], 1.0}, {z[l][e], -1.0}}, lp::Sense::kLessEqual, 0.0);
        }
      }
    }
    for (int e = 0; e < E; ++e) {
      std::vector<std::pair<int, double>> terms;
      for (int l = 0; l < L; ++l) {
        if (z[l][e] >= 0) terms.push_back({z[l][e], profile.exchange_bits()});
      }
      if (!terms.empty()) p.add(std::move(terms), lp::Sense::kLessEqual, g.link(e).bandwidth);
    }
    for (int u = 0; u < U; ++u) {
      const int k = combo.level[u];
      for (int l = 0; l <= k; ++l) {
        for (int v = 0; v < g.node_count(); ++v) {
          if (v == server || v == clients[u]) continue;
          std::vector<std::pair<int, double>> terms;
          for (int e : g.out_links(v)) {
            if (r[u][l][e] >= 0) terms.push_back({r[u][l][e], 1.0});
          }
          for (int e : g.in_links(v)) {
            if (r[u][l][e] >= 0) terms.push_back({r[u][l][e], -1.0});
          }
          if (!terms.empty()) p.add(std::move(terms), lp::Sense::kEqual, 0.0);
        }
      }
      for (int j = 0; j <= k; ++j) {
        std::vector<std::pair<int, double>> terms;
        for (int l = 0; l <= j; ++l) {
          for (int e : g.out_links(clients[u])) {
            if (r[u][l][e] >= 0) terms.push_back({r[u][l][e], 1.0});
          }
        }
        p.add(std::move(terms), j == k ? lp::Sense::kEqual : lp::Sense::kLessEqual,
              profile.cumulative_rate(j));
      }
    }
    const auto sol = lp::maximize(p);
    if (sol.status != lp::Status::kOptimal) continue;
    const double value = combo.bound + sol.objective;
    if (value > best.objective + 1e-12) {
      best.objective = value;
      best.level = combo.level;
      for (int u = 0; u < U; ++u) {
        for (int l = 0; l < L; ++l) {
          for (int e = 0; e < E; ++e) {
            best.flows[u][l][e] = r[u][l][e] >= 0 ? sol.x[r[u][l][e]] : 0.0;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace ncndn::optimizer
