#include "ncndn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ncndn/lp.hpp"

namespace ncndn::optimizer {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_costs_shape(const VideoProfile& profile, const CostVector& costs) {
  if (static_cast<int>(costs.size()) != profile.layers()) {
    throw std::invalid_argument("cost vector needs one entry per layer");
  }
}

// Shortest Interest-direction path from `client` to the server under
// per-link weights. Returns the links of the path; empty if unreachable.
struct Path {
  double length = kInf;
  std::vector<int> links;
};

Path shortest_path(const NetworkGraph& g, const std::vector<int>& reverse_topo,
                   const std::vector<bool>& usable, int client,
                   const std::vector<double>& weight) {
  const int server = g.server();
  std::vector<double> dist(g.node_count(), kInf);
  std::vector<int> next(g.node_count(), -1);
  dist[server] = 0.0;
  for (int v : reverse_topo) {
    if (v == server) continue;
    for (int e : g.out_links(v)) {
      if (!usable[e]) continue;
      const double d = weight[e] + dist[g.link(e).to];
      if (d < dist[v]) {
        dist[v] = d;
        next[v] = e;
      }
    }
  }
  Path p;
  if (dist[client] == kInf) return p;
  p.length = dist[client];
  for (int v = client; v != server; v = g.link(next[v]).to) p.links.push_back(next[v]);
  return p;
}

std::vector<int> reversed_topo(const NetworkGraph& g) {
  auto order = g.topological_order();
  std::reverse(order.begin(), order.end());
  return order;
}

// Cheapest per-class source rates reaching exactly `level`. Cumulative caps
// below the level, equality at it, nothing above.
std::vector<double> greedy_rates(const VideoProfile& profile, const std::vector<double>& w,
                                 int level) {
  std::vector<int> order(level + 1);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (w[a] != w[b]) return w[a] < w[b];
    return a > b;
  });
  std::vector<double> cap(level + 1);
  for (int j = 0; j <= level; ++j) cap[j] = profile.cumulative_rate(j);
  std::vector<double> s(profile.layers(), 0.0);
  for (int l : order) {
    double room = kInf;
    double prefix = 0.0;
    for (int j = 0; j <= level; ++j) {
      prefix += s[j];
      if (j >= l) room = std::min(room, cap[j] - prefix);
    }
    s[l] = std::max(0.0, room);
  }
  return s;
}

bool reaches_server(const NetworkGraph& g, int client) {
  const auto usable = usable_links(g, client);
  std::vector<double> zero(g.link_count(), 0.0);
  return !shortest_path(g, reversed_topo(g), usable, client, zero).links.empty() ||
         client == g.server();
}

double link_load_bits(const VideoProfile& profile, const std::vector<double>& z_per_class) {
  double s = 0;
  for (double z : z_per_class) s += z;
  return s * profile.exchange_bits();
}

}  // namespace

std::vector<CostViolation> validate_costs(const VideoProfile& profile,
                                          const CostVector& costs) {
  std::vector<CostViolation> out;
  if (static_cast<int>(costs.size()) != profile.layers()) {
    out.push_back({-1, "shape", static_cast<double>(costs.size()),
                   static_cast<double>(profile.layers()),
                   "cost vector has " + std::to_string(costs.size()) + " entries, expected " +
                       std::to_string(profile.layers())});
    return out;
  }
  if (!(costs[0] > 0)) {
    out.push_back({0, "positive", costs[0], 0.0, "c_0 = " + fmt(costs[0]) + " must be > 0"});
  }
  for (int l = 1; l < profile.layers(); ++l) {
    if (!(costs[l] > costs[l - 1])) {
      out.push_back({l, "monotone", costs[l], costs[l - 1],
                     "c_" + std::to_string(l) + " = " + fmt(costs[l]) + " must exceed c_" +
                         std::to_string(l - 1) + " = " + fmt(costs[l - 1])});
    }
    const double bound =
        (profile.quality[l] - profile.quality[l - 1]) / profile.cumulative_rate(l);
    if (!(costs[l] < bound)) {
      out.push_back({l, "quality-gain", costs[l], bound,
                     "c_" + std::to_string(l) + " = " + fmt(costs[l]) +
                         " must be below (q_" + std::to_string(l) + " - q_" +
                         std::to_string(l - 1) + ") / cumulative rate = " + fmt(bound)});
    }
  }
  return out;
}

int decodable_layer(const VideoProfile& profile, const std::vector<double>& rates) {
  int best = -1;
  double cum = 0.0;
  for (int l = 0; l < profile.layers(); ++l) {
    cum += l < static_cast<int>(rates.size()) ? rates[l] : 0.0;
    const double need = profile.cumulative_rate(l);
    if (cum >= need - 1e-9 * need) best = l;
  }
  return best;
}

double quality(const VideoProfile& profile, const std::vector<double>& rates) {
  return profile.quality_of(decodable_layer(profile, rates));
}

std::vector<bool> usable_links(const NetworkGraph& g, int client) {
  std::vector<bool> ok(g.link_count(), false);
  for (int e = 0; e < g.link_count(); ++e) {
    const auto& l = g.link(e);
    if (l.to == client) continue;
    if (g.role(l.from) == Role::kServer) continue;
    if (g.role(l.from) == Role::kClient && l.from != client) continue;
    if (g.role(l.to) == Role::kClient) continue;
    ok[e] = true;
  }
  return ok;
}

double source_rate(const NetworkGraph& g, int client, const std::vector<double>& flow) {
  double s = 0.0;
  for (int e : g.out_links(client)) s += flow[e];
  for (int e : g.in_links(client)) s -= flow[e];
  return s;
}

UserSolution solve_user_subproblem(const NetworkGraph& g, int client, const ClassFlows& mu,
                                   const VideoProfile& profile, const CostVector& costs,
                                   int num_clients) {
  check_costs_shape(profile, costs);
  const int L = profile.layers();
  const auto usable = usable_links(g, client);
  const auto rtopo = reversed_topo(g);

  std::vector<Path> paths(L);
  std::vector<double> w(L);
  for (int l = 0; l < L; ++l) {
    paths[l] = shortest_path(g, rtopo, usable, client, mu[l]);
    if (paths[l].links.empty()) throw NoPathToServer(client);
    w[l] = costs[l] / num_clients + paths[l].length;
  }

  UserSolution best;
  best.source_rates.assign(L, 0.0);
  for (int k = 0; k < L; ++k) {
    auto s = greedy_rates(profile, w, k);
    double value = profile.quality[k] / num_clients;
    for (int l = 0; l <= k; ++l) value -= w[l] * s[l];
    if (value >= best.value - 1e-12) {
      best.level = k;
      best.value = value;
      best.source_rates = s;
    }
  }
  best.flows.assign(L, std::vector<double>(g.link_count(), 0.0));
  for (int l = 0; l < L; ++l) {
    if (best.source_rates[l] <= 0) continue;
    for (int e : paths[l].links) best.flows[l][e] = best.source_rates[l];
  }
  return best;
}

UserSolution solve_user_subproblem_lp(const NetworkGraph& g, int client, const ClassFlows& mu,
                                      const VideoProfile& profile, const CostVector& costs,
                                      int num_clients) {
  check_costs_shape(profile, costs);
  if (!reaches_server(g, client)) throw NoPathToServer(client);
  const int L = profile.layers();
  const int E = g.link_count();
  const int server = g.server();
  const auto usable = usable_links(g, client);

  UserSolution best;
  best.source_rates.assign(L, 0.0);
  best.flows.assign(L, std::vector<double>(E, 0.0));
  for (int k = 0; k < L; ++k) {
    lp::Problem p;
    std::vector<std::vector<int>> var(L, std::vector<int>(E, -1));
    for (int l = 0; l <= k; ++l) {
      for (int e = 0; e < E; ++e) {
        if (!usable[e]) continue;
        double obj = -mu[l][e];
        if (g.link(e).from == client) obj -= costs[l] / num_clients;
        var[l][e] = p.add_var(obj);
      }
    }
    for (int l = 0; l <= k; ++l) {
      for (int v = 0; v < g.node_count(); ++v) {
        if (v == server || v == client) continue;
        std::vector<std::pair<int, double>> terms;
        for (int e : g.out_links(v)) {
          if (var[l][e] >= 0) terms.push_back({var[l][e], 1.0});
        }
        for (int e : g.in_links(v)) {
          if (var[l][e] >= 0) terms.push_back({var[l][e], -1.0});
        }
        if (!terms.empty()) p.add(std::move(terms), lp::Sense::kEqual, 0.0);
      }
    }
    for (int j = 0; j <= k; ++j) {
      std::vector<std::pair<int, double>> terms;
      for (int l = 0; l <= j; ++l) {
        for (int e : g.out_links(client)) {
          if (var[l][e] >= 0) terms.push_back({var[l][e], 1.0});
        }
      }
      p.add(std::move(terms), j == k ? lp::Sense::kEqual : lp::Sense::kLessEqual,
            profile.cumulative_rate(j));
    }
    const auto sol = lp::maximize(p);
    if (sol.status != lp::Status::kOptimal) continue;
    const double value = profile.quality[k] / num_clients + sol.objective;
    if (value >= best.value - 1e-9) {
      best.level = k;
      best.value = value;
      best.source_rates.assign(L, 0.0);
      for (auto& row : best.flows) std::fill(row.begin(), row.end(), 0.0);
      for (int l = 0; l <= k; ++l) {
        for (int e = 0; e < E; ++e) {
          if (var[l][e] >= 0) best.flows[l][e] = sol.x[var[l][e]];
        }
        best.source_rates[l] = source_rate(g, client, best.flows[l]);
      }
    }
  }
  return best;
}

std::vector<double> solve_link_subproblem(const std::vector<double>& weights,
                                          double bandwidth, const VideoProfile& profile) {
  std::vector<double> x(weights.size(), 0.0);
  int arg = -1;
  double best = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l] > best) {
      best = weights[l];
      arg = static_cast<int>(l);
    }
  }
  if (arg >= 0) x[arg] = bandwidth / profile.exchange_bits();
  return x;
}

DualState::DualState(int clients, int classes, int links, StepParams s, double mu0)
    : mu(clients, ClassFlows(classes, std::vector<double>(links, mu0))),
      r_hat(clients, ClassFlows(classes, std::vector<double>(links, 0.0))),
      x_hat(classes, std::vector<double>(links, 0.0)),
      step(s) {}

void subgradient_step(DualState& st, const Flows& r, const std::vector<std::vector<double>>& x,
                      bool average) {
  st.t += 1;
  const double theta = st.theta(st.t);
  if (average) st.samples += 1;
  const int n = std::max(st.samples, 1);
  const double keep = average ? static_cast<double>(n - 1) / n : 1.0;
  const double take = average ? 1.0 / n : 0.0;
  for (std::size_t u = 0; u < st.mu.size(); ++u) {
    for (std::size_t l = 0; l < st.mu[u].size(); ++l) {
      auto& mu = st.mu[u][l];
      auto& avg = st.r_hat[u][l];
      const auto& ru = r[u][l];
      const auto& xl = x[l];
      for (std::size_t e = 0; e < mu.size(); ++e) {
        mu[e] = std::max(0.0, mu[e] + theta * (ru[e] - xl[e]));
        avg[e] = keep * avg[e] + take * ru[e];
      }
    }
  }
  for (std::size_t l = 0; l < st.x_hat.size(); ++l) {
    for (std::size_t e = 0; e < st.x_hat[l].size(); ++e) {
      st.x_hat[l][e] = keep * st.x_hat[l][e] + take * x[l][e];
    }
  }
}

Flows restore_feasibility(const NetworkGraph& g, const VideoProfile& profile, const Flows& r) {
  Flows out = r;
  const int L = profile.layers();
  const int U = static_cast<int>(r.size());
  for (int pass = 0; pass < 1000; ++pass) {
    bool changed = false;
    for (int e = 0; e < g.link_count(); ++e) {
      std::vector<double> z(L, 0.0);
      for (int u = 0; u < U; ++u) {
        for (int l = 0; l < L; ++l) z[l] = std::max(z[l], out[u][l][e]);
      }
      const double load = link_load_bits(profile, z);
      const double bw = g.link(e).bandwidth;
      if (load <= bw * (1 + 1e-6) || load <= 0) continue;
      const double rho = bw > 0 ? load / bw : kInf;
      // Shrink every (client, class) flow above its share of the new max.
      for (int u = 0; u < U; ++u) {
        for (int l = 0; l < L; ++l) {
          const double target = z[l] / rho;
          const double here = out[u][l][e];
          if (here <= target) continue;
          const double factor = target / here;
          for (double& f : out[u][l]) f *= factor;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return out;
}

namespace {

struct PathShare {
  std::vector<int> links;
  double amount = 0.0;
  int count = 0;
};

std::vector<PathShare> decompose(const NetworkGraph& g, int client, std::vector<double> flow) {
  std::vector<PathShare> paths;
  const int server = g.server();
  for (int guard = 0; guard < 4 * g.link_count() + 4; ++guard) {
    double out = 0.0;
    for (int e : g.out_links(client)) out += flow[e];
    if (out <= 1e-9) break;
    PathShare p;
    double bottleneck = kInf;
    int v = client;
    while (v != server) {
      int pick = -1;
      for (int e : g.out_links(v)) {
        if (flow[e] > 1e-12 && (pick < 0 || flow[e] > flow[pick])) pick = e;
      }
      if (pick < 0) break;
      p.links.push_back(pick);
      bottleneck = std::min(bottleneck, flow[pick]);
      v = g.link(pick).to;
    }
    if (v != server || p.links.empty()) break;
    for (int e : p.links) flow[e] -= bottleneck;
    p.amount = bottleneck;
    paths.push_back(std::move(p));
  }
  return paths;
}

void apportion(std::vector<PathShare>& paths, int total) {
  double sum = 0.0;
  for (const auto& p : paths) sum += p.amount;
  if (paths.empty() || sum <= 0) return;
  int given = 0;
  std::vector<std::pair<double, int>> rem;
  for (int i = 0; i < static_cast<int>(paths.size()); ++i) {
    const double exact = total * paths[i].amount / sum;
    paths[i].count = static_cast<int>(std::floor(exact));
    given += paths[i].count;
    rem.push_back({exact - paths[i].count, i});
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; given < total; ++i, ++given) paths[rem[i % rem.size()].second].count++;
}

}  // namespace

IntegerPlan integerize(const NetworkGraph& g, const VideoProfile& profile,
                       const CostVector& costs, const std::vector<int>& clients,
                       const Flows& r, double level_tolerance) {
  const int U = static_cast<int>(clients.size());
  const int L = profile.layers();
  const int E = g.link_count();
  const double T = profile.gen_duration;
  const auto rtopo = reversed_topo(g);

  // Path shapes per (client, class), taken from the recovered flows. A class
  // that carries nothing borrows the nearest class that does, or the
  // lowest-delay route.
  std::vector<std::vector<std::vector<PathShare>>> shape(U, std::vector<std::vector<PathShare>>(L));
  std::vector<int> by_class(U, -1);
  std::vector<int> by_total(U, -1);
  for (int u = 0; u < U; ++u) {
    std::vector<double> s(L);
    for (int l = 0; l < L; ++l) {
      s[l] = std::max(0.0, source_rate(g, clients[u], r[u][l]));
      shape[u][l] = decompose(g, clients[u], r[u][l]);
    }
    double cum = 0.0;
    double total = 0.0;
    for (int l = 0; l < L; ++l) total += s[l];
    for (int l = 0; l < L; ++l) {
      cum += s[l];
      const double need = (1 - level_tolerance) * profile.cumulative_rate(l);
      if (cum >= need) by_class[u] = l;
      if (total >= need) by_total[u] = l;
    }
    by_total[u] = std::max(by_total[u], by_class[u]);
    std::vector<double> delay(E);
    for (int e = 0; e < E; ++e) delay[e] = g.link(e).delay;
    const auto fallback = shortest_path(g, rtopo, usable_links(g, clients[u]), clients[u], delay);
    const auto own = shape[u];
    for (int l = 0; l < L; ++l) {
      if (!shape[u][l].empty()) continue;
      for (int d = 1; d < L && shape[u][l].empty(); ++d) {
        if (l - d >= 0 && !own[l - d].empty()) shape[u][l] = own[l - d];
        else if (l + d < L && !own[l + d].empty()) shape[u][l] = own[l + d];
      }
      if (shape[u][l].empty() && !fallback.links.empty()) {
        shape[u][l].push_back({fallback.links, 1.0, 0});
      }
    }
  }

  auto plan_from = [&](std::vector<int> target) {
    IntegerPlan plan;
    std::vector<std::vector<std::vector<PathShare>>> paths;
    // Rounded cumulative counts below the level, exactly the cumulative
    // generation size at it, nothing above.
    auto assign = [&](int u) {
      paths[u] = shape[u];
      int prev = 0;
      double cum = 0.0;
      for (int l = 0; l < L; ++l) {
        int n = 0;
        if (l <= target[u]) {
          cum += std::max(0.0, source_rate(g, clients[u], r[u][l])) * T;
          int N = l == target[u]
                      ? profile.beta(l)
                      : std::clamp(static_cast<int>(std::llround(cum)), prev, profile.beta(l));
          n = N - prev;
          prev = N;
        }
        plan.counts[u][l] = n;
        for (auto& p : paths[u][l]) p.count = 0;
        apportion(paths[u][l], n);
      }
    };
    auto rebuild = [&] {
      plan.r.assign(U, std::vector<std::vector<int>>(L, std::vector<int>(E, 0)));
      plan.z.assign(L, std::vector<int>(E, 0));
      for (int u = 0; u < U; ++u) {
        for (int l = 0; l < L; ++l) {
          for (const auto& p : paths[u][l]) {
            for (int e : p.links) plan.r[u][l][e] += p.count;
          }
          for (int e = 0; e < E; ++e) plan.z[l][e] = std::max(plan.z[l][e], plan.r[u][l][e]);
        }
      }
    };

    plan.counts.assign(U, std::vector<int>(L, 0));
    paths.assign(U, {});
    for (int u = 0; u < U; ++u) assign(u);
    rebuild();

    // A link the whole-packet plan overfills costs the most ambitious client
    // crossing it one level, until everything fits.
    const double bits = profile.exchange_bits();
    for (bool fixed = false; !fixed;) {
      fixed = true;
      for (int e = 0; e < E && fixed; ++e) {
        int packets = 0;
        for (int l = 0; l < L; ++l) packets += plan.z[l][e];
        if (packets * bits <= g.link(e).bandwidth * T * (1 + 1e-9)) continue;
        int victim = -1;
        for (int u = 0; u < U; ++u) {
          bool crosses = false;
          for (int l = 0; l < L; ++l) crosses = crosses || plan.r[u][l][e] > 0;
          if (crosses && (victim < 0 || target[u] >= target[victim])) victim = u;
        }
        if (victim < 0) continue;
        --target[victim];
        assign(victim);
        rebuild();
        fixed = false;
      }
    }

    plan.level = target;
    plan.objective = 0.0;
    for (int u = 0; u < U; ++u) {
      double cost = 0.0;
      for (int l = 0; l < L; ++l) cost += costs[l] * plan.counts[u][l] / T;
      plan.objective += profile.quality_of(plan.level[u]) - cost;
    }
    if (U > 0) plan.objective /= U;
    return plan;
  };

  auto plan = plan_from(by_class);
  if (by_total != by_class) {
    auto alt = plan_from(by_total);
    if (alt.objective > plan.objective + 1e-12) plan = std::move(alt);
  }
  return plan;
}

int RateAllocation::client_index(int node) const {
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i] == node) return static_cast<int>(i);
  }
  return -1;
}

RateAllocation optimize(const NetworkGraph& g, const VideoProfile& profile,
                        const CostVector& costs, const OptimizerParams& params) {
  profile.validate();
  g.validate();
  check_costs_shape(profile, costs);

  RateAllocation out;
  out.clients = g.clients();
  if (out.clients.empty()) throw Infeasible("topology has no clients");
  for (int c : out.clients) {
    if (!reaches_server(g, c)) throw NoPathToServer(c);
  }
  const int U = static_cast<int>(out.clients.size());
  const int L = profile.layers();
  const int E = g.link_count();

  DualState st(U, L, E, params.step, params.mu0);
  Flows r(U);
  std::vector<std::vector<double>> x(L, std::vector<double>(E, 0.0));
  double best_dual = kInf;

  for (int iter = 1; iter <= params.warmup + params.max_iter; ++iter) {
    const bool warm = iter <= params.warmup;
    double dual = 0.0;
    for (int u = 0; u < U; ++u) {
      auto sol = solve_user_subproblem(g, out.clients[u], st.mu[u], profile, costs, U);
      dual += sol.value;
      r[u] = std::move(sol.flows);
    }
    std::vector<double> w(L);
    for (int e = 0; e < E; ++e) {
      for (int l = 0; l < L; ++l) {
        w[l] = 0.0;
        for (int u = 0; u < U; ++u) w[l] += st.mu[u][l][e];
      }
      const auto xe = solve_link_subproblem(w, g.link(e).bandwidth, profile);
      for (int l = 0; l < L; ++l) {
        x[l][e] = xe[l];
        dual += w[l] * xe[l];
      }
    }
    best_dual = std::min(best_dual, dual);
    subgradient_step(st, r, x, !warm);
    if (warm) continue;

    const auto plan = integerize(g, profile, costs, out.clients, st.r_hat);

    TraceRow row;
    row.iter = iter;
    row.dual = dual;
    row.primal = plan.objective;
    row.source.assign(U, std::vector<double>(L, 0.0));
    for (int u = 0; u < U; ++u) {
      for (int l = 0; l < L; ++l) {
        row.source[u][l] = source_rate(g, out.clients[u], st.r_hat[u][l]);
      }
    }
    out.trace.push_back(std::move(row));
    out.iterations = iter;

    const double gap = (best_dual - plan.objective) / std::max(std::abs(best_dual), 1e-12);
    if (gap <= params.tol) break;
  }

  out.dual_bound = best_dual;
  out.r_raw = st.r_hat;
  out.x_hat = st.x_hat;
  out.r_hat = restore_feasibility(g, profile, st.r_hat);
  out.plan = integerize(g, profile, costs, out.clients, out.r_raw);
  return out;
}

}  // namespace ncndn::optimizer
