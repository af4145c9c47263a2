#pragma once

// Content-aware Interest rate allocation.
//
// Each client u requests class-l Interests along conceptual flows r^{u,l}
// (packets/s per Interest link). Clients interested in the same class share a
// link, so the actual rate on it is the maximum over clients rather than the
// sum. The coupling constraint x >= r is dualized and the dual is minimized by
// projected subgradient steps, with per-client and per-link subproblems solved
// in closed form at every step. Running averages of the subproblem solutions
// give the recovered primal.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncndn/graph.hpp"
#include "ncndn/prlnc.hpp"

namespace ncndn::optimizer {

using prlnc::VideoProfile;
using CostVector = std::vector<double>;

// [class][link] for one client.
using ClassFlows = std::vector<std::vector<double>>;
// [client][class][link].
using Flows = std::vector<ClassFlows>;

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoPathToServer : public Infeasible {
 public:
  explicit NoPathToServer(int client)
      : Infeasible("client " + std::to_string(client) + " has no path to the server"),
        client_(client) {}
  int client() const { return client_; }

 private:
  int client_;
};

class TooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CostViolation {
  int layer;
  std::string rule;  // "monotone", "positive" or "quality-gain"
  double value;
  double bound;
  std::string message;
};

// Empty result means the vector is admissible.
std::vector<CostViolation> validate_costs(const VideoProfile& profile,
                                          const CostVector& costs);

// Highest decodable layer for per-class rates (packets/s): the largest l whose
// cumulative rate covers the cumulative encoding rate. -1 if none.
int decodable_layer(const VideoProfile& profile, const std::vector<double>& rates);
// PSNR (dB) for per-class rates; 0 if the base layer cannot be decoded.
double quality(const VideoProfile& profile, const std::vector<double>& rates);

// Which links a client's conceptual flow may use: never into the client
// itself, never out of the server, and never through another client.
std::vector<bool> usable_links(const NetworkGraph& g, int client);

struct UserSolution {
  int level = -1;                    // chosen decodability target, -1 = none
  std::vector<double> source_rates;  // per class, packets/s
  ClassFlows flows;                  // [class][link]
  double value = 0.0;                // (q - c.s)/U - sum(mu * r)
};

// Closed form: shortest paths under mu, then a greedy over the nested
// cumulative caps. Throws NoPathToServer.
UserSolution solve_user_subproblem(const NetworkGraph& g, int client,
                                   const ClassFlows& mu, const VideoProfile& profile,
                                   const CostVector& costs, int num_clients);
// Same subproblem through a generic LP per level. Used to cross-check.
UserSolution solve_user_subproblem_lp(const NetworkGraph& g, int client,
                                      const ClassFlows& mu, const VideoProfile& profile,
                                      const CostVector& costs, int num_clients);

// All of the link budget goes to the class with the largest weight; ties go to
// the lowest class; all-zero weights yield no rate.
std::vector<double> solve_link_subproblem(const std::vector<double>& weights,
                                          double bandwidth, const VideoProfile& profile);

// Multipliers live on the scale of c_l / U (around 1e-3), so the step has to
// be small from the first iteration on.
struct StepParams {
  double a = 1e-3;
  double b = 1.0;
  double c = 1.0;
};

struct DualState {
  Flows mu;                                 // [client][class][link]
  Flows r_hat;                              // running average of r[t]
  std::vector<std::vector<double>> x_hat;   // [class][link]
  StepParams step;
  int t = 0;        // step counter, drives theta
  int samples = 0;  // iterations folded into the averages

  DualState() = default;
  DualState(int clients, int classes, int links, StepParams step, double mu0 = 0.0);
  double theta(int iteration) const { return step.a / (step.b + step.c * iteration); }
};

// mu <- max(0, mu + theta(t) (r - x)), then the 1/t running averages.
// With average = false only the multipliers move.
void subgradient_step(DualState& state, const Flows& r,
                      const std::vector<std::vector<double>>& x, bool average = true);

struct OptimizerParams {
  StepParams step;
  int max_iter = 2000;
  double tol = 1e-3;
  double mu0 = 0.0;
  // Multiplier-only iterations before averaging starts, so the running
  // averages do not carry the initial transient.
  int warmup = 200;
};

struct TraceRow {
  int iter = 0;
  double dual = 0.0;
  double primal = 0.0;
  std::vector<std::vector<double>> source;  // [client][class] recovered rate
};

// Integer per-generation plan derived from a (restored) recovered primal.
struct IntegerPlan {
  std::vector<std::vector<std::vector<int>>> r;  // [client][class][link]
  std::vector<std::vector<int>> z;               // [class][link], max over clients
  std::vector<std::vector<int>> counts;          // [client][class] Interests per generation
  std::vector<int> level;                        // [client], -1 = none
  double objective = 0.0;
};

struct RateAllocation {
  std::vector<int> clients;  // node ids, index = client index
  Flows r_raw;               // recovered averages before restoration
  Flows r_hat;               // after feasibility restoration
  std::vector<std::vector<double>> x_hat;
  IntegerPlan plan;
  std::vector<TraceRow> trace;
  double dual_bound = 0.0;
  int iterations = 0;

  double objective() const { return plan.objective; }
  int client_index(int node) const;
};

// Scales any client flow crossing an over-subscribed link so that every link
// fits its bandwidth (relative tolerance 1e-6). Keeps flow conservation.
Flows restore_feasibility(const NetworkGraph& g, const VideoProfile& profile,
                          const Flows& r);

// Whole Interests per generation from recovered flows. Each client aims at the
// highest level its cumulative rate reaches within `level_tolerance`, asks
// for exactly that level's generation size, and drops a level whenever the
// rounded plan overfills a link. A second plan starts each client from the
// level its total rate over all classes reaches; the better of the two wins.
IntegerPlan integerize(const NetworkGraph& g, const VideoProfile& profile,
                       const CostVector& costs, const std::vector<int>& clients,
                       const Flows& r, double level_tolerance = 0.02);

// Throws Infeasible / NoPathToServer.
RateAllocation optimize(const NetworkGraph& g, const VideoProfile& profile,
                        const CostVector& costs, const OptimizerParams& params = {});

struct OracleResult {
  double objective = 0.0;
  std::vector<int> level;  // [client]
  Flows flows;             // [client][class][link]
};

// Exact optimum by enumerating every client's level and solving the remaining
// linear program. Throws TooLarge beyond 3 clients, 3 layers or 20 links.
OracleResult oracle_solve(const NetworkGraph& g, const VideoProfile& profile,
                          const CostVector& costs);

// Source rate (packets/s) of one class flow: net outflow at the client.
double source_rate(const NetworkGraph& g, int client, const std::vector<double>& flow);

}  // namespace ncndn::optimizer
