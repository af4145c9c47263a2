#pragma once

// Experiment pipeline behind the command-line tool: configuration checks,
// optimizer runs with their CSV reports, and the seeded simulation sweep.

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "ncndn/config.hpp"
#include "ncndn/optimizer.hpp"
#include "ncndn/sim.hpp"

namespace ncndn::experiment {

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Topology, roles, reachability and cost-vector checks. Parsing problems are
// reported as failed checks rather than thrown.
std::vector<Check> validate(const config::ExperimentConfig& cfg);

// Topology file rescaled from the nominal to the given link bandwidth.
NetworkGraph topology_at(const config::ExperimentConfig& cfg, double bandwidth);

optimizer::RateAllocation allocate(const config::ExperimentConfig& cfg, const NetworkGraph& g);

// kind,link_from,link_to,class,user,rate_pps
//   flow      restored recovered rate of a client's class on a link
//   plan      whole Interests per generation of that flow
//   actual    aggregated per-link class rate (user -1)
//   interests Interests per generation a client issues for a class (link -1)
void write_allocation(std::ostream& os, const NetworkGraph& g,
                      const optimizer::RateAllocation& a, const prlnc::VideoProfile& profile);
// client,class,recovered_pps,restored_pps,interests_per_gen,level,exp_psnr
void write_recovered(std::ostream& os, const NetworkGraph& g,
                     const optimizer::RateAllocation& a, const prlnc::VideoProfile& profile);
// iter,dual,primal,client,class,rate_pps
void write_convergence(std::ostream& os, const optimizer::RateAllocation& a);

struct ClientPoint {
  int client = 0;
  double ub = 0.0;
  double exp = 0.0;
  double sim = 0.0;                 // mean over runs
  std::vector<double> per_gen;      // mean over runs
  long non_innovative = 0;
  long excess = 0;
  long identical = 0;
};

struct LinkPoint {
  int from = 0;
  int to = 0;
  double capacity = 0.0;
  double interest_bps = 0.0;
  double data_bps = 0.0;
  double utilization = 0.0;
  double peak_window_bits = 0.0;   // max over runs
};

struct SweepPoint {
  double bandwidth = 0.0;
  std::vector<ClientPoint> clients;
  std::vector<LinkPoint> links;
  int runs = 0;
};

struct SweepOptions {
  std::uint64_t seed = 1;
  int runs = 1;
  std::vector<double> bandwidths;
  double trace_bandwidth = -1.0;   // first run at this point writes `trace`
  std::ostream* trace = nullptr;
  // Called after every finished simulation run (bandwidth, run, report).
  std::function<void(double, int, const sim::Report&)> on_run;
};

// Seed of run k: derived from the base seed, independent of the bandwidth.
std::uint64_t run_seed(std::uint64_t base, int run);

std::vector<SweepPoint> sweep(const config::ExperimentConfig& cfg, const SweepOptions& opt);

// client,bandwidth,UB,EXP,SIM
void write_psnr_vs_bandwidth(std::ostream& os, const std::vector<SweepPoint>& pts);
// client,bandwidth,generation,psnr
void write_psnr_vs_time(std::ostream& os, const std::vector<SweepPoint>& pts);
// bandwidth,from,to,capacity_bps,interest_bps,data_bps,utilization,peak_window_bits
void write_link_util(std::ostream& os, const std::vector<SweepPoint>& pts);
// bandwidth,client,runs,non_innovative,excess,identical
void write_delivery_stats(std::ostream& os, const std::vector<SweepPoint>& pts);
void write_gnuplot(std::ostream& os, const std::vector<SweepPoint>& pts);

struct RunOptions {
  std::filesystem::path out;
  std::uint64_t seed = 1;
  double bandwidth_scale = 1.0;
  bool exact_bloom = false;
};

// Each returns the files written. Throw config / optimizer errors and
// std::ios_base::failure on I/O problems.
std::vector<std::filesystem::path> cmd_optimize(const config::ExperimentConfig& cfg,
                                                const RunOptions& opt);
std::vector<std::filesystem::path> cmd_simulate(const config::ExperimentConfig& cfg,
                                                const RunOptions& opt);
// Convergence at the low and high bandwidths, the allocation at the nominal
// bandwidth, then the whole simulation sweep.
std::vector<std::filesystem::path> cmd_reproduce(const config::ExperimentConfig& cfg,
                                                 const RunOptions& opt);

}  // namespace ncndn::experiment
