#pragma once

// Discrete-event simulation of one streaming session: clients issue Interests
// at the allocated per-class rates, nodes run the protocol engine, duplex
// links serialize both directions through one FIFO, and clients decode each
// generation at its playback deadline.

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "ncndn/config.hpp"
#include "ncndn/graph.hpp"
#include "ncndn/optimizer.hpp"
#include "ncndn/prlnc.hpp"

namespace ncndn::sim {

using config::LinkSharing;
using config::SimParams;

enum class EventKind { kArrival, kInterestGeneration, kGenerationBoundary };

// Serialization on duplex links. In shared mode both directions queue behind
// one busy-until clock at the full bandwidth; in split mode each direction
// owns a fixed share (Interest : Data = interest size : payload size).
class LinkModel {
 public:
  LinkModel(const NetworkGraph& g, LinkSharing sharing, const prlnc::VideoProfile& profile);

  // Arrival time at the far end, or nullopt if the link has no bandwidth in
  // that direction.
  std::optional<double> transmit(int link, bool interest_direction, double bytes, double now);

  double bits(int link, bool interest_direction) const;
  // Bits whose transmission started in window [k T, (k + 1) T).
  const std::vector<double>& window_bits(int link) const { return window_bits_[link]; }
  double window() const { return window_; }

 private:
  const NetworkGraph& g_;
  LinkSharing sharing_;
  double interest_share_;
  double window_;
  std::vector<double> busy_shared_;
  std::vector<double> busy_interest_;
  std::vector<double> busy_data_;
  std::vector<double> interest_bits_;
  std::vector<double> data_bits_;
  std::vector<std::vector<double>> window_bits_;
};

struct ClientResult {
  int node = -1;
  std::vector<int> layer;     // per generation, -1 = undecodable
  std::vector<double> psnr;   // per generation
  double mean_psnr = 0.0;
  long issued = 0;
  long delivered = 0;
  long identical_deliveries = 0;  // same coded packet handed over twice
  long excess_deliveries = 0;     // deliveries beyond the Interests issued for a (class, gen)
  long non_innovative = 0;        // deliveries that did not raise the decoder rank
};

struct LinkResult {
  int from = 0;
  int to = 0;
  double bandwidth = 0.0;
  double interest_bits = 0.0;
  double data_bits = 0.0;
  double utilization = 0.0;
  double peak_window_bits = 0.0;
};

struct Report {
  std::vector<ClientResult> clients;  // plan client order
  std::vector<LinkResult> links;
  double duration = 0.0;
  long events = 0;
};

// Runs every generation of one session. `trace` receives the protocol event
// log when non-null.
Report run(const NetworkGraph& g, const prlnc::VideoProfile& profile,
           const std::vector<int>& clients, const optimizer::IntegerPlan& plan,
           const SimParams& params, std::uint64_t seed, std::ostream* trace = nullptr);

// Per client: quality reachable with every link dedicated to that client,
// from a max-flow toward the server.
std::vector<double> upper_bound_psnr(const NetworkGraph& g, const prlnc::VideoProfile& profile,
                                     const std::vector<int>& clients);

}  // namespace ncndn::sim
