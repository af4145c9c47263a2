#pragma once

// Experiment configuration (INI) and topology records.
//
// Topology files hold one record per line:
//   node,<id>,<server|intermediate|client>
//   edge,<i>,<j>,<bandwidth bps>,<delay s>
// where i -> j is the Interest direction (toward the server). Blank lines and
// lines starting with '#' are ignored. Node ids must be dense from 0.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncndn/graph.hpp"
#include "ncndn/optimizer.hpp"
#include "ncndn/prlnc.hpp"

namespace ncndn::config {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ConfigInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

NetworkGraph parse_topology_text(const std::string& text, const std::string& source = "<text>");
NetworkGraph parse_topology(const std::filesystem::path& path);
std::string write_topology(const NetworkGraph& g);

enum class LinkSharing { kShared, kStaticSplit };

struct SimParams {
  int generations = 40;
  double playback_delay = 1.0;
  int window = 4;              // generations of FIB counters kept ahead
  double max_jitter = 0.1;     // client join jitter upper bound, seconds
  int codec_payload = 16;      // bytes actually coded per packet
  LinkSharing sharing = LinkSharing::kShared;
  bool exact_bloom = false;
  int bloom_bits = 128;
  int bloom_hashes = 4;
  std::uint64_t bloom_seed1 = 0x5bd1e995ULL;
  std::uint64_t bloom_seed2 = 0xc2b2ae35ULL;
};

struct ExperimentConfig {
  std::filesystem::path source;          // the config file itself
  std::filesystem::path topology_path;
  prlnc::VideoProfile profile;
  optimizer::CostVector costs;
  optimizer::OptimizerParams optimizer;
  SimParams sim;
  std::uint64_t seed = 1;
  int runs = 100;                        // seeds per bandwidth point
  double nominal_bandwidth = 480000.0;   // bandwidth the topology file is written at
  std::vector<double> bandwidth_sweep;   // absolute link bandwidths, bps
  double trace_bandwidth = 0.0;          // point whose first run is traced; 0 = nominal
  int focus_client = -1;                 // client whose convergence is reported
  double low_bandwidth = 0.0;            // optional second optimizer run
  double high_bandwidth = 0.0;
};

// Throws ParseError / ConfigInvalid. Relative paths resolve against the
// config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace ncndn::config
