#pragma once

// Network-coding-aware NDN node: names, Bloom filters of client ids, the
// modified PIT/CS/FIB and the lookup procedures that use them.
//
// A content name identifies a (class, generation) pair, i.e. a whole family of
// interchangeable coded packets. Bloom filters carried by Interests and Data
// say which clients a message is useful for, so that two Interests with the
// same name are only merged when no client would be served twice.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ncndn/graph.hpp"
#include "ncndn/optimizer.hpp"
#include "ncndn/prlnc.hpp"
#include "ncndn/random.hpp"

namespace ncndn::protocol {

class MalformedName : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// /<prefix...>/<nc flag>/<packet id>/<generation>
struct ContentName {
  std::vector<std::string> prefix{"video"};
  bool coded = true;
  int packet_id = 0;  // class when coded, sequence number otherwise
  std::uint32_t generation = 0;

  std::string str() const;
  // `layers` > 0 also checks that a coded packet id names an existing class.
  static ContentName parse(std::string_view text, int layers = 0);

  friend auto operator<=>(const ContentName&, const ContentName&) = default;
  friend bool operator==(const ContentName&, const ContentName&) = default;
};

ContentName coded_name(int cls, std::uint32_t generation);

struct BloomParams {
  int bits = 128;
  int hashes = 4;
  std::uint64_t seed1 = 0x5bd1e995ULL;
  std::uint64_t seed2 = 0xc2b2ae35ULL;
  bool exact = false;  // back the filter by the explicit id set
};

class BloomFilter {
 public:
  BloomFilter() : BloomFilter(BloomParams{}) {}
  explicit BloomFilter(const BloomParams& params);

  void insert(int id);
  bool contains(int id) const;
  void unite(const BloomFilter& other);
  bool empty() const;
  std::string hex() const;
  // Clients of `roster` that test positive.
  std::vector<int> members(const std::vector<int>& roster) const;

  friend bool operator==(const BloomFilter& a, const BloomFilter& b) {
    return a.words_ == b.words_ && a.ids_ == b.ids_;
  }

 private:
  // Calls f(bit) for each of the id's bit positions until f returns false.
  template <typename F>
  void for_each_position(int id, F&& f) const;

  BloomParams params_;
  std::vector<std::uint64_t> words_;
  std::vector<int> ids_;  // exact mode only, sorted
};

struct Interest {
  ContentName name;
  BloomFilter bf;
  std::uint64_t nonce = 0;
  double sent_at = 0.0;
};

struct Data {
  ContentName name;
  BloomFilter bf;
  prlnc::CodedPacket packet;
  double expiry = 0.0;
};

struct PitEntry {
  std::vector<std::pair<int, BloomFilter>> requesters;  // (face, filter)
  BloomFilter union_bf() const;
};

struct CsEntry {
  Data data;
  BloomFilter sent;
};

struct FibEntry {
  std::vector<std::pair<int, int>> faces;  // (face, remaining counter)
};

using Roster = std::vector<int>;

// First pending entry none of whose requesters already include a client of
// `bf`, or -1.
int pit_lookup_interest(const BloomFilter& bf, const std::vector<PitEntry>& pending,
                        const Roster& roster);

struct CsMatch {
  bool exists = false;
  std::vector<int> entries;  // ascending CS positions
};

// Every client of `bf` needs a stored object that names it and has not yet
// been sent to it.
CsMatch cs_lookup(const BloomFilter& bf, const std::vector<CsEntry>& stored, const Roster& roster);

// Marks each client of `bf` as served by the first matched entry that could
// serve it.
void cs_update(const BloomFilter& bf, const std::vector<int>& entries,
               std::vector<CsEntry>& stored, const Roster& roster);

struct DataMatch {
  bool found = false;
  int pending = -1;
  std::vector<int> entries;
};

// First pending Interest the stored objects can satisfy.
DataMatch pit_lookup_data(const std::vector<PitEntry>& pending, const std::vector<CsEntry>& stored,
                          const Roster& roster);

// Filter for the Interest that takes a face's counter from `counter` to
// counter - 1, given the integer actual rate z and each client's conceptual
// rate on that link.
BloomFilter build_bloom(int counter, int z, const std::vector<std::pair<int, int>>& rates,
                        const BloomParams& params);

// One line per protocol action: time node action name bf-hex [detail].
class TraceLog {
 public:
  explicit TraceLog(std::ostream* out = nullptr) : out_(out) {}
  bool enabled() const { return out_ != nullptr; }
  void record(double time, int node, std::string_view action, const ContentName& name,
              const BloomFilter& bf, std::string_view detail = {});

 private:
  std::ostream* out_;
};

inline constexpr int kAppFace = -1;

struct Outgoing {
  int face = kAppFace;  // link index, or kAppFace for local delivery
  std::variant<Interest, Data> message;
};

// Read-only deployment data shared by every node of a run.
struct Deployment {
  const NetworkGraph* graph = nullptr;
  const prlnc::VideoProfile* profile = nullptr;
  const optimizer::IntegerPlan* plan = nullptr;
  Roster clients;  // plan client order
  BloomParams bloom;
  int window = 4;
  double playback_delay = 1.0;
  int codec_payload = 16;
  std::uint64_t content_seed = 0;
};

struct NodeCounters {
  long interests_in = 0;
  long aggregated = 0;
  long forwarded = 0;
  long cs_hits = 0;
  long pit_inserts = 0;
  long data_in = 0;
  long expired = 0;
  long duplicates = 0;
  long non_innovative = 0;
  long data_out = 0;
};

class Node {
 public:
  Node(int id, const Deployment& deployment, std::uint64_t seed, TraceLog* trace = nullptr);

  int id() const { return id_; }
  Role role() const { return role_; }

  // The PIT, FIB, CS lookup order; the server answers every Interest itself.
  std::vector<Outgoing> on_interest(const Interest& interest, int face, double now);
  std::vector<Outgoing> on_data(const Data& data, int face, double now);

  // FIB entries for every class of generation g, counters from the plan.
  void open_generation(std::uint32_t g);
  // Drops all state for generation g.
  void close_generation(std::uint32_t g);

  const std::vector<PitEntry>& pit(const ContentName& name) const;
  const std::vector<CsEntry>& cs(const ContentName& name) const;
  const FibEntry* fib(const ContentName& name) const;
  const NodeCounters& counters() const { return counters_; }

 private:
  void serve_from_server(const Interest& interest, int face, double now,
                         std::vector<Outgoing>& out);
  prlnc::CodedPacket recode_all(const std::vector<CsEntry>& stored, int cls, std::uint32_t g);
  // Redraws (a bounded number of times) until the packet is innovative for
  // every client of `bf`, judged by what this node already sent them.
  prlnc::CodedPacket draw_for(const ContentName& name, const BloomFilter& bf,
                              const std::function<prlnc::CodedPacket()>& draw);
  double expiry_of(std::uint32_t g) const;
  void trace(double now, std::string_view action, const ContentName& name, const BloomFilter& bf,
             std::string_view detail = {});

  int id_;
  Role role_;
  const Deployment& dep_;
  Rng rng_;
  TraceLog* trace_;
  NodeCounters counters_;

  std::map<ContentName, std::vector<PitEntry>> pit_;
  std::map<ContentName, std::vector<CsEntry>> cs_;
  std::map<ContentName, FibEntry> fib_;
  std::map<std::uint32_t, prlnc::DecoderState> rank_;
  std::map<ContentName, std::map<int, prlnc::DecoderState>> sent_;  // per client
  std::map<std::uint32_t, prlnc::Generation> produced_;  // server only
};

}  // namespace ncndn::protocol
