#pragma once

// Directed duplex network. Each physical link is stored once, oriented in the
// Interest direction (toward the server); Data travels the reverse way and
// both directions share the link's bandwidth.

#include <stdexcept>
#include <string>
#include <vector>

namespace ncndn {

enum class Role { kServer, kIntermediate, kClient };

const char* role_name(Role r);

struct Link {
  int from = 0;            // Interest sender
  int to = 0;              // Interest receiver, closer to the server
  double bandwidth = 0.0;  // bits/s, shared by both directions
  double delay = 0.0;      // propagation delay, seconds
};

class CycleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MultiServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NetworkGraph {
 public:
  // Node ids are dense: add_node must be called with id == node_count().
  int add_node(Role role);
  int add_link(int from, int to, double bandwidth, double delay);

  int node_count() const { return static_cast<int>(roles_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  Role role(int node) const { return roles_.at(node); }
  const Link& link(int e) const { return links_.at(e); }
  Link& link(int e) { return links_.at(e); }
  const std::vector<Link>& links() const { return links_; }

  // Link indices leaving / entering a node in the Interest direction.
  const std::vector<int>& out_links(int node) const { return out_.at(node); }
  const std::vector<int>& in_links(int node) const { return in_.at(node); }

  // -1 if there is no server; throws MultiServerError if there are several.
  int server() const;
  std::vector<int> clients() const;  // ascending id
  // Link index for the Interest-direction pair (from, to), or -1.
  int find_link(int from, int to) const;
  // Node order in which every Interest link goes forward. Throws CycleError.
  std::vector<int> topological_order() const;

  // Exactly one server, acyclic, sane bandwidths. Reachability is checked by
  // the optimizer, which knows which client is affected.
  void validate() const;

  void scale_bandwidth(double factor);

  friend bool operator==(const NetworkGraph&, const NetworkGraph&);

 private:
  std::vector<Role> roles_;
  std::vector<Link> links_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

bool operator==(const Link& a, const Link& b);

}  // namespace ncndn
