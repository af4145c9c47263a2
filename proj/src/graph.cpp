#include "ncndn/graph.hpp"

#include <cmath>

namespace ncndn {

const char* role_name(Role r) {
  switch (r) {
    case Role::kServer: return "server";
    case Role::kIntermediate: return "intermediate";
    case Role::kClient: return "client";
  }
  return "?";
}

int NetworkGraph::add_node(Role role) {
  roles_.push_back(role);
  out_.emplace_back();
  in_.emplace_back();
  return node_count() - 1;
}

int NetworkGraph::add_link(int from, int to, double bandwidth, double delay) {
  if (from < 0 || to < 0 || from >= node_count() || to >= node_count()) {
    throw std::out_of_range("link endpoint is not a node");
  }
  if (from == to) throw std::invalid_argument("self loop at node " + std::to_string(from));
  if (find_link(from, to) >= 0 || find_link(to, from) >= 0) {
    throw std::invalid_argument("duplicate link " + std::to_string(from) + "-" +
                                std::to_string(to));
  }
  links_.push_back({from, to, bandwidth, delay});
  const int e = link_count() - 1;
  out_[from].push_back(e);
  in_[to].push_back(e);
  return e;
}

int NetworkGraph::server() const {
  int s = -1;
  for (int i = 0; i < node_count(); ++i) {
    if (roles_[i] != Role::kServer) continue;
    if (s >= 0) {
      throw MultiServerError("nodes " + std::to_string(s) + " and " +
                             std::to_string(i) + " are both servers");
    }
    s = i;
  }
  return s;
}

std::vector<int> NetworkGraph::clients() const {
  std::vector<int> c;
  for (int i = 0; i < node_count(); ++i) {
    if (roles_[i] == Role::kClient) c.push_back(i);
  }
  return c;
}

int NetworkGraph::find_link(int from, int to) const {
  if (from < 0 || from >= node_count()) return -1;
  for (int e : out_[from]) {
    if (links_[e].to == to) return e;
  }
  return -1;
}

std::vector<int> NetworkGraph::topological_order() const {
  std::vector<int> indegree(node_count(), 0);
  for (const auto& l : links_) ++indegree[l.to];
  std::vector<int> order;
  order.reserve(node_count());
  for (int i = 0; i < node_count(); ++i) {
    if (indegree[i] == 0) order.push_back(i);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (int e : out_[order[k]]) {
      if (--indegree[links_[e].to] == 0) order.push_back(links_[e].to);
    }
  }
  if (static_cast<int>(order.size()) != node_count()) {
    for (int i = 0; i < node_count(); ++i) {
      if (indegree[i] > 0) {
        throw CycleError("Interest links form a cycle through node " + std::to_string(i));
      }
    }
  }
  return order;
}

void NetworkGraph::validate() const {
  if (server() < 0) throw std::invalid_argument("topology has no server");
  for (const auto& l : links_) {
    if (!std::isfinite(l.bandwidth) || l.bandwidth < 0) {
      throw std::invalid_argument("negative or non-finite bandwidth on link " +
                                  std::to_string(l.from) + "-" + std::to_string(l.to));
    }
    if (!std::isfinite(l.delay) || l.delay < 0) {
      throw std::invalid_argument("negative or non-finite delay on link " +
                                  std::to_string(l.from) + "-" + std::to_string(l.to));
    }
  }
  // The Data graph is the Interest graph reversed, so one check covers both.
  topological_order();
}

void NetworkGraph::scale_bandwidth(double factor) {
  for (auto& l : links_) l.bandwidth *= factor;
}

bool operator==(const Link& a, const Link& b) {
  return a.from == b.from && a.to == b.to && a.bandwidth == b.bandwidth &&
         a.delay == b.delay;
}

bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
  return a.roles_ == b.roles_ && a.links_ == b.links_;
}

}  // namespace ncndn
