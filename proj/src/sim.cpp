#include "ncndn/sim.hpp"

#include <algorithm>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>
#include <cmath>
#include <map>
#include <queue>

#include "ncndn/protocol.hpp"
#include "ncndn/random.hpp"

namespace ncndn::sim {

LinkModel::LinkModel(const NetworkGraph& g, LinkSharing sharing, const prlnc::VideoProfile& profile)
    : g_(g),
      sharing_(sharing),
      interest_share_(static_cast<double>(profile.interest_size) /
                      (profile.interest_size + profile.payload_size)),
      window_(profile.gen_duration),
      busy_shared_(g.link_count(), 0.0),
      busy_interest_(g.link_count(), 0.0),
      busy_data_(g.link_count(), 0.0),
      interest_bits_(g.link_count(), 0.0),
      data_bits_(g.link_count(), 0.0),
      window_bits_(g.link_count()) {}

std::optional<double> LinkModel::transmit(int link, bool interest_direction, double bytes,
                                          double now) {
  const auto& l = g_.link(link);
  const double bits = 8.0 * bytes;
  double rate = l.bandwidth;
  double* busy = &busy_shared_[link];
  if (sharing_ == LinkSharing::kStaticSplit) {
    rate *= interest_direction ? interest_share_ : 1.0 - interest_share_;
    busy = interest_direction ? &busy_interest_[link] : &busy_data_[link];
  }
  if (!(rate > 0)) return std::nullopt;
  const double start = std::max(now, *busy);
  *busy = start + bits / rate;
  (interest_direction ? interest_bits_ : data_bits_)[link] += bits;
  const auto w = static_cast<std::size_t>(std::floor(start / window_));
  auto& wb = window_bits_[link];
  if (wb.size() <= w) wb.resize(w + 1, 0.0);
  wb[w] += bits;
  return *busy + l.delay;
}

double LinkModel::bits(int link, bool interest_direction) const {
  return interest_direction ? interest_bits_[link] : data_bits_[link];
}

namespace {

using protocol::Data;
using protocol::Interest;
using Message = std::variant<Interest, Data>;

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  int node;      // receiving node, or client node for Interest generation
  int face;      // arrival link
  int client;    // client index
  int cls;
  std::uint32_t gen;
  std::size_t message;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct ClientState {
  std::map<std::uint32_t, prlnc::DecoderState> decoders;
  std::map<std::uint32_t, std::vector<prlnc::CodedPacket>> received;
  std::vector<std::vector<int>> issued;     // [gen][class]
  std::vector<std::vector<int>> delivered;  // [gen][class]
};

}  // namespace

Report run(const NetworkGraph& g, const prlnc::VideoProfile& profile,
           const std::vector<int>& clients, const optimizer::IntegerPlan& plan,
           const SimParams& params, std::uint64_t seed, std::ostream* trace) {
  const int U = static_cast<int>(clients.size());
  const int L = profile.layers();
  const int G = params.generations;
  const double T = profile.gen_duration;

  protocol::Deployment dep;
  dep.graph = &g;
  dep.profile = &profile;
  dep.plan = &plan;
  dep.clients = clients;
  dep.bloom.bits = params.bloom_bits;
  dep.bloom.hashes = params.bloom_hashes;
  dep.bloom.seed1 = params.bloom_seed1;
  dep.bloom.seed2 = params.bloom_seed2;
  dep.bloom.exact = params.exact_bloom;
  dep.window = params.window;
  dep.playback_delay = params.playback_delay;
  dep.codec_payload = params.codec_payload;
  dep.content_seed = Rng::derive(seed, 0xC0DE);

  protocol::TraceLog log(trace);
  std::vector<protocol::Node> nodes;
  nodes.reserve(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) {
    nodes.emplace_back(v, dep, Rng::derive(seed, static_cast<std::uint64_t>(v)), &log);
  }
  std::vector<int> client_of(g.node_count(), -1);
  for (int u = 0; u < U; ++u) client_of[clients[u]] = u;

  LinkModel links(g, params.sharing, profile);
  std::priority_queue<Event, std::vector<Event>, Later> queue;
  std::uint64_t seq = 0;
  std::vector<Message> pool;
  std::vector<std::size_t> free_slots;
  auto push = [&](Event e) {
    e.seq = seq++;
    queue.push(e);
  };

  std::vector<ClientState> state(U);
  Report report;
  report.clients.resize(U);
  for (int u = 0; u < U; ++u) {
    state[u].issued.assign(G, std::vector<int>(L, 0));
    state[u].delivered.assign(G, std::vector<int>(L, 0));
    report.clients[u].node = clients[u];
    report.clients[u].layer.assign(G, -1);
    report.clients[u].psnr.assign(G, 0.0);
  }

  for (auto& n : nodes) {
    for (int k = 0; k < std::min(params.window, G); ++k) n.open_generation(k);
  }
  for (int k = 0; k < G; ++k) {
    push({(k + 1) * T + params.playback_delay, 0, EventKind::kGenerationBoundary, -1, -1, -1, -1,
          static_cast<std::uint32_t>(k), 0});
  }
  for (int u = 0; u < U; ++u) {
    Rng jitter_rng(Rng::derive(Rng::derive(seed, 0x717E), static_cast<std::uint64_t>(u)));
    const double jitter = params.max_jitter * jitter_rng.uniform();
    for (int k = 0; k < G; ++k) {
      for (int l = 0; l < L; ++l) {
        const int n = plan.counts[u][l];
        for (int i = 0; i < n; ++i) {
          push({k * T + jitter + i * T / n, 0, EventKind::kInterestGeneration, clients[u], -1, u, l,
                static_cast<std::uint32_t>(k), 0});
        }
      }
    }
  }

  auto deliver = [&](int u, const Data& d, double now) {
    auto& st = state[u];
    auto& res = report.clients[u];
    const auto gen = d.name.generation;
    const int l = d.name.packet_id;
    auto it = st.decoders.find(gen);
    if (it == st.decoders.end()) it = st.decoders.emplace(gen, prlnc::DecoderState(profile, gen)).first;
    if (!it->second.absorb(d.packet)) ++res.non_innovative;
    auto& seen = st.received[gen];
    if (std::find(seen.begin(), seen.end(), d.packet) != seen.end()) ++res.identical_deliveries;
    seen.push_back(d.packet);
    ++res.delivered;
    if (gen < static_cast<std::uint32_t>(G)) {
      if (++st.delivered[gen][l] > st.issued[gen][l]) ++res.excess_deliveries;
    }
    log.record(now, clients[u], "deliver", d.name, d.bf);
  };

  auto dispatch = [&](int v, std::vector<protocol::Outgoing>&& outs, double now) {
    for (auto& o : outs) {
      if (o.face == protocol::kAppFace) {
        if (client_of[v] >= 0 && std::holds_alternative<Data>(o.message)) {
          deliver(client_of[v], std::get<Data>(o.message), now);
        }
        continue;
      }
      const auto& link = g.link(o.face);
      const bool interest = std::holds_alternative<Interest>(o.message);
      const int w = link.from == v ? link.to : link.from;
      const double bytes = interest ? profile.interest_size : profile.payload_size;
      const auto arrival = links.transmit(o.face, interest, bytes, now);
      if (!arrival) continue;
      std::size_t slot;
      if (!free_slots.empty()) {
        slot = free_slots.back();
        free_slots.pop_back();
        pool[slot] = std::move(o.message);
      } else {
        slot = pool.size();
        pool.push_back(std::move(o.message));
      }
      push({*arrival, 0, EventKind::kArrival, w, o.face, -1, -1, 0, slot});
    }
  };

  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    ++report.events;
    switch (ev.kind) {
      case EventKind::kInterestGeneration: {
        Interest in;
        in.name = protocol::coded_name(ev.cls, ev.gen);
        in.bf = protocol::BloomFilter(dep.bloom);
        in.bf.insert(ev.node);
        in.sent_at = ev.time;
        ++state[ev.client].issued[ev.gen][ev.cls];
        ++report.clients[ev.client].issued;
        log.record(ev.time, ev.node, "issue", in.name, in.bf);
        dispatch(ev.node, nodes[ev.node].on_interest(in, protocol::kAppFace, ev.time), ev.time);
        break;
      }
      case EventKind::kArrival: {
        Message m = std::move(pool[ev.message]);
        free_slots.push_back(ev.message);
        if (auto* in = std::get_if<Interest>(&m)) {
          dispatch(ev.node, nodes[ev.node].on_interest(*in, ev.face, ev.time), ev.time);
        } else {
          dispatch(ev.node, nodes[ev.node].on_data(std::get<Data>(m), ev.face, ev.time), ev.time);
        }
        break;
      }
      case EventKind::kGenerationBoundary: {
        for (int u = 0; u < U; ++u) {
          auto& st = state[u];
          auto it = st.decoders.find(ev.gen);
          const int layer = it == st.decoders.end() ? -1 : it->second.decodable_layer().value_or(-1);
          report.clients[u].layer[ev.gen] = layer;
          report.clients[u].psnr[ev.gen] = profile.quality_of(layer);
          if (it != st.decoders.end()) st.decoders.erase(it);
          st.received.erase(ev.gen);
        }
        for (auto& n : nodes) {
          n.close_generation(ev.gen);
          if (ev.gen + params.window < static_cast<std::uint32_t>(G)) {
            n.open_generation(ev.gen + params.window);
          }
        }
        break;
      }
    }
  }

  for (auto& c : report.clients) {
    double s = 0;
    for (double p : c.psnr) s += p;
    c.mean_psnr = G > 0 ? s / G : 0.0;
  }
  report.duration = G * T + params.playback_delay;
  for (int e = 0; e < g.link_count(); ++e) {
    LinkResult r;
    r.from = g.link(e).from;
    r.to = g.link(e).to;
    r.bandwidth = g.link(e).bandwidth;
    r.interest_bits = links.bits(e, true);
    r.data_bits = links.bits(e, false);
    r.utilization =
        r.bandwidth > 0 ? (r.interest_bits + r.data_bits) / (r.bandwidth * report.duration) : 0.0;
    for (double b : links.window_bits(e)) r.peak_window_bits = std::max(r.peak_window_bits, b);
    report.links.push_back(r);
  }
  return report;
}

std::vector<double> upper_bound_psnr(const NetworkGraph& g, const prlnc::VideoProfile& profile,
                                     const std::vector<int>& clients) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, double,
                      boost::property<boost::edge_residual_capacity_t, double,
                                      boost::property<boost::edge_reverse_t,
                                                      Traits::edge_descriptor>>>>;
  std::vector<double> out;
  const int server = g.server();
  for (int c : clients) {
    Graph fg(g.node_count());
    auto cap = boost::get(boost::edge_capacity, fg);
    auto rev = boost::get(boost::edge_reverse, fg);
    const auto usable = optimizer::usable_links(g, c);
    for (int e = 0; e < g.link_count(); ++e) {
      if (!usable[e]) continue;
      const auto& l = g.link(e);
      auto fwd = boost::add_edge(l.from, l.to, fg).first;
      auto bwd = boost::add_edge(l.to, l.from, fg).first;
      cap[fwd] = l.bandwidth / profile.exchange_bits();
      cap[bwd] = 0.0;
      rev[fwd] = bwd;
      rev[bwd] = fwd;
    }
    double flow = 0.0;
    if (server >= 0 && server != c) {
      flow = boost::push_relabel_max_flow(fg, static_cast<std::size_t>(c),
                                          static_cast<std::size_t>(server));
    }
    std::vector<double> rates(profile.layers(), 0.0);
    rates[0] = flow;
    out.push_back(profile.quality_of(optimizer::decodable_layer(profile, rates)));
  }
  return out;
}

}  // namespace ncndn::sim
