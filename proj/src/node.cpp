#include <algorithm>

#include "ncndn/protocol.hpp"

namespace ncndn::protocol {
namespace {

const std::vector<PitEntry> kNoPit;
const std::vector<CsEntry> kNoCs;

}  // namespace

Node::Node(int id, const Deployment& deployment, std::uint64_t seed, TraceLog* trace)
    : id_(id),
      role_(deployment.graph->role(id)),
      dep_(deployment),
      rng_(seed),
      trace_(trace) {}

double Node::expiry_of(std::uint32_t g) const {
  return (g + 1) * dep_.profile->gen_duration + dep_.playback_delay;
}

void Node::trace(double now, std::string_view action, const ContentName& name,
                 const BloomFilter& bf, std::string_view detail) {
  if (trace_ && trace_->enabled()) trace_->record(now, id_, action, name, bf, detail);
}

void Node::open_generation(std::uint32_t g) {
  const auto& plan = *dep_.plan;
  for (int l = 0; l < dep_.profile->layers(); ++l) {
    FibEntry entry;
    for (int e : dep_.graph->out_links(id_)) {
      if (plan.z[l][e] > 0) entry.faces.push_back({e, plan.z[l][e]});
    }
    if (!entry.faces.empty()) fib_[coded_name(l, g)] = std::move(entry);
  }
}

void Node::close_generation(std::uint32_t g) {
  auto drop = [g](auto& table) {
    for (auto it = table.begin(); it != table.end();) {
      it = it->first.generation == g ? table.erase(it) : std::next(it);
    }
  };
  drop(pit_);
  drop(cs_);
  drop(fib_);
  drop(sent_);
  rank_.erase(g);
  produced_.erase(g);
}

const std::vector<PitEntry>& Node::pit(const ContentName& name) const {
  auto it = pit_.find(name);
  return it == pit_.end() ? kNoPit : it->second;
}

const std::vector<CsEntry>& Node::cs(const ContentName& name) const {
  auto it = cs_.find(name);
  return it == cs_.end() ? kNoCs : it->second;
}

const FibEntry* Node::fib(const ContentName& name) const {
  auto it = fib_.find(name);
  return it == fib_.end() ? nullptr : &it->second;
}

prlnc::CodedPacket Node::recode_all(const std::vector<CsEntry>& stored, int cls, std::uint32_t g) {
  std::vector<const prlnc::CodedPacket*> in;
  in.reserve(stored.size());
  for (const auto& d : stored) in.push_back(&d.data.packet);
  return prlnc::recode(*dep_.profile, in, cls, g, rng_);
}

prlnc::CodedPacket Node::draw_for(const ContentName& name, const BloomFilter& bf,
                                  const std::function<prlnc::CodedPacket()>& draw) {
  constexpr int kMaxDraws = 8;
  auto& spans = sent_[name];
  const auto clients = bf.members(dep_.clients);
  for (int u : clients) {
    if (!spans.contains(u)) spans.emplace(u, prlnc::DecoderState(*dep_.profile, name.generation));
  }
  auto packet = draw();
  for (int i = 1; i < kMaxDraws; ++i) {
    const bool fresh = std::all_of(clients.begin(), clients.end(),
                                   [&](int u) { return spans.at(u).innovative(packet); });
    if (fresh) break;
    packet = draw();
  }
  for (int u : clients) spans.at(u).absorb(packet);
  return packet;
}

void Node::serve_from_server(const Interest& interest, int face, double now,
                             std::vector<Outgoing>& out) {
  const auto g = interest.name.generation;
  auto it = produced_.find(g);
  if (it == produced_.end()) {
    it = produced_
             .emplace(g, prlnc::make_generation(*dep_.profile, g, dep_.codec_payload,
                                                dep_.playback_delay, dep_.content_seed))
             .first;
  }
  Data d;
  d.name = interest.name;
  d.bf = interest.bf;
  const auto& source = it->second;
  d.packet = draw_for(d.name, d.bf, [&] {
    return prlnc::encode(*dep_.profile, source, interest.name.packet_id, rng_);
  });
  d.expiry = it->second.deadline;
  trace(now, "produce", d.name, d.bf, "face=" + std::to_string(face));
  ++counters_.data_out;
  out.push_back({face, std::move(d)});
}

std::vector<Outgoing> Node::on_interest(const Interest& interest, int face, double now) {
  std::vector<Outgoing> out;
  ++counters_.interests_in;
  const auto& name = interest.name;

  if (!name.coded) {
    // Plain names are only answered from an exact cached copy.
    auto it = cs_.find(name);
    if (it != cs_.end() && !it->second.empty()) {
      Data d = it->second.front().data;
      d.bf = interest.bf;
      out.push_back({face, std::move(d)});
      trace(now, "cs-exact", name, interest.bf);
    } else {
      trace(now, "drop-plain", name, interest.bf);
    }
    return out;
  }
  if (name.packet_id >= dep_.profile->layers()) {
    throw MalformedName("class out of range: " + name.str());
  }
  if (now >= expiry_of(name.generation)) {
    trace(now, "drop-late", name, interest.bf);
    return out;
  }
  if (role_ == Role::kServer) {
    serve_from_server(interest, face, now, out);
    return out;
  }

  auto& pending = pit_[name];
  const int hit = pit_lookup_interest(interest.bf, pending, dep_.clients);
  if (hit >= 0) {
    pending[hit].requesters.push_back({face, interest.bf});
    ++counters_.aggregated;
    trace(now, "aggregate", name, interest.bf, "face=" + std::to_string(face));
    return out;
  }

  if (auto fit = fib_.find(name); fit != fib_.end()) {
    const int l = name.packet_id;
    const auto& plan = *dep_.plan;
    for (auto& [e, counter] : fit->second.faces) {
      if (counter == 0) continue;
      std::vector<std::pair<int, int>> rates;
      for (std::size_t u = 0; u < dep_.clients.size(); ++u) {
        rates.push_back({dep_.clients[u], plan.r[u][l][e]});
      }
      Interest fwd;
      fwd.name = name;
      fwd.bf = build_bloom(counter, plan.z[l][e], rates, dep_.bloom);
      fwd.nonce = rng_.next();
      fwd.sent_at = now;
      --counter;
      ++counters_.forwarded;
      trace(now, "forward", name, fwd.bf, "face=" + std::to_string(e));
      out.push_back({e, std::move(fwd)});
    }
    const bool spent = std::all_of(fit->second.faces.begin(), fit->second.faces.end(),
                                   [](const auto& f) { return f.second == 0; });
    if (spent) fib_.erase(fit);
    pending.push_back(PitEntry{{{face, interest.bf}}});
    return out;
  }

  auto& stored = cs_[name];
  const auto match = cs_lookup(interest.bf, stored, dep_.clients);
  if (match.exists && !stored.empty()) {
    Data d;
    d.name = name;
    d.bf = interest.bf;
    d.packet = draw_for(name, interest.bf,
                        [&] { return recode_all(stored, name.packet_id, name.generation); });
    d.expiry = stored.front().data.expiry;
    cs_update(interest.bf, match.entries, stored, dep_.clients);
    ++counters_.cs_hits;
    ++counters_.data_out;
    trace(now, "cs-hit", name, interest.bf, "face=" + std::to_string(face));
    out.push_back({face, std::move(d)});
    return out;
  }

  pending.push_back(PitEntry{{{face, interest.bf}}});
  ++counters_.pit_inserts;
  trace(now, "pit-insert", name, interest.bf, "face=" + std::to_string(face));
  return out;
}

std::vector<Outgoing> Node::on_data(const Data& data, int face, double now) {
  std::vector<Outgoing> out;
  ++counters_.data_in;
  const auto& name = data.name;
  if (now >= data.expiry) {
    ++counters_.expired;
    trace(now, "drop-expired", name, data.bf, "face=" + std::to_string(face));
    return out;
  }
  auto& stored = cs_[name];
  for (const auto& d : stored) {
    if (d.data.packet == data.packet) {
      ++counters_.duplicates;
      trace(now, "drop-duplicate", name, data.bf, "face=" + std::to_string(face));
      return out;
    }
  }
  const auto g = name.generation;
  auto rit = rank_.find(g);
  if (rit == rank_.end()) rit = rank_.emplace(g, prlnc::DecoderState(*dep_.profile, g)).first;
  const bool innovative = rit->second.absorb(data.packet);
  if (!innovative) ++counters_.non_innovative;
  stored.push_back({data, BloomFilter(dep_.bloom)});
  trace(now, innovative ? "data" : "data-redundant", name, data.bf,
        "face=" + std::to_string(face));

  auto& pending = pit_[name];
  while (true) {
    const auto m = pit_lookup_data(pending, stored, dep_.clients);
    if (!m.found) break;
    const PitEntry entry = pending[m.pending];
    pending.erase(pending.begin() + m.pending);
    const auto packet = draw_for(name, entry.union_bf(),
                                 [&] { return recode_all(stored, name.packet_id, g); });
    for (const auto& [f, bf] : entry.requesters) {
      Data d;
      d.name = name;
      d.bf = bf;
      d.packet = packet;
      d.expiry = data.expiry;
      ++counters_.data_out;
      trace(now, "send", name, bf, "face=" + std::to_string(f));
      out.push_back({f, std::move(d)});
    }
    cs_update(entry.union_bf(), m.entries, stored, dep_.clients);
  }
  return out;
}

}  // namespace ncndn::protocol
