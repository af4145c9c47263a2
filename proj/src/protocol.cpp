#include "ncndn/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace ncndn::protocol {
namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename T>
bool parse_decimal(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

std::string ContentName::str() const {
  std::string s;
  for (const auto& c : prefix) s += "/" + c;
  s += coded ? "/1/" : "/0/";
  s += std::to_string(packet_id) + "/" + std::to_string(generation);
  return s;
}

ContentName ContentName::parse(std::string_view text, int layers) {
  if (text.empty() || text.front() != '/') throw MalformedName("name must start with '/'");
  std::vector<std::string_view> parts;
  std::size_t start = 1;
  while (true) {
    const auto slash = text.find('/', start);
    parts.push_back(text.substr(start, slash == std::string_view::npos ? slash : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  if (parts.size() < 4) {
    throw MalformedName("name needs a prefix, flag, packet id and generation: " + std::string(text));
  }
  for (auto p : parts) {
    if (p.empty()) throw MalformedName("empty name component in " + std::string(text));
  }
  ContentName n;
  n.prefix.assign(parts.begin(), parts.end() - 3);
  const auto flag = parts[parts.size() - 3];
  if (flag != "0" && flag != "1") throw MalformedName("nc flag must be 0 or 1, got " + std::string(flag));
  n.coded = flag == "1";
  if (!parse_decimal(parts[parts.size() - 2], n.packet_id) || n.packet_id < 0) {
    throw MalformedName("bad packet id in " + std::string(text));
  }
  if (!parse_decimal(parts.back(), n.generation)) {
    throw MalformedName("bad generation in " + std::string(text));
  }
  if (n.coded && layers > 0 && n.packet_id >= layers) {
    throw MalformedName("class " + std::to_string(n.packet_id) + " out of range in " +
                        std::string(text));
  }
  return n;
}

ContentName coded_name(int cls, std::uint32_t generation) {
  ContentName n;
  n.packet_id = cls;
  n.generation = generation;
  return n;
}

BloomFilter::BloomFilter(const BloomParams& params)
    : params_(params), words_((params.bits + 63) / 64, 0) {
  if (params.bits < 1 || params.hashes < 1) throw std::invalid_argument("bad Bloom parameters");
}

template <typename F>
void BloomFilter::for_each_position(int id, F&& f) const {
  const auto key = static_cast<std::uint64_t>(static_cast<std::uint32_t>(id));
  const std::uint64_t h1 = mix(key ^ params_.seed1);
  const std::uint64_t h2 = mix(key ^ params_.seed2) | 1;
  const auto m = static_cast<std::uint64_t>(params_.bits);
  for (int i = 0; i < params_.hashes; ++i) {
    const auto b = static_cast<std::size_t>((h1 + static_cast<std::uint64_t>(i) * h2) % m);
    if (!f(b)) return;
  }
}

void BloomFilter::insert(int id) {
  for_each_position(id, [&](std::size_t b) {
    words_[b / 64] |= std::uint64_t{1} << (b % 64);
    return true;
  });
  if (params_.exact) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) ids_.insert(it, id);
  }
}

bool BloomFilter::contains(int id) const {
  if (params_.exact) return std::binary_search(ids_.begin(), ids_.end(), id);
  bool all = true;
  for_each_position(id, [&](std::size_t b) { return all = (words_[b / 64] >> (b % 64) & 1) != 0; });
  return all;
}

void BloomFilter::unite(const BloomFilter& other) {
  if (other.words_.size() != words_.size()) throw std::invalid_argument("Bloom size mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  if (params_.exact) {
    std::vector<int> merged;
    std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                   std::back_inserter(merged));
    ids_ = std::move(merged);
  }
}

bool BloomFilter::empty() const {
  return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
}

std::string BloomFilter::hex() const {
  std::string s;
  char buf[17];
  for (auto w : words_) {
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(w));
    s += buf;
  }
  return s;
}

std::vector<int> BloomFilter::members(const std::vector<int>& roster) const {
  std::vector<int> out;
  for (int u : roster) {
    if (contains(u)) out.push_back(u);
  }
  return out;
}

BloomFilter PitEntry::union_bf() const {
  BloomFilter u = requesters.front().second;
  for (std::size_t i = 1; i < requesters.size(); ++i) u.unite(requesters[i].second);
  return u;
}

int pit_lookup_interest(const BloomFilter& bf, const std::vector<PitEntry>& pending,
                        const Roster& roster) {
  const auto clients = bf.members(roster);
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto u = pending[i].union_bf();
    if (std::none_of(clients.begin(), clients.end(), [&](int c) { return u.contains(c); })) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

CsMatch cs_lookup(const BloomFilter& bf, const std::vector<CsEntry>& stored, const Roster& roster) {
  CsMatch m;
  auto left = bf.members(roster);
  for (std::size_t i = 0; i < stored.size() && !left.empty(); ++i) {
    const auto& d = stored[i];
    std::vector<int> still;
    for (int u : left) {
      if (d.data.bf.contains(u) && !d.sent.contains(u)) {
        if (m.entries.empty() || m.entries.back() != static_cast<int>(i)) {
          m.entries.push_back(static_cast<int>(i));
        }
      } else {
        still.push_back(u);
      }
    }
    left = std::move(still);
  }
  m.exists = left.empty();
  return m;
}

void cs_update(const BloomFilter& bf, const std::vector<int>& entries, std::vector<CsEntry>& stored,
               const Roster& roster) {
  for (int u : bf.members(roster)) {
    for (int i : entries) {
      auto& d = stored[i];
      if (d.data.bf.contains(u) && !d.sent.contains(u)) {
        d.sent.insert(u);
        break;
      }
    }
  }
}

DataMatch pit_lookup_data(const std::vector<PitEntry>& pending, const std::vector<CsEntry>& stored,
                          const Roster& roster) {
  DataMatch m;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto c = cs_lookup(pending[i].union_bf(), stored, roster);
    if (c.exists) {
      m.found = true;
      m.pending = static_cast<int>(i);
      m.entries = std::move(c.entries);
      return m;
    }
  }
  return m;
}

BloomFilter build_bloom(int counter, int z, const std::vector<std::pair<int, int>>& rates,
                        const BloomParams& params) {
  BloomFilter bf(params);
  const int p = z - counter + 1;
  for (auto [u, r] : rates) {
    if (r == 0) continue;
    const int t = z / r;
    if (t > 0 && p % t == 0 && p / t <= r) bf.insert(u);
  }
  return bf;
}

void TraceLog::record(double time, int node, std::string_view action, const ContentName& name,
                      const BloomFilter& bf, std::string_view detail) {
  if (!out_) return;
  char t[32];
  std::snprintf(t, sizeof t, "%.9f", time);
  *out_ << t << ' ' << node << ' ' << action << ' ' << name.str() << ' ' << bf.hex();
  if (!detail.empty()) *out_ << ' ' << detail;
  *out_ << '\n';
}

}  // namespace ncndn::protocol
