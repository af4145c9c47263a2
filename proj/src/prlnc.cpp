#include "ncndn/prlnc.hpp"

#include <algorithm>
#include <string>

namespace ncndn::prlnc {
namespace {

bool all_zero(std::span<const std::uint8_t> v) {
  return std::all_of(v.begin(), v.end(), [](std::uint8_t x) { return x == 0; });
}

void check_class(const VideoProfile& profile, int cls) {
  if (cls < 0 || cls >= profile.layers()) {
    throw std::out_of_range("class " + std::to_string(cls) + " out of range");
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

int VideoProfile::beta(int layer) const {
  int sum = 0;
  for (int k = 0; k <= layer; ++k) sum += alpha.at(k);
  return sum;
}

double VideoProfile::cumulative_rate(int layer) const {
  double sum = 0;
  for (int k = 0; k <= layer; ++k) sum += rates.at(k);
  return sum;
}

void VideoProfile::validate() const {
  if (alpha.empty()) throw std::invalid_argument("video profile has no layers");
  if (rates.size() != alpha.size() || quality.size() != alpha.size()) {
    throw std::invalid_argument(
        "alpha, rates and quality must have one entry per layer");
  }
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    if (alpha[l] <= 0) {
      throw std::invalid_argument("alpha[" + std::to_string(l) + "] must be > 0");
    }
    if (!(rates[l] > 0)) {
      throw std::invalid_argument("rate[" + std::to_string(l) + "] must be > 0");
    }
    if (l > 0 && !(quality[l] > quality[l - 1])) {
      throw std::invalid_argument("quality points must be strictly increasing");
    }
  }
  if (generation_size() > 0xFFFF) {
    throw std::invalid_argument("generation too large for the packet header");
  }
  if (!(gen_duration > 0)) throw std::invalid_argument("gen_duration must be > 0");
  if (payload_size <= 0 || interest_size <= 0) {
    throw std::invalid_argument("packet sizes must be positive");
  }
}

VideoProfile VideoProfile::foreman_cif() {
  VideoProfile p;
  p.alpha = {38, 15, 20};
  p.rates = {38, 15, 20};
  p.quality = {36.48, 37.82, 39.09};
  return p;
}

Generation make_generation(const VideoProfile& profile, std::uint32_t index,
                           std::size_t payload_bytes, double playback_delay,
                           std::uint64_t content_seed) {
  Generation g;
  g.index = index;
  g.deadline = (index + 1) * profile.gen_duration + playback_delay;
  const int n = profile.generation_size();
  g.source.reserve(n);
  for (int j = 0; j < n; ++j) {
    Rng rng(Rng::derive(content_seed, (std::uint64_t{index} << 16) | j));
    Bytes block(payload_bytes);
    for (auto& b : block) b = rng.byte();
    g.source.push_back(std::move(block));
  }
  return g;
}

std::vector<std::uint8_t> serialize(const CodedPacket& packet) {
  if (packet.coefficients.size() > 0xFFFF) {
    throw std::invalid_argument("too many coefficients for the header");
  }
  std::vector<std::uint8_t> out;
  out.reserve(7 + packet.coefficients.size() + packet.payload.size());
  out.push_back(packet.cls);
  put_u32(out, packet.generation);
  const auto n = static_cast<std::uint16_t>(packet.coefficients.size());
  out.push_back(static_cast<std::uint8_t>(n));
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.insert(out.end(), packet.coefficients.begin(), packet.coefficients.end());
  out.insert(out.end(), packet.payload.begin(), packet.payload.end());
  return out;
}

CodedPacket parse_packet(std::span<const std::uint8_t> wire) {
  if (wire.size() < 7) throw std::invalid_argument("truncated packet header");
  CodedPacket p;
  p.cls = wire[0];
  for (int i = 0; i < 4; ++i) p.generation |= std::uint32_t{wire[1 + i]} << (8 * i);
  const std::size_t n = wire[5] | (std::size_t{wire[6]} << 8);
  if (wire.size() < 7 + n) throw std::invalid_argument("truncated coefficients");
  p.coefficients.assign(wire.begin() + 7, wire.begin() + 7 + n);
  p.payload.assign(wire.begin() + 7 + n, wire.end());
  return p;
}

CodedPacket encode(const VideoProfile& profile, const Generation& generation,
                   int cls, Rng& rng) {
  check_class(profile, cls);
  const int width = profile.beta(cls);
  CodedPacket p;
  p.cls = static_cast<std::uint8_t>(cls);
  p.generation = generation.index;
  p.coefficients.resize(width);
  do {
    for (auto& c : p.coefficients) c = rng.byte();
  } while (all_zero(p.coefficients));
  const std::size_t len = generation.source.empty() ? 0 : generation.source[0].size();
  p.payload.assign(len, 0);
  for (int i = 0; i < width; ++i) {
    galois::axpy(p.payload, p.coefficients[i], generation.source.at(i));
  }
  return p;
}

CodedPacket recode(const VideoProfile& profile,
                   std::span<const CodedPacket* const> packets, int cls,
                   std::uint32_t generation, Rng& rng) {
  if (packets.empty()) throw EmptyInput();
  check_class(profile, cls);
  const std::size_t width = profile.beta(cls);
  const std::size_t len = packets.front()->payload.size();
  for (const CodedPacket* in : packets) {
    if (in->generation != generation) {
      throw std::invalid_argument("recode: generation mismatch");
    }
    if (in->coefficients.size() > width) {
      throw std::invalid_argument("recode: input class above output class");
    }
    if (in->payload.size() != len) {
      throw std::invalid_argument("recode: payload lengths differ");
    }
  }
  CodedPacket out;
  out.cls = static_cast<std::uint8_t>(cls);
  out.generation = generation;
  do {
    out.coefficients.assign(width, 0);
    out.payload.assign(len, 0);
    for (const CodedPacket* in : packets) {
      // Nonzero weights keep the newest stored packet in every recoded
      // combination; one packet out per packet in would otherwise lose rank
      // with probability 1/256 on each hop.
      std::uint8_t c = rng.byte();
      while (c == 0) c = rng.byte();
      galois::axpy(std::span(out.coefficients).first(in->coefficients.size()), c,
                   in->coefficients);
      galois::axpy(out.payload, c, in->payload);
    }
  } while (all_zero(out.coefficients));
  return out;
}

CodedPacket recode(const VideoProfile& profile,
                   std::span<const CodedPacket> packets, int cls,
                   std::uint32_t generation, Rng& rng) {
  std::vector<const CodedPacket*> ptrs;
  ptrs.reserve(packets.size());
  for (const auto& p : packets) ptrs.push_back(&p);
  return recode(profile, ptrs, cls, generation, rng);
}

DecoderState::DecoderState(const VideoProfile& profile, std::uint32_t generation)
    : width_(profile.generation_size()),
      generation_(generation),
      by_pivot_(width_, -1) {
  for (int l = 0; l < profile.layers(); ++l) betas_.push_back(profile.beta(l));
}

bool DecoderState::absorb(const CodedPacket& packet) {
  if (packet.generation != generation_) {
    throw std::invalid_argument("absorb: generation mismatch");
  }
  if (packet.coefficients.size() > width_) {
    throw std::invalid_argument("absorb: coefficient vector too long");
  }
  CoefficientVector v(width_, 0);
  std::copy(packet.coefficients.begin(), packet.coefficients.end(), v.begin());
  Bytes payload = packet.payload;

  // Rows are zero in every other row's pivot column, so one pass reduces v.
  for (const Row& r : rows_) {
    if (const auto f = v[r.pivot]; f != 0) {
      galois::axpy(v, f, r.coefficients);
      if (payload.size() == r.payload.size()) galois::axpy(payload, f, r.payload);
    }
  }
  std::size_t pivot = width_;
  while (pivot > 0 && v[pivot - 1] == 0) --pivot;
  if (pivot == 0) return false;
  --pivot;

  const auto norm = galois::inv(v[pivot]);
  galois::scale(v, norm);
  galois::scale(payload, norm);
  // Only rows pivoting above `pivot` can carry a nonzero there; clearing it
  // leaves their own pivot untouched.
  for (Row& r : rows_) {
    if (const auto f = r.coefficients[pivot]; f != 0) {
      galois::axpy(r.coefficients, f, v);
      if (payload.size() == r.payload.size()) galois::axpy(r.payload, f, payload);
    }
  }
  by_pivot_[pivot] = static_cast<int>(rows_.size());
  rows_.push_back({pivot, std::move(v), std::move(payload)});
  return true;
}

bool DecoderState::innovative(const CodedPacket& packet) const {
  if (packet.coefficients.size() > width_) {
    throw std::invalid_argument("innovative: coefficient vector too long");
  }
  CoefficientVector v(width_, 0);
  std::copy(packet.coefficients.begin(), packet.coefficients.end(), v.begin());
  for (const Row& r : rows_) {
    if (const auto f = v[r.pivot]; f != 0) galois::axpy(v, f, r.coefficients);
  }
  return !all_zero(v);
}

std::size_t DecoderState::prefix_rank(std::size_t columns) const {
  columns = std::min(columns, width_);
  std::size_t n = 0;
  for (std::size_t c = 0; c < columns; ++c) n += by_pivot_[c] >= 0;
  return n;
}

std::optional<int> DecoderState::decodable_layer() const {
  std::optional<int> best;
  for (std::size_t l = 0; l < betas_.size(); ++l) {
    const auto b = static_cast<std::size_t>(betas_[l]);
    if (prefix_rank(b) == b) best = static_cast<int>(l);
  }
  return best;
}

std::vector<Bytes> DecoderState::decoded_sources(int layer) const {
  const auto layer_ok = decodable_layer();
  if (!layer_ok || *layer_ok < layer || layer < 0) {
    throw std::logic_error("decoded_sources: layer not decodable");
  }
  std::vector<Bytes> out;
  const int n = betas_[layer];
  out.reserve(n);
  for (int c = 0; c < n; ++c) out.push_back(rows_[by_pivot_[c]].payload);
  return out;
}

}  // namespace ncndn::prlnc
