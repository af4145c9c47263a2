#pragma once

// Prioritized random linear network coding.
//
// Source packets of a generation are ordered layer by layer. A packet of
// class l is a random combination of the first beta(l) = alpha_0 + ... +
// alpha_l source packets, so a class-l packet is also a valid class-m packet
// for every m >= l once its coefficient vector is zero-padded.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ncndn/galois.hpp"
#include "ncndn/random.hpp"

namespace ncndn::prlnc {

using galois::Bytes;
using galois::CoefficientVector;

struct VideoProfile {
  std::vector<int> alpha;        // source packets per layer per generation
  std::vector<double> rates;     // encoding rate per layer, packets/s
  std::vector<double> quality;   // cumulative PSNR after decoding layer l, dB
  double gen_duration = 1.0;     // seconds of video per generation
  int payload_size = 1600;       // Data object size on the wire, bytes
  int interest_size = 200;       // Interest size on the wire, bytes

  int layers() const { return static_cast<int>(alpha.size()); }
  int beta(int layer) const;
  int generation_size() const { return beta(layers() - 1); }
  double cumulative_rate(int layer) const;
  double quality_of(int layer) const { return layer < 0 ? 0.0 : quality[layer]; }
  // Bits one Interest/Data exchange occupies on a duplex link.
  double exchange_bits() const { return 8.0 * (payload_size + interest_size); }

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  // Three-layer CIF profile: 38/15/20 packets per one-second GOP.
  static VideoProfile foreman_cif();
};

struct Generation {
  std::uint32_t index = 0;
  std::vector<Bytes> source;  // generation_size() blocks, layer 0 first
  double deadline = 0.0;
};

// Synthetic source data, a deterministic pattern of (content_seed, index,
// packet number). deadline = (index + 1) * gen_duration + playback_delay.
Generation make_generation(const VideoProfile& profile, std::uint32_t index,
                           std::size_t payload_bytes, double playback_delay,
                           std::uint64_t content_seed);

struct CodedPacket {
  std::uint8_t cls = 0;
  std::uint32_t generation = 0;
  CoefficientVector coefficients;  // length beta(cls)
  Bytes payload;

  friend bool operator==(const CodedPacket&, const CodedPacket&) = default;
};

class EmptyInput : public std::invalid_argument {
 public:
  EmptyInput() : std::invalid_argument("recode: no input packets") {}
};

// Header layout: class (u8), generation (u32 LE), coefficient count (u16 LE),
// coefficients, then the payload bytes.
std::vector<std::uint8_t> serialize(const CodedPacket& packet);
CodedPacket parse_packet(std::span<const std::uint8_t> wire);

CodedPacket encode(const VideoProfile& profile, const Generation& generation,
                   int cls, Rng& rng);

// Combination of `packets` with random nonzero weights (all of generation `generation`, classes
// <= cls), emitted as a class-`cls` packet. Throws EmptyInput.
CodedPacket recode(const VideoProfile& profile,
                   std::span<const CodedPacket* const> packets, int cls,
                   std::uint32_t generation, Rng& rng);
CodedPacket recode(const VideoProfile& profile,
                   std::span<const CodedPacket> packets, int cls,
                   std::uint32_t generation, Rng& rng);

// Incremental elimination state for one generation.
//
// Rows are kept fully reduced with each pivot at the row's highest nonzero
// column. With that orientation the rows whose pivot lies below column k span
// exactly the received vectors supported on the first k source packets, so
// prefix decodability is a count.
class DecoderState {
 public:
  DecoderState(const VideoProfile& profile, std::uint32_t generation);

  std::uint32_t generation() const { return generation_; }
  std::size_t rank() const { return rows_.size(); }
  std::size_t width() const { return width_; }

  // True iff the packet increased the rank. Throws std::invalid_argument on a
  // generation mismatch.
  bool absorb(const CodedPacket& packet);
  // Whether absorb would increase the rank; the state is left untouched.
  bool innovative(const CodedPacket& packet) const;

  // Dimension of the received span restricted to the first `columns` sources.
  std::size_t prefix_rank(std::size_t columns) const;

  // Highest layer whose beta prefix is fully spanned; nullopt if none.
  std::optional<int> decodable_layer() const;

  // Source payloads 0 .. beta(layer)-1. Requires decodable_layer() >= layer.
  std::vector<Bytes> decoded_sources(int layer) const;

 private:
  struct Row {
    std::size_t pivot;
    CoefficientVector coefficients;
    Bytes payload;
  };

  std::vector<int> betas_;
  std::size_t width_;
  std::uint32_t generation_;
  std::vector<Row> rows_;
  std::vector<int> by_pivot_;  // column -> index into rows_, or -1
};

}  // namespace ncndn::prlnc
