#pragma once

#include <cstdint>
#include <random>

namespace ncndn {

// Seeded random stream. Draws are defined bit-for-bit on top of mt19937_64 so
// runs replay identically across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::uint8_t byte() {
    if (bytes_left_ == 0) {
      buffer_ = engine_();
      bytes_left_ = 8;
    }
    const auto b = static_cast<std::uint8_t>(buffer_);
    buffer_ >>= 8;
    --bytes_left_;
    return b;
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Independent stream seed for (base, stream), via splitmix64.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t buffer_ = 0;
  int bytes_left_ = 0;
};

}  // namespace ncndn
