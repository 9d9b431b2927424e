#pragma once

#include <cstdint>

namespace fbdsde {

// Stateless seed expander; also used to derive independent per-path streams
// from (seed, stream index) so paths can be sampled in any order.
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// xoshiro256** with splitmix64-derived state. One instance per (seed, stream)
// pair; draws are bit-reproducible for a fixed draw order.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform01();  // open interval (0, 1)
  double gaussian();   // standard normal, Marsaglia polar
  long poisson(double mean);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fbdsde
