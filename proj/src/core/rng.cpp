#include "core/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fbdsde {

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  // Mix the stream id into the seed before expanding so neighbouring streams
  // share no state structure.
  std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
  for (auto& word : s_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  // 53-bit mantissa, shifted into the open interval.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

long Rng::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  if (mean > 500.0) {
    // Keep exp(-mean) away from underflow; sums of halves stay exact.
    return poisson(mean * 0.5) + poisson(mean * 0.5);
  }
  // Knuth's product method: exact for any mean, O(mean) uniforms. Step
  // compensators here are small (w_j * dt), so the loop is short.
  const double limit = std::exp(-mean);
  long count = -1;
  double prod = 1.0;
  do {
    prod *= uniform01();
    ++count;
  } while (prod > limit);
  return count;
}

}  // namespace fbdsde
