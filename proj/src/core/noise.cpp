#include "core/noise.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "core/rng.hpp"

namespace fbdsde {

NoiseBundle sample_noise_bundle(const TimeGrid& grid, int paths, std::uint64_t seed,
                                int wdim, int bdim, const JumpMeasure& jumps) {
  grid.validate();
  jumps.validate();
  if (paths < 1) throw std::invalid_argument("noise: paths must be >= 1");
  if (wdim < 1 || bdim < 1) throw std::invalid_argument("noise: wdim and bdim must be >= 1");

  NoiseBundle out;
  out.seed = seed;
  out.steps = grid.steps;
  out.paths = paths;
  out.wdim = wdim;
  out.bdim = bdim;
  out.T = grid.T;
  out.jumps = jumps;

  const int N = grid.steps;
  const int M = paths;
  const int J = jumps.count();
  const double dt = grid.dt();
  const double sdt = std::sqrt(dt);

  out.dW.assign(static_cast<std::size_t>(N) * M * wdim, 0.0);
  out.dB.assign(static_cast<std::size_t>(N) * M * bdim, 0.0);
  out.counts.assign(static_cast<std::size_t>(N) * M * J, 0.0);
  out.dN.assign(static_cast<std::size_t>(N) * M * J, 0.0);
  out.btail.assign(static_cast<std::size_t>(N + 1) * M * bdim, 0.0);

  for (int p = 0; p < M; ++p) {
    Rng rng(seed, static_cast<std::uint64_t>(p));
    for (int i = 0; i < N; ++i) {
      double* w = out.dW.data() + (static_cast<std::size_t>(i) * M + p) * wdim;
      for (int c = 0; c < wdim; ++c) w[c] = sdt * rng.gaussian();
      double* b = out.dB.data() + (static_cast<std::size_t>(i) * M + p) * bdim;
      for (int c = 0; c < bdim; ++c) b[c] = sdt * rng.gaussian();
      double* cnt = out.counts.data() + (static_cast<std::size_t>(i) * M + p) * J;
      double* dn = out.dN.data() + (static_cast<std::size_t>(i) * M + p) * J;
      for (int j = 0; j < J; ++j) {
        const double mean = jumps.weights[j] * dt;
        cnt[j] = static_cast<double>(rng.poisson(mean));
        dn[j] = cnt[j] - mean;
      }
    }
  }

  // Backward tails B_T - B_{t_i}, node-indexed; tail at N is zero.
  for (int p = 0; p < M; ++p) {
    for (int i = N - 1; i >= 0; --i) {
      const double* next = out.btail.data() + (static_cast<std::size_t>(i + 1) * M + p) * bdim;
      const double* inc = out.dB.data() + (static_cast<std::size_t>(i) * M + p) * bdim;
      double* cur = out.btail.data() + (static_cast<std::size_t>(i) * M + p) * bdim;
      for (int c = 0; c < bdim; ++c) cur[c] = next[c] + inc[c];
    }
  }
  return out;
}

namespace {

constexpr std::uint32_t kMagic = 0x4E444246u;  // "FBDN"
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ofstream& os, const void* p, std::size_t len) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
}

void get_bytes(std::ifstream& is, void* p, std::size_t len) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("noise dump: truncated file");
}

void check_little_endian() {
  const std::uint32_t probe = 1;
  unsigned char byte;
  std::memcpy(&byte, &probe, 1);
  if (byte != 1) throw std::runtime_error("noise dump: little-endian hosts only");
}

}  // namespace

void write_noise_bundle(const NoiseBundle& bundle, const std::string& path) {
  check_little_endian();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("noise dump: cannot open '" + path + "' for writing");

  const std::uint32_t N = bundle.steps, M = bundle.paths, d = bundle.wdim, l = bundle.bdim,
                      J = bundle.jumps.count();
  put_bytes(os, &kMagic, 4);
  put_bytes(os, &kVersion, 4);
  put_bytes(os, &bundle.seed, 8);
  put_bytes(os, &N, 4);
  put_bytes(os, &M, 4);
  put_bytes(os, &d, 4);
  put_bytes(os, &l, 4);
  put_bytes(os, &J, 4);
  put_bytes(os, &bundle.T, 8);
  put_bytes(os, bundle.jumps.marks.data(), 8 * J);
  put_bytes(os, bundle.jumps.weights.data(), 8 * J);
  put_bytes(os, bundle.dW.data(), 8 * bundle.dW.size());
  put_bytes(os, bundle.dB.data(), 8 * bundle.dB.size());
  put_bytes(os, bundle.counts.data(), 8 * bundle.counts.size());
  if (!os) throw std::runtime_error("noise dump: write failed for '" + path + "'");
}

NoiseBundle read_noise_bundle(const std::string& path) {
  check_little_endian();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("noise dump: cannot open '" + path + "'");

  std::uint32_t magic = 0, version = 0, N = 0, M = 0, d = 0, l = 0, J = 0;
  get_bytes(is, &magic, 4);
  get_bytes(is, &version, 4);
  if (magic != kMagic) throw std::runtime_error("noise dump: bad magic");
  if (version != kVersion) throw std::runtime_error("noise dump: unsupported version");

  NoiseBundle out;
  get_bytes(is, &out.seed, 8);
  get_bytes(is, &N, 4);
  get_bytes(is, &M, 4);
  get_bytes(is, &d, 4);
  get_bytes(is, &l, 4);
  get_bytes(is, &J, 4);
  get_bytes(is, &out.T, 8);
  if (N < 1 || M < 1 || d < 1 || l < 1 || J < 1) {
    throw std::runtime_error("noise dump: corrupt header");
  }
  out.steps = static_cast<int>(N);
  out.paths = static_cast<int>(M);
  out.wdim = static_cast<int>(d);
  out.bdim = static_cast<int>(l);
  out.jumps.marks.resize(J);
  out.jumps.weights.resize(J);
  get_bytes(is, out.jumps.marks.data(), 8 * J);
  get_bytes(is, out.jumps.weights.data(), 8 * J);
  out.jumps.validate();

  out.dW.resize(static_cast<std::size_t>(N) * M * d);
  out.dB.resize(static_cast<std::size_t>(N) * M * l);
  out.counts.resize(static_cast<std::size_t>(N) * M * J);
  get_bytes(is, out.dW.data(), 8 * out.dW.size());
  get_bytes(is, out.dB.data(), 8 * out.dB.size());
  get_bytes(is, out.counts.data(), 8 * out.counts.size());

  const double dt = out.dt();
  out.dN.resize(out.counts.size());
  for (int i = 0; i < out.steps; ++i) {
    for (int p = 0; p < out.paths; ++p) {
      const std::size_t base = (static_cast<std::size_t>(i) * M + p) * J;
      for (std::uint32_t j = 0; j < J; ++j) {
        out.dN[base + j] = out.counts[base + j] - out.jumps.weights[j] * dt;
      }
    }
  }
  out.btail.assign(static_cast<std::size_t>(N + 1) * M * l, 0.0);
  for (int p = 0; p < out.paths; ++p) {
    for (int i = out.steps - 1; i >= 0; --i) {
      const double* next = out.btail.data() + (static_cast<std::size_t>(i + 1) * M + p) * l;
      const double* inc = out.dB.data() + (static_cast<std::size_t>(i) * M + p) * l;
      double* cur = out.btail.data() + (static_cast<std::size_t>(i) * M + p) * l;
      for (std::uint32_t c = 0; c < l; ++c) cur[c] = next[c] + inc[c];
    }
  }
  return out;
}

}  // namespace fbdsde
