#include "core/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace fbdsde {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("io: cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("io: short write: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot open for reading: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("io: read failed: " + path);
  return content;
}

namespace {

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

constexpr std::uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

void sha256_block(std::uint32_t* h, const unsigned char* block) {
  std::uint32_t w[64];
  for (int i = 0; i < 16; ++i) {
    w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
           (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
  }
  for (int i = 16; i < 64; ++i) {
    std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
    std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
  std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
  for (int i = 0; i < 64; ++i) {
    std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
    std::uint32_t ch = (e & f) ^ (~e & g);
    std::uint32_t t1 = hh + s1 + ch + kSha256K[i] + w[i];
    std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
    std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    std::uint32_t t2 = s0 + maj;
    hh = g;
    g = f;
    f = e;
    e = d + t1;
    d = c;
    c = b;
    b = a;
    a = t1 + t2;
  }
  h[0] += a;
  h[1] += b;
  h[2] += c;
  h[3] += d;
  h[4] += e;
  h[5] += f;
  h[6] += g;
  h[7] += hh;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t len = bytes.size();
  std::size_t full = len / 64;
  for (std::size_t i = 0; i < full; ++i) sha256_block(h, data + 64 * i);

  unsigned char tail[128];
  std::size_t rem = len - 64 * full;
  std::memcpy(tail, data + 64 * full, rem);
  tail[rem] = 0x80;
  std::size_t padded = rem + 1 <= 56 ? 64 : 128;
  std::memset(tail + rem + 1, 0, padded - rem - 1 - 8);
  std::uint64_t bits = std::uint64_t(len) * 8;
  for (int i = 0; i < 8; ++i) tail[padded - 1 - i] = static_cast<unsigned char>(bits >> (8 * i));
  sha256_block(h, tail);
  if (padded == 128) sha256_block(h, tail + 64);

  char out[65];
  for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
  return std::string(out, 64);
}

namespace {

struct BlockColumns {
  const char* label;
  const PathArray* array;
};

void append_header(std::string& csv, const std::vector<BlockColumns>& blocks, bool stats) {
  for (const auto& blk : blocks) {
    for (int c = 0; c < blk.array->block(); ++c) {
      if (stats) {
        csv += ",mean_";
        csv += blk.label;
        csv += std::to_string(c);
        csv += ",std_";
        csv += blk.label;
        csv += std::to_string(c);
      } else {
        csv += ',';
        csv += blk.label;
        csv += std::to_string(c);
      }
    }
  }
  csv += '\n';
}

std::string summary_csv(const TimeGrid& grid, int paths, const std::vector<BlockColumns>& blocks) {
  std::string csv = "node,t";
  append_header(csv, blocks, true);
  for (int i = 0; i <= grid.steps; ++i) {
    csv += std::to_string(i);
    csv += ',';
    csv += format_double(grid.t(i));
    for (const auto& blk : blocks) {
      for (int c = 0; c < blk.array->block(); ++c) {
        double sum = 0.0, sumsq = 0.0;
        for (int p = 0; p < paths; ++p) {
          double x = blk.array->at(i, p)[c];
          sum += x;
          sumsq += x * x;
        }
        double mean = sum / paths;
        double var = paths > 1 ? std::max(0.0, (sumsq - sum * sum / paths) / (paths - 1)) : 0.0;
        csv += ',';
        csv += format_double(mean);
        csv += ',';
        csv += format_double(std::sqrt(var));
      }
    }
    csv += '\n';
  }
  return csv;
}

std::string sample_csv(const TimeGrid& grid, int paths, int sample_paths,
                       const std::vector<BlockColumns>& blocks) {
  std::string csv = "path,node,t";
  append_header(csv, blocks, false);
  int count = std::min(paths, std::max(0, sample_paths));
  for (int p = 0; p < count; ++p) {
    for (int i = 0; i <= grid.steps; ++i) {
      csv += std::to_string(p);
      csv += ',';
      csv += std::to_string(i);
      csv += ',';
      csv += format_double(grid.t(i));
      for (const auto& blk : blocks) {
        for (int c = 0; c < blk.array->block(); ++c) {
          csv += ',';
          csv += format_double(blk.array->at(i, p)[c]);
        }
      }
      csv += '\n';
    }
  }
  return csv;
}

}  // namespace

std::string state_summary_csv(const StatePaths& s) {
  return summary_csv(s.grid, s.paths,
                     {{"y", &s.y}, {"Y", &s.Y}, {"z", &s.z}, {"Z", &s.Z}, {"k", &s.k}});
}

std::string state_sample_csv(const StatePaths& s, int sample_paths) {
  return sample_csv(s.grid, s.paths, sample_paths,
                    {{"y", &s.y}, {"Y", &s.Y}, {"z", &s.z}, {"Z", &s.Z}, {"k", &s.k}});
}

std::string adjoint_summary_csv(const AdjointPaths& a) {
  return summary_csv(a.grid, a.paths,
                     {{"p", &a.p}, {"P", &a.P}, {"q", &a.q}, {"Q", &a.Q}, {"V", &a.V}});
}

std::string adjoint_sample_csv(const AdjointPaths& a, int sample_paths) {
  return sample_csv(a.grid, a.paths, sample_paths,
                    {{"p", &a.p}, {"P", &a.P}, {"q", &a.q}, {"Q", &a.Q}, {"V", &a.V}});
}

std::string control_csv(const ControlProcess& u, const TimeGrid& grid) {
  std::string csv;
  if (u.kind() == ControlProcess::Kind::OpenLoop) {
    const Mat& vals = u.values();
    csv = "node,t";
    for (int c = 0; c < vals.rows(); ++c) csv += ",u" + std::to_string(c);
    csv += '\n';
    for (int i = 0; i < vals.cols(); ++i) {
      csv += std::to_string(i);
      csv += ',';
      csv += format_double(grid.t(i));
      for (int c = 0; c < vals.rows(); ++c) {
        csv += ',';
        csv += format_double(vals(c, i));
      }
      csv += '\n';
    }
  } else {
    csv = "node,t,feature";
    int r = u.dim();
    for (int c = 0; c < r; ++c) csv += ",c" + std::to_string(c);
    csv += '\n';
    const auto& coeffs = u.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      for (int fidx = 0; fidx < coeffs[i].rows(); ++fidx) {
        csv += std::to_string(i);
        csv += ',';
        csv += format_double(grid.t(static_cast<int>(i)));
        csv += ',';
        csv += std::to_string(fidx);
        for (int c = 0; c < coeffs[i].cols(); ++c) {
          csv += ',';
          csv += format_double(coeffs[i](fidx, c));
        }
        csv += '\n';
      }
    }
  }
  return csv;
}

}  // namespace fbdsde
