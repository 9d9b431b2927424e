// Random number streams and the sampled noise bundle: reproducibility,
// moments, layout invariants and the binary round trip.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "core/catalog.hpp"
#include "core/noise.hpp"
#include "core/rng.hpp"

using namespace fbdsde;

namespace {

JumpMeasure test_measure() { return catalog_problem("example31").jumps; }

}  // namespace

TEST_CASE("rng streams reproduce exactly and differ across streams") {
  Rng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool same = true, stream_differs = false, seed_differs = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    same = same && (va == b.next_u64());
    stream_differs = stream_differs || (va != c.next_u64());
    seed_differs = seed_differs || (va != d.next_u64());
  }
  CHECK(same);
  CHECK(stream_differs);
  CHECK(seed_differs);
}

TEST_CASE("uniform and gaussian draws have the right moments") {
  Rng rng(7, 0);
  const int draws = 200000;
  double usum = 0.0, gsum = 0.0, gsq = 0.0;
  double umin = 1.0, umax = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double u = rng.uniform01();
    usum += u;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    const double g = rng.gaussian();
    gsum += g;
    gsq += g * g;
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(usum / draws == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(gsum / draws) < 0.01);        // SE ~ 0.0022
  CHECK(gsq / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("poisson draws match mean and variance") {
  Rng rng(11, 1);
  CHECK(rng.poisson(0.0) == 0);

  const int draws = 100000;
  double sum = 0.0, sq = 0.0;
  long min_count = 1;
  for (int i = 0; i < draws; ++i) {
    const long np = rng.poisson(3.0);
    min_count = std::min(min_count, np);
    sum += static_cast<double>(np);
    sq += static_cast<double>(np) * static_cast<double>(np);
  }
  CHECK(min_count >= 0);
  const double mean = sum / draws;
  CHECK(mean == doctest::Approx(3.0).epsilon(0.02));
  CHECK(sq / draws - mean * mean == doctest::Approx(3.0).epsilon(0.05));

  // Large means exercise the recursive split path.
  double big = 0.0;
  for (int i = 0; i < 2000; ++i) big += static_cast<double>(rng.poisson(1000.0));
  CHECK(big / 2000 == doctest::Approx(1000.0).epsilon(0.01));
}

TEST_CASE("noise bundle layout, compensation and tail sums are consistent") {
  const TimeGrid grid{1.0, 4};
  const JumpMeasure jumps = test_measure();
  const int M = 3, d = 2, l = 2;
  const NoiseBundle noise = sample_noise_bundle(grid, M, 99, d, l, jumps);

  CHECK(noise.steps == 4);
  CHECK(noise.paths == M);
  CHECK(noise.T == 1.0);
  CHECK(noise.dW.size() == static_cast<size_t>(4 * M * d));
  CHECK(noise.dB.size() == static_cast<size_t>(4 * M * l));
  CHECK(noise.counts.size() == static_cast<size_t>(4 * M * jumps.count()));
  CHECK(noise.btail.size() == static_cast<size_t>(5 * M * l));

  const double dt = noise.dt();
  for (int p = 0; p < M; ++p) {
    // dN is the compensated count and counts are nonnegative integers.
    for (int i = 0; i < 4; ++i) {
      const double* raw = noise.counts_at(i, p);
      const double* comp = noise.dN_at(i, p);
      for (int j = 0; j < jumps.count(); ++j) {
        CHECK(raw[j] >= 0.0);
        CHECK(raw[j] == doctest::Approx(std::round(raw[j])));
        CHECK(comp[j] == doctest::Approx(raw[j] - jumps.weights[j] * dt));
      }
    }
    // btail at node i is the sum of the remaining dB increments.
    for (int c = 0; c < l; ++c) {
      CHECK(noise.btail_at(4, p)[c] == doctest::Approx(0.0));
      for (int i = 0; i < 4; ++i) {
        double tail = 0.0;
        for (int s = i; s < 4; ++s) tail += noise.dB_at(s, p)[c];
        CHECK(noise.btail_at(i, p)[c] == doctest::Approx(tail).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("noise sampling is deterministic in the seed") {
  const TimeGrid grid{1.0, 6};
  const JumpMeasure jumps = test_measure();
  const NoiseBundle a = sample_noise_bundle(grid, 5, 123, 1, 1, jumps);
  const NoiseBundle b = sample_noise_bundle(grid, 5, 123, 1, 1, jumps);
  const NoiseBundle c = sample_noise_bundle(grid, 5, 124, 1, 1, jumps);
  CHECK(a.dW == b.dW);
  CHECK(a.dB == b.dB);
  CHECK(a.counts == b.counts);
  CHECK(a.dW != c.dW);
}

TEST_CASE("sampled increments match their distributional moments") {
  const TimeGrid grid{1.0, 2};
  const JumpMeasure jumps = test_measure();
  const int M = 40000;
  const NoiseBundle noise = sample_noise_bundle(grid, M, 2024, 1, 1, jumps);
  const double dt = noise.dt();

  double wsum = 0.0, wsq = 0.0, bsum = 0.0, bsq = 0.0;
  std::vector<double> count_mean(jumps.count(), 0.0);
  for (int p = 0; p < M; ++p) {
    const double w = noise.dW_at(0, p)[0];
    const double b = noise.dB_at(0, p)[0];
    wsum += w;
    wsq += w * w;
    bsum += b;
    bsq += b * b;
    for (int j = 0; j < jumps.count(); ++j) count_mean[j] += noise.counts_at(0, p)[j];
  }
  CHECK(std::abs(wsum / M) < 4.0 * std::sqrt(dt / M));
  CHECK(wsq / M == doctest::Approx(dt).epsilon(0.03));
  CHECK(std::abs(bsum / M) < 4.0 * std::sqrt(dt / M));
  CHECK(bsq / M == doctest::Approx(dt).epsilon(0.03));
  for (int j = 0; j < jumps.count(); ++j) {
    // Count mean = w_j dt = 0.0625; SE ~ sqrt(0.0625/M) ~ 0.00125.
    CHECK(count_mean[j] / M == doctest::Approx(jumps.weights[j] * dt).epsilon(0.1));
  }
}

TEST_CASE("noise bundle io round trip preserves every array") {
  const TimeGrid grid{1.0, 3};
  const JumpMeasure jumps = test_measure();
  const NoiseBundle noise = sample_noise_bundle(grid, 4, 555, 2, 1, jumps);

  const std::string path =
      (std::filesystem::temp_directory_path() / "fbdsde_noise_roundtrip.bin").string();
  write_noise_bundle(noise, path);
  const NoiseBundle loaded = read_noise_bundle(path);
  std::remove(path.c_str());

  CHECK(loaded.seed == noise.seed);
  CHECK(loaded.steps == noise.steps);
  CHECK(loaded.paths == noise.paths);
  CHECK(loaded.wdim == noise.wdim);
  CHECK(loaded.bdim == noise.bdim);
  CHECK(loaded.T == noise.T);
  CHECK(loaded.jumps.marks == noise.jumps.marks);
  CHECK(loaded.jumps.weights == noise.jumps.weights);
  CHECK(loaded.dW == noise.dW);
  CHECK(loaded.dB == noise.dB);
  CHECK(loaded.counts == noise.counts);
  CHECK(loaded.dN == noise.dN);
  CHECK(loaded.btail == noise.btail);
}
