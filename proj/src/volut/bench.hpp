#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "volut/lut.hpp"

namespace volut {

struct BenchOptions {
  std::string suite = "e2e";  // interpolation | knn | lut | e2e
  std::size_t points = 50000;
  std::vector<double> ratios{2.0, 4.0, 8.0};
  std::size_t k = 4;
  std::size_t d = 2;
  std::uint32_t bins = 16;
  std::size_t rf_size = 4;
  int repeats = 3;
  std::uint64_t seed = 1;
  // interpolation suite: time the brute-force baseline on at most this many
  // points and scale linearly per query (0: always run it in full).
  std::size_t brute_force_limit = 0;
};

// Runs one suite and returns its JSON report. Times are medians over
// `repeats` runs on one thread.
std::string run_bench(const BenchOptions& options, const LutTable* lut = nullptr);

struct InterpolationTiming {
  double octree_reuse_s = 0.0;
  double brute_force_s = 0.0;
};
// With sampled_queries > 0 the brute-force side is estimated instead of run:
// that many source and midpoint queries are timed against the full cloud
// and scaled to the real query counts. Each brute-force query scans every
// point, so the estimate is sound; it leaves out pairing and midpoint work,
// so it can only understate the brute-force time.
InterpolationTiming time_interpolation(std::size_t points, double ratio, std::size_t k, std::size_t d,
                                       std::uint64_t seed, int repeats, std::size_t sampled_queries = 0);

// Median per-frame SR time on a fixed input for each ratio.
std::vector<double> time_sr_ratios(std::size_t input_points, const std::vector<double>& ratios, std::size_t k,
                                   std::size_t d, const LutTable* lut, std::uint64_t seed, int repeats);

}  // namespace volut
