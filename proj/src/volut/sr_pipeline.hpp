#pragma once

#include <cstddef>
#include <cstdint>

#include "volut/interpolate.hpp"
#include "volut/lut.hpp"
#include "volut/point_cloud.hpp"

namespace volut {

struct SrConfig {
  std::size_t k = 4;
  std::size_t d = 2;
  // Raise d when the ratio needs more distinct parent pairs than d*k/2 per
  // point can supply.
  bool adapt_dilation = true;
  bool refine = true;
  InterpolationOptions interpolation;
};

struct SrTimings {
  double knn_s = 0.0;
  double pairing_s = 0.0;
  double neighbor_s = 0.0;
  double colorize_s = 0.0;
  double refine_s = 0.0;
  double total_s = 0.0;
};

struct SrResult {
  PointCloud cloud;
  SrTimings timings;
  std::size_t dilation = 0;
};

// Smallest d' >= d whose neighbor graph always holds enough distinct pairs:
// an N-point d'k-NN graph has at least N d'k / 2 edges.
std::size_t effective_dilation(std::size_t d, std::size_t k, double ratio);

// Upsamples `input` to exactly `target_count` points: interpolation, color
// transfer when the input has colors, then LUT refinement when a table is
// given and refinement is on.
SrResult super_resolve(const PointCloud& input, std::size_t target_count, const SrConfig& config,
                       const LutTable* lut, std::uint64_t seed);

}  // namespace volut
