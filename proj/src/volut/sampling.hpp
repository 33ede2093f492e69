#pragma once

#include <cstddef>
#include <cstdint>

#include "volut/point_cloud.hpp"

namespace volut {

// Keeps exactly round(ratio * N) points chosen uniformly without replacement
// (seeded partial Fisher-Yates), in their original relative order.
PointCloud random_downsample(const PointCloud& cloud, double ratio, std::uint64_t seed);

std::size_t downsample_count(std::size_t n, double ratio);

// Greedy max-min sampling starting from point 0. Output is in selection order.
PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t target_count);

}  // namespace volut
