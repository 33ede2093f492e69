#include "volut/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "volut/error.hpp"
#include "volut/rng.hpp"

namespace volut {

std::size_t downsample_count(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0))
    fail(ErrorCode::kInvalidArgument, "downsample: ratio " + std::to_string(ratio) + " outside (0, 1]");
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
}

PointCloud random_downsample(const PointCloud& cloud, double ratio, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  const std::size_t m = downsample_count(n, ratio);
  if (m == n) return cloud;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return cloud.select(idx);
}

PointCloud farthest_point_sample(const PointCloud& cloud, std::size_t target_count) {
  const std::size_t n = cloud.size();
  if (target_count < 1 || target_count > n)
    fail(ErrorCode::kInvalidArgument, "fps: target count " + std::to_string(target_count) +
                                          " out of range [1, " + std::to_string(n) + "]");
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> chosen;
  chosen.reserve(target_count);
  std::size_t current = 0;
  for (std::size_t s = 0; s < target_count; ++s) {
    chosen.push_back(current);
    const Vec3& c = cloud.position(current);
    std::size_t next = current;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_distance(c, cloud.position(i));
      if (d < nearest[i]) nearest[i] = d;
      if (nearest[i] > best) {
        best = nearest[i];
        next = i;
      }
    }
    current = next;
  }
  return cloud.select(chosen);
}

}  // namespace volut
