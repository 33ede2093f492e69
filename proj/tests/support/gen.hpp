#pragma once

// Hand-rolled generators for the property tests. Each case gets its own
// seed so a failure message names the exact input to replay.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "volut/point_cloud.hpp"

namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  double normal() {
    const double u1 = std::max(unit(), 1e-300), u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

inline volut::Vec3 point_in_box(Source& s, double half = 1.0) {
  return {static_cast<float>(s.range(-half, half)), static_cast<float>(s.range(-half, half)),
          static_cast<float>(s.range(-half, half))};
}

inline volut::PointCloud uniform_cloud(std::size_t n, std::uint64_t seed, bool colored = false) {
  Source s(seed);
  std::vector<volut::Vec3> pos(n);
  for (auto& p : pos) p = point_in_box(s);
  std::vector<volut::Rgb> col;
  if (colored) {
    col.resize(n);
    for (auto& c : col)
      c = {static_cast<std::uint8_t>(s.below(256)), static_cast<std::uint8_t>(s.below(256)),
           static_cast<std::uint8_t>(s.below(256))};
  }
  return volut::PointCloud(std::move(pos), std::move(col));
}

// Snapped to a coarse lattice so exact distance ties are common.
inline volut::PointCloud lattice_cloud(std::size_t n, std::uint64_t seed, int cells = 6) {
  Source s(seed);
  std::vector<volut::Vec3> pos(n);
  for (auto& p : pos)
    p = {static_cast<float>(s.below(cells)), static_cast<float>(s.below(cells)), static_cast<float>(s.below(cells))};
  return volut::PointCloud(std::move(pos));
}

// Two gaussian blobs holding `dense_fraction` and the rest of the points.
inline volut::PointCloud two_clusters(std::size_t n, double dense_fraction, std::uint64_t seed) {
  Source s(seed);
  std::vector<volut::Vec3> pos(n);
  const std::size_t dense = static_cast<std::size_t>(std::llround(dense_fraction * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_dense = i < dense;
    const double sigma = in_dense ? 0.05 : 0.4;
    const double cx = in_dense ? -1.0 : 1.5;
    pos[i] = {static_cast<float>(cx + sigma * s.normal()), static_cast<float>(sigma * s.normal()),
              static_cast<float>(sigma * s.normal())};
  }
  return volut::PointCloud(std::move(pos));
}

// Runs `body(case_seed)` for `cases` derived seeds; doctest's INFO in the
// body should print the seed.
template <typename F>
void for_all(std::size_t cases, std::uint64_t seed, F&& body) {
  Source s(seed);
  for (std::size_t c = 0; c < cases; ++c) body(s.next());
}

}  // namespace gen
