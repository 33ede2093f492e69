#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace volut {

struct Vec3 {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;

  float operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  float& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Squared Euclidean distance evaluated in double. Every neighbor search in
// the library goes through this one function so that independent search
// routes rank candidates identically.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = static_cast<double>(a.x) - b.x;
  const double dy = static_cast<double>(a.y) - b.y;
  const double dz = static_cast<double>(a.z) - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline Vec3 midpoint(const Vec3& a, const Vec3& b) {
  return {0.5f * (a.x + b.x), 0.5f * (a.y + b.y), 0.5f * (a.z + b.z)};
}

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Bbox {
  Vec3 min;
  Vec3 max;

  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  double diagonal() const { return std::sqrt(squared_distance(min, max)); }
  double extent(int axis) const {
    return static_cast<double>(max[axis]) - min[axis];
  }

  // Squared distance from p to the box (0 when inside).
  double squared_distance_to(const Vec3& p) const {
    double sum = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double v = p[a];
      if (v < min[a]) {
        const double d = min[a] - v;
        sum += d * d;
      } else if (v > max[a]) {
        const double d = v - max[a];
        sum += d * d;
      }
    }
    return sum;
  }

  static Bbox of(std::span<const Vec3> points);
};

// One volumetric frame. Immutable after construction: either every point
// carries a color or none does, and all coordinates are finite.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> positions,
                      std::vector<Rgb> colors = {});

  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }
  bool has_colors() const { return !colors_.empty(); }

  const Vec3& position(std::size_t i) const { return positions_[i]; }
  const Rgb& color(std::size_t i) const { return colors_[i]; }
  std::span<const Vec3> positions() const { return positions_; }
  std::span<const Rgb> colors() const { return colors_; }
  const Bbox& bbox() const { return bbox_; }

  // Subset in the given index order.
  PointCloud select(std::span<const std::size_t> indices) const;

  friend bool operator==(const PointCloud& a, const PointCloud& b) {
    return a.positions_ == b.positions_ && a.colors_ == b.colors_;
  }

 private:
  std::vector<Vec3> positions_;
  std::vector<Rgb> colors_;
  Bbox bbox_;
};

}  // namespace volut
