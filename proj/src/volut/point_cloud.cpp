#include "volut/point_cloud.hpp"

#include <algorithm>
#include <string>

#include "volut/error.hpp"

namespace volut {

Bbox Bbox::of(std::span<const Vec3> points) {
  Bbox box;
  if (points.empty()) return box;
  box.min = box.max = points.front();
  for (const Vec3& p : points) {
    for (int a = 0; a < 3; ++a) {
      box.min[a] = std::min(box.min[a], p[a]);
      box.max[a] = std::max(box.max[a], p[a]);
    }
  }
  return box;
}

PointCloud::PointCloud(std::vector<Vec3> positions, std::vector<Rgb> colors)
    : positions_(std::move(positions)), colors_(std::move(colors)) {
  if (!colors_.empty() && colors_.size() != positions_.size())
    fail(ErrorCode::kInvalidArgument, "point cloud: " + std::to_string(colors_.size()) + " colors for " +
                                          std::to_string(positions_.size()) + " points");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    const Vec3& p = positions_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      fail(ErrorCode::kInvalidArgument, "point cloud: non-finite coordinate at point " + std::to_string(i));
  }
  bbox_ = Bbox::of(positions_);
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<Vec3> pos;
  std::vector<Rgb> col;
  pos.reserve(indices.size());
  if (has_colors()) col.reserve(indices.size());
  for (std::size_t i : indices) {
    pos.push_back(positions_.at(i));
    if (has_colors()) col.push_back(colors_[i]);
  }
  return PointCloud(std::move(pos), std::move(col));
}

}  // namespace volut
