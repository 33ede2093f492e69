#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "volut/point_cloud.hpp"

namespace volut {

using PointIndex = std::uint32_t;
inline constexpr std::size_t kNoExclusion = std::numeric_limits<std::size_t>::max();

// Neighbors ordered by (distance, index). `distances` are Euclidean.
struct NeighborList {
  std::vector<PointIndex> indices;
  std::vector<double> distances;
  // Set by merge_and_prune when fewer than k distinct candidates existed.
  bool truncated = false;

  std::size_t size() const { return indices.size(); }
};

// Search candidate ordered by (squared distance, index).
struct Candidate {
  double d2;
  PointIndex index;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};

// Fixed two-layer octree: the root box is split at its midpoints into eight
// cells, and each of those again at its own midpoints, giving 64 leaves that
// tile the root box. Points exactly on a split plane go to the upper cell.
class TwoLayerOctree {
 public:
  static constexpr int kLeafCount = 64;

  explicit TwoLayerOctree(const PointCloud& cloud);

  const Bbox& root_bbox() const { return root_; }
  std::size_t point_count() const { return indices_.size(); }

  // Leaf id = first-layer cell * 8 + second-layer cell.
  int leaf_of(const Vec3& p) const;
  Bbox leaf_bbox(int leaf) const;
  std::span<const PointIndex> leaf_points(int leaf) const {
    return {indices_.data() + offsets_[leaf], offsets_[leaf + 1] - offsets_[leaf]};
  }

  NeighborList query(const Vec3& q, std::size_t k, std::size_t exclude) const;
  // Row i holds the k nearest neighbors of point i (itself excluded), in
  // query order.
  std::vector<PointIndex> all_points_knn(const PointCloud& cloud, std::size_t k) const;

 private:
  template <typename Sink>
  void search(const Vec3& q, std::size_t k, std::size_t exclude, Sink&& sink) const;

  Bbox root_;
  std::array<float, 3> mid_{};
  std::array<std::array<float, 3>, 8> sub_mid_{};
  std::array<std::size_t, kLeafCount + 1> offsets_{};
  std::vector<PointIndex> indices_;
  std::vector<Vec3> sorted_positions_;  // leaf-major, sorted along axis_[leaf] within a leaf
  std::vector<float> keys_;
  std::array<int, kLeafCount> axis_{};
  std::array<Bbox, kLeafCount> tight_{};
};

TwoLayerOctree build_octree(const PointCloud& cloud);

// Exact k nearest neighbors of `query` by Euclidean distance, ties broken by
// lower point index. `exclude` removes one point index from consideration
// (used when the query is itself a cloud point).
NeighborList knn_query(const TwoLayerOctree& tree, const PointCloud& cloud,
                       const Vec3& query, std::size_t k,
                       std::size_t exclude = kNoExclusion);

// d*k nearest neighbors of point i, excluding i itself.
NeighborList dilated_neighborhood(const TwoLayerOctree& tree,
                                  const PointCloud& cloud, std::size_t i,
                                  std::size_t k, std::size_t d);

// Approximate kNN of the midpoint p_prime of points p and q, re-ranking the
// union of both parents' neighbor lists and the parents themselves. Never
// touches a tree.
// merge_and_prune without validation over raw index ranges. Writes the
// sorted result to best[0, k) and returns how many entries it holds.
std::size_t merge_and_prune_into(std::span<const PointIndex> nl_p, std::span<const PointIndex> nl_q,
                                 PointIndex p, PointIndex q, const Vec3& p_prime, const PointCloud& cloud,
                                 std::size_t k, Candidate* best);
NeighborList merge_and_prune(const NeighborList& nl_p, const NeighborList& nl_q,
                             std::size_t p, std::size_t q, const Vec3& p_prime,
                             const PointCloud& cloud, std::size_t k);

// Exhaustive scan with the same ordering contract as knn_query.
NeighborList brute_force_knn(const PointCloud& cloud, const Vec3& query,
                             std::size_t k, std::size_t exclude = kNoExclusion);

}  // namespace volut
