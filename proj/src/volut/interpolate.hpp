#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "volut/octree.hpp"
#include "volut/point_cloud.hpp"

namespace volut {

struct UpsamplePlan {
  double ratio = 1.0;
  std::size_t source_count = 0;
  std::size_t new_point_count = 0;  // round(ratio * N) - N
  std::vector<std::uint32_t> counts;  // per source point, sums to new_point_count
  std::uint64_t seed = 0;
  std::size_t k = 4;
  std::size_t d = 2;
};

// Spreads the new points over the sources as evenly as possible; which
// sources get the extra point is decided by a seeded shuffle.
UpsamplePlan plan_upsample(std::size_t n_points, double ratio, std::size_t k, std::size_t d,
                           std::uint64_t seed);

struct ParentPair {
  PointIndex p = 0;  // generating source
  PointIndex q = 0;  // partner drawn from the dilated neighborhood of p

  friend bool operator==(const ParentPair&, const ParentPair&) = default;
};

enum class NeighborSearch { kOctree, kBruteForce };

struct InterpolationOptions {
  NeighborSearch search = NeighborSearch::kOctree;
  // Derive new-point neighbor lists with merge_and_prune; otherwise run an
  // exact query per new point.
  bool reuse_neighbors = true;
  std::size_t max_attempts_per_point = 0;  // 0: d*k draws
};

struct InterpolationStats {
  double knn_seconds = 0.0;
  double pairing_seconds = 0.0;
  double neighbor_seconds = 0.0;
  // Sources whose partner draws hit only already-used pairs; their shortfall
  // was moved to other sources.
  std::size_t reduced_sources = 0;
  std::size_t redistributed_points = 0;
};

// Originals first (uncolored), then one midpoint per parent pair.
struct InterpolationOutput {
  PointCloud cloud;
  std::size_t original_count = 0;
  std::vector<ParentPair> parents;  // per new point
  // Neighbor list of new point j, into the original points: row j of
  // neighbor_indices (stride neighbor_k), first neighbor_counts[j] entries.
  std::size_t neighbor_k = 0;
  std::vector<PointIndex> neighbor_indices;
  std::vector<std::uint32_t> neighbor_counts;
  InterpolationStats stats;

  std::size_t new_point_count() const { return parents.size(); }
  std::span<const PointIndex> neighbor_row(std::size_t j) const {
    return {neighbor_indices.data() + j * neighbor_k, neighbor_counts[j]};
  }
  NeighborList neighbors(std::size_t j) const;
};

InterpolationOutput dilated_midpoint_interpolate(const PointCloud& cloud, const UpsamplePlan& plan,
                                                 std::size_t k, std::size_t d,
                                                 const InterpolationOptions& options = {});

// Attaches colors: originals keep theirs, every new point takes the color of
// the nearer parent (exact tie: the generating source p). Returns false and
// logs a warning when `original` carries no colors.
bool colorize(InterpolationOutput& output, const PointCloud& original);

}  // namespace volut
