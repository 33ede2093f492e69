#include "volut/octree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "volut/error.hpp"

namespace volut {
namespace {

NeighborList to_list(std::vector<Candidate>& best) {
  std::sort(best.begin(), best.end());
  NeighborList out;
  out.indices.reserve(best.size());
  out.distances.reserve(best.size());
  for (const Candidate& c : best) {
    out.indices.push_back(c.index);
    out.distances.push_back(std::sqrt(c.d2));
  }
  return out;
}

void check_k(std::size_t k, std::size_t n, std::size_t exclude) {
  const std::size_t available = n - (exclude < n ? 1 : 0);
  if (k < 1 || k > available)
    fail(ErrorCode::kInvalidArgument, "knn: k=" + std::to_string(k) + " out of range [1, " +
                                          std::to_string(available) + "]");
}

}  // namespace

TwoLayerOctree::TwoLayerOctree(const PointCloud& cloud) {
  require(!cloud.empty(), "octree: empty cloud");
  require(cloud.size() <= std::numeric_limits<PointIndex>::max(), "octree: cloud too large");
  root_ = cloud.bbox();
  double max_extent = 0.0;
  for (int a = 0; a < 3; ++a) max_extent = std::max(max_extent, root_.extent(a));
  const double pad = max_extent > 0.0 ? 1e-9 * max_extent : 1e-9;
  for (int a = 0; a < 3; ++a) {
    if (root_.extent(a) <= 0.0) {
      root_.min[a] = static_cast<float>(root_.min[a] - pad);
      root_.max[a] = static_cast<float>(root_.max[a] + pad);
      // pad may vanish in float precision for large coordinates
      if (!(root_.max[a] > root_.min[a])) {
        root_.min[a] = std::nextafter(root_.min[a], -std::numeric_limits<float>::infinity());
        root_.max[a] = std::nextafter(root_.max[a], std::numeric_limits<float>::infinity());
      }
    }
  }
  for (int a = 0; a < 3; ++a) mid_[a] = 0.5f * (root_.min[a] + root_.max[a]);
  for (int c = 0; c < 8; ++c) {
    for (int a = 0; a < 3; ++a) {
      const bool upper = (c >> (2 - a)) & 1;
      const float lo = upper ? mid_[a] : root_.min[a];
      const float hi = upper ? root_.max[a] : mid_[a];
      sub_mid_[c][a] = 0.5f * (lo + hi);
    }
  }

  const std::size_t n = cloud.size();
  std::vector<std::uint8_t> leaf(n);
  std::array<std::size_t, kLeafCount> counts{};
  for (std::size_t i = 0; i < n; ++i) {
    leaf[i] = static_cast<std::uint8_t>(leaf_of(cloud.position(i)));
    ++counts[leaf[i]];
  }
  offsets_[0] = 0;
  for (int l = 0; l < kLeafCount; ++l) offsets_[l + 1] = offsets_[l] + counts[l];
  indices_.resize(n);
  sorted_positions_.resize(n);
  std::array<std::size_t, kLeafCount> cursor{};
  for (int l = 0; l < kLeafCount; ++l) cursor[l] = offsets_[l];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t slot = cursor[leaf[i]]++;
    indices_[slot] = static_cast<PointIndex>(i);
    sorted_positions_[slot] = cloud.position(i);
  }
  // Within a leaf, points are sorted along the leaf's longest tight axis so
  // queries can sweep a slab instead of scanning the whole leaf.
  keys_.resize(n);
  std::vector<std::size_t> perm;
  std::vector<PointIndex> idx;
  std::vector<Vec3> pos;
  for (int l = 0; l < kLeafCount; ++l) {
    const std::size_t b = offsets_[l], e = offsets_[l + 1];
    tight_[l] = Bbox::of(std::span<const Vec3>(sorted_positions_.data() + b, e - b));
    int axis = 0;
    for (int a = 1; a < 3; ++a)
      if (e > b && tight_[l].extent(a) > tight_[l].extent(axis)) axis = a;
    axis_[l] = axis;
    perm.resize(e - b);
    std::iota(perm.begin(), perm.end(), b);
    std::sort(perm.begin(), perm.end(), [&](std::size_t i, std::size_t j) {
      const float ki = sorted_positions_[i][axis], kj = sorted_positions_[j][axis];
      return ki < kj || (ki == kj && indices_[i] < indices_[j]);
    });
    idx.resize(perm.size());
    pos.resize(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      idx[i] = indices_[perm[i]];
      pos[i] = sorted_positions_[perm[i]];
    }
    std::copy(idx.begin(), idx.end(), indices_.begin() + static_cast<std::ptrdiff_t>(b));
    std::copy(pos.begin(), pos.end(), sorted_positions_.begin() + static_cast<std::ptrdiff_t>(b));
    for (std::size_t i = b; i < e; ++i) keys_[i] = sorted_positions_[i][axis];
  }
}

int TwoLayerOctree::leaf_of(const Vec3& p) const {
  int first = 0;
  for (int a = 0; a < 3; ++a) first = (first << 1) | (p[a] >= mid_[a] ? 1 : 0);
  int second = 0;
  for (int a = 0; a < 3; ++a) second = (second << 1) | (p[a] >= sub_mid_[first][a] ? 1 : 0);
  return first * 8 + second;
}

Bbox TwoLayerOctree::leaf_bbox(int leaf) const {
  const int first = leaf / 8;
  const int second = leaf % 8;
  Bbox box;
  for (int a = 0; a < 3; ++a) {
    const bool up1 = (first >> (2 - a)) & 1;
    const float lo1 = up1 ? mid_[a] : root_.min[a];
    const float hi1 = up1 ? root_.max[a] : mid_[a];
    const bool up2 = (second >> (2 - a)) & 1;
    box.min[a] = up2 ? sub_mid_[first][a] : lo1;
    box.max[a] = up2 ? hi1 : sub_mid_[first][a];
  }
  return box;
}

namespace {

// The k best candidates seen so far, kept sorted; k is small, so insertion
// beats a heap.
class KBest {
 public:
  explicit KBest(std::size_t k) : k_(k) {
    if (k > fixed_.size()) spill_.resize(k);
    best_ = k > fixed_.size() ? spill_.data() : fixed_.data();
  }

  bool full() const { return count_ == k_; }
  double worst() const { return best_[count_ - 1].d2; }
  std::size_t size() const { return count_; }
  const Candidate& operator[](std::size_t i) const { return best_[i]; }

  void offer(const Candidate& c) {
    if (count_ == k_ && !(c < best_[count_ - 1])) return;
    std::size_t pos = count_ < k_ ? count_ : k_ - 1;
    while (pos > 0 && c < best_[pos - 1]) {
      best_[pos] = best_[pos - 1];
      --pos;
    }
    best_[pos] = c;
    if (count_ < k_) ++count_;
  }

 private:
  std::size_t k_;
  std::size_t count_ = 0;
  std::array<Candidate, 64> fixed_;
  std::vector<Candidate> spill_;
  Candidate* best_;
};

}  // namespace

template <typename Sink>
void TwoLayerOctree::search(const Vec3& q, std::size_t k, std::size_t exclude, Sink&& sink) const {
  KBest best(k);
  auto scan_leaf = [&](int l) {
    // Sweep outward along the leaf's sort axis until the gap on that axis
    // alone exceeds the current k-th distance. The gap is computed exactly
    // as inside squared_distance, so the cut never drops a tie.
    const float* keys = keys_.data();
    const int axis = axis_[l];
    const double qa = q[axis];
    const std::size_t begin = offsets_[l];
    const std::size_t end = offsets_[l + 1];
    const std::size_t mid = static_cast<std::size_t>(std::lower_bound(keys + begin, keys + end, q[axis]) - keys);
    for (std::size_t s = mid; s < end; ++s) {
      const double dx = qa - keys[s];
      if (best.full() && dx * dx > best.worst()) break;
      if (indices_[s] != exclude) best.offer({squared_distance(q, sorted_positions_[s]), indices_[s]});
    }
    for (std::size_t s = mid; s-- > begin;) {
      const double dx = qa - keys[s];
      if (best.full() && dx * dx > best.worst()) break;
      if (indices_[s] != exclude) best.offer({squared_distance(q, sorted_positions_[s]), indices_[s]});
    }
  };
  // Start in the closest leaf, then visit every other leaf whose box could
  // still hold a candidate. Equal bound may hold an equal-distance point with
  // a lower index, so only a strictly larger bound skips.
  std::array<double, kLeafCount> bound;
  int first = -1;
  for (int l = 0; l < kLeafCount; ++l) {
    if (offsets_[l + 1] == offsets_[l]) continue;
    bound[l] = tight_[l].squared_distance_to(q);
    if (first < 0 || bound[l] < bound[first]) first = l;
  }
  scan_leaf(first);
  for (int l = 0; l < kLeafCount; ++l) {
    if (l == first || offsets_[l + 1] == offsets_[l]) continue;
    if (best.full() && bound[l] > best.worst()) continue;
    scan_leaf(l);
  }
  for (std::size_t i = 0; i < best.size(); ++i) sink(best[i]);
}

NeighborList TwoLayerOctree::query(const Vec3& q, std::size_t k, std::size_t exclude) const {
  NeighborList out;
  out.indices.reserve(k);
  out.distances.reserve(k);
  search(q, k, exclude, [&](const Candidate& c) {
    out.indices.push_back(c.index);
    out.distances.push_back(std::sqrt(c.d2));
  });
  return out;
}

std::vector<PointIndex> TwoLayerOctree::all_points_knn(const PointCloud& cloud, std::size_t k) const {
  require(cloud.size() == point_count(), "knn: tree was built for a different cloud");
  check_k(k, cloud.size(), 0);
  std::vector<PointIndex> out(cloud.size() * k);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    PointIndex* row = out.data() + i * k;
    std::size_t j = 0;
    search(cloud.position(i), k, i, [&](const Candidate& c) { row[j++] = c.index; });
  }
  return out;
}

TwoLayerOctree build_octree(const PointCloud& cloud) { return TwoLayerOctree(cloud); }

NeighborList knn_query(const TwoLayerOctree& tree, const PointCloud& cloud, const Vec3& query,
                       std::size_t k, std::size_t exclude) {
  require(tree.point_count() == cloud.size(), "knn: tree was built for a different cloud");
  check_k(k, cloud.size(), exclude);
  return tree.query(query, k, exclude);
}

NeighborList dilated_neighborhood(const TwoLayerOctree& tree, const PointCloud& cloud,
                                  std::size_t i, std::size_t k, std::size_t d) {
  require(i < cloud.size(), "dilated neighborhood: point index out of range");
  require(k >= 1 && d >= 1, "dilated neighborhood: k and d must be >= 1");
  if (d * k > cloud.size() - 1)
    fail(ErrorCode::kInvalidArgument, "dilated neighborhood: d*k=" + std::to_string(d * k) +
                                          " exceeds N-1=" + std::to_string(cloud.size() - 1));
  return knn_query(tree, cloud, cloud.position(i), d * k, i);
}

std::size_t merge_and_prune_into(std::span<const PointIndex> nl_p, std::span<const PointIndex> nl_q,
                                 PointIndex p, PointIndex q, const Vec3& p_prime, const PointCloud& cloud,
                                 std::size_t k, Candidate* best) {
  // Sorted (d2, index) buffer of at most k entries; a repeated index has the
  // same key as its first occurrence and is dropped.
  std::size_t count = 0;
  auto offer = [&](PointIndex id) {
    const Candidate c{squared_distance(p_prime, cloud.position(id)), id};
    if (count == k && !(c < best[count - 1])) return;
    std::size_t pos = count;
    while (pos > 0 && c < best[pos - 1]) --pos;
    if (pos > 0 && best[pos - 1].index == id) return;
    const std::size_t last = std::min(count, k - 1);
    for (std::size_t i = last; i > pos; --i) best[i] = best[i - 1];
    best[pos] = c;
    if (count < k) ++count;
  };
  offer(p);
  offer(q);
  for (PointIndex id : nl_p) offer(id);
  for (PointIndex id : nl_q) offer(id);
  return count;
}

NeighborList merge_and_prune(const NeighborList& nl_p, const NeighborList& nl_q, std::size_t p,
                             std::size_t q, const Vec3& p_prime, const PointCloud& cloud,
                             std::size_t k) {
  require(k >= 1, "merge_and_prune: k must be >= 1");
  require(p < cloud.size() && q < cloud.size(), "merge_and_prune: parent index out of range");
  for (const NeighborList* nl : {&nl_p, &nl_q})
    for (PointIndex id : nl->indices) require(id < cloud.size(), "merge_and_prune: neighbor index out of range");
  std::vector<Candidate> best(k);
  const std::size_t count = merge_and_prune_into(nl_p.indices, nl_q.indices, static_cast<PointIndex>(p),
                                                 static_cast<PointIndex>(q), p_prime, cloud, k, best.data());
  best.resize(count);
  NeighborList out = to_list(best);
  out.truncated = count < k;
  return out;
}

NeighborList brute_force_knn(const PointCloud& cloud, const Vec3& query, std::size_t k,
                             std::size_t exclude) {
  check_k(k, cloud.size(), exclude);
  std::vector<Candidate> all;
  all.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (i == exclude) continue;
    all.push_back({squared_distance(query, cloud.position(i)), static_cast<PointIndex>(i)});
  }
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1), all.end());
  all.resize(k);
  return to_list(all);
}

}  // namespace volut
