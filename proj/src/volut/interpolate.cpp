#include "volut/interpolate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <memory>

#include "volut/error.hpp"
#include "volut/logging.hpp"
#include "volut/rng.hpp"

namespace volut {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t pair_key(PointIndex a, PointIndex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Open-addressing set of unordered pair keys; sized once, never rehashed.
class PairSet {
 public:
  explicit PairSet(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected + 16) cap <<= 1;
    slots_.assign(cap, kEmpty);
    mask_ = cap - 1;
  }

  // Returns false if the key was already present.
  bool insert(std::uint64_t key) {
    if (2 * (size_ + 1) > slots_.size()) grow();
    std::size_t i = splitmix64(key) & mask_;
    while (slots_[i] != kEmpty) {
      if (slots_[i] == key) return false;
      i = (i + 1) & mask_;
    }
    slots_[i] = key;
    ++size_;
    return true;
  }

 private:
  static constexpr std::uint64_t kEmpty = UINT64_MAX;  // (a, b) with a < b never packs to this

  void grow() {
    std::vector<std::uint64_t> old;
    old.swap(slots_);
    slots_.assign(old.size() * 2, kEmpty);
    mask_ = slots_.size() - 1;
    size_ = 0;
    for (std::uint64_t k : old)
      if (k != kEmpty) insert(k);
  }

  std::vector<std::uint64_t> slots_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

// Draws partners for one source uniformly from `candidates` without
// replacement, skipping pairs already taken, until `want` are accepted or
// `max_draws` candidates have been examined.
std::size_t draw_partners(PointIndex source, std::span<const PointIndex> candidates, std::size_t want,
                          std::size_t max_draws, SplitMixRng& rng, PairSet& used,
                          std::vector<PointIndex>& pool, std::vector<ParentPair>& out) {
  pool.assign(candidates.begin(), candidates.end());
  std::size_t accepted = 0;
  const std::size_t limit = std::min(max_draws, pool.size());
  for (std::size_t draw = 0; draw < limit && accepted < want; ++draw) {
    const std::size_t j = draw + static_cast<std::size_t>(uniform_below(rng, pool.size() - draw));
    std::swap(pool[draw], pool[j]);
    const PointIndex partner = pool[draw];
    if (used.insert(pair_key(source, partner))) {
      out.push_back({source, partner});
      ++accepted;
    }
  }
  return accepted;
}

}  // namespace

UpsamplePlan plan_upsample(std::size_t n_points, double ratio, std::size_t k, std::size_t d,
                           std::uint64_t seed) {
  require(std::isfinite(ratio) && ratio >= 1.0,
          "upsample plan: ratio " + std::to_string(ratio) + " must be >= 1");
  require(k >= 1 && d >= 1, "upsample plan: k and d must be >= 1");
  const double capacity = static_cast<double>(d * k);
  if (ratio - 1.0 > capacity)
    fail(ErrorCode::kCapacity, "upsample plan: ratio " + std::to_string(ratio) +
                                   " exceeds per-point capacity 1 + d*k = " +
                                   std::to_string(1 + d * k));
  UpsamplePlan plan;
  plan.ratio = ratio;
  plan.source_count = n_points;
  plan.seed = seed;
  plan.k = k;
  plan.d = d;
  plan.counts.assign(n_points, 0);
  if (n_points == 0) return plan;
  const auto total = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_points)));
  plan.new_point_count = total - n_points;
  const std::size_t base = plan.new_point_count / n_points;
  const std::size_t extra = plan.new_point_count % n_points;
  std::fill(plan.counts.begin(), plan.counts.end(), static_cast<std::uint32_t>(base));
  if (extra > 0) {
    std::vector<std::size_t> order(n_points);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0xA11CA7E));
    for (std::size_t i = 0; i < extra; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n_points - i));
      std::swap(order[i], order[j]);
      ++plan.counts[order[i]];
    }
  }
  return plan;
}

InterpolationOutput dilated_midpoint_interpolate(const PointCloud& cloud, const UpsamplePlan& plan,
                                                 std::size_t k, std::size_t d,
                                                 const InterpolationOptions& options) {
  const std::size_t n = cloud.size();
  require(plan.source_count == n && plan.counts.size() == n,
          "interpolate: plan was made for " + std::to_string(plan.source_count) +
              " points, cloud has " + std::to_string(n));
  require(k >= 1 && d >= 1, "interpolate: k and d must be >= 1");
  const std::size_t dk = d * k;
  for (std::uint32_t c : plan.counts) {
    if (c > dk) fail(ErrorCode::kCapacity, "interpolate: per-point count exceeds d*k");
  }

  InterpolationOutput out;
  out.original_count = n;
  if (plan.new_point_count == 0) {
    out.cloud = PointCloud(std::vector<Vec3>(cloud.positions().begin(), cloud.positions().end()));
    return out;
  }
  if (dk > n - 1)
    fail(ErrorCode::kCapacity, "interpolate: d*k=" + std::to_string(dk) + " exceeds N-1=" +
                                   std::to_string(n - 1));

  // Dilated neighborhoods of every source; partners need theirs for reuse.
  auto t0 = Clock::now();
  // Row i: the d*k nearest neighbors of source i, nearest first.
  std::vector<PointIndex> dilated;
  if (options.search == NeighborSearch::kOctree) {
    dilated = TwoLayerOctree(cloud).all_points_knn(cloud, dk);
  } else {
    dilated.resize(n * dk);
    for (std::size_t i = 0; i < n; ++i) {
      const NeighborList nl = brute_force_knn(cloud, cloud.position(i), dk, i);
      std::copy(nl.indices.begin(), nl.indices.end(), dilated.begin() + static_cast<std::ptrdiff_t>(i * dk));
    }
  }
  auto row = [&](std::size_t i) { return std::span<const PointIndex>(dilated.data() + i * dk, dk); };
  out.stats.knn_seconds = seconds_since(t0);

  // Partner selection runs in index order so pair dedup is order-independent
  // of any parallel neighbor search above.
  t0 = Clock::now();
  const std::size_t max_draws = options.max_attempts_per_point ? options.max_attempts_per_point : dk;
  PairSet used(plan.new_point_count);
  std::vector<PointIndex> pool;
  std::vector<std::vector<ParentPair>> per_source(n);
  std::size_t shortfall = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (plan.counts[i] == 0) continue;
    per_source[i].reserve(plan.counts[i]);
    SplitMixRng rng(derive_seed(plan.seed, i));
    const std::size_t got = draw_partners(static_cast<PointIndex>(i), row(i), plan.counts[i],
                                          max_draws, rng, used, pool, per_source[i]);
    if (got < plan.counts[i]) {
      shortfall += plan.counts[i] - got;
      ++out.stats.reduced_sources;
    }
  }
  if (shortfall > 0) {
    log().debug("interpolate: {} sources exhausted their dilated set, redistributing {} points",
                out.stats.reduced_sources, shortfall);
    out.stats.redistributed_points = shortfall;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed(plan.seed, n));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(shuffle, n - i));
      std::swap(order[i], order[j]);
    }
    for (std::size_t o = 0; o < n && shortfall > 0; ++o) {
      const std::size_t i = order[o];
      SplitMixRng rng(derive_seed(plan.seed, n + 1 + i));
      shortfall -= draw_partners(static_cast<PointIndex>(i), row(i), shortfall, dk, rng, used,
                                 pool, per_source[i]);
    }
    if (shortfall > 0)
      fail(ErrorCode::kCapacity,
           "interpolate: dilated neighborhoods hold too few distinct pairs; " +
               std::to_string(shortfall) + " new points could not be placed (raise d)");
  }
  out.stats.pairing_seconds = seconds_since(t0);

  t0 = Clock::now();
  std::vector<Vec3> positions(cloud.positions().begin(), cloud.positions().end());
  positions.reserve(n + plan.new_point_count);
  out.parents.reserve(plan.new_point_count);
  const std::size_t list_k = std::min(k, n);
  out.neighbor_k = list_k;
  out.neighbor_indices.resize(plan.new_point_count * list_k);
  out.neighbor_counts.resize(plan.new_point_count);
  std::vector<Candidate> best(list_k);
  std::unique_ptr<TwoLayerOctree> exact_tree;
  if (!options.reuse_neighbors && options.search == NeighborSearch::kOctree)
    exact_tree = std::make_unique<TwoLayerOctree>(cloud);
  for (std::size_t i = 0; i < n; ++i) {
    for (const ParentPair& pair : per_source[i]) {
      const Vec3 m = midpoint(cloud.position(pair.p), cloud.position(pair.q));
      positions.push_back(m);
      out.parents.push_back(pair);
      const std::size_t j = out.parents.size() - 1;
      PointIndex* dst = out.neighbor_indices.data() + j * list_k;
      if (options.reuse_neighbors) {
        // The first k entries of a dilated row are the parent's own kNN.
        const std::size_t c = merge_and_prune_into(row(pair.p).first(std::min(k, dk)), row(pair.q).first(std::min(k, dk)),
                                                   pair.p, pair.q, m, cloud, list_k, best.data());
        for (std::size_t t = 0; t < c; ++t) dst[t] = best[t].index;
        out.neighbor_counts[j] = static_cast<std::uint32_t>(c);
      } else {
        const NeighborList nl = exact_tree ? exact_tree->query(m, list_k, kNoExclusion) : brute_force_knn(cloud, m, list_k);
        std::copy(nl.indices.begin(), nl.indices.end(), dst);
        out.neighbor_counts[j] = static_cast<std::uint32_t>(nl.size());
      }
    }
  }
  out.cloud = PointCloud(std::move(positions));
  out.stats.neighbor_seconds = seconds_since(t0);
  return out;
}

NeighborList InterpolationOutput::neighbors(std::size_t j) const {
  require(j < parents.size(), "interpolation output: new point index out of range");
  NeighborList nl;
  const Vec3& m = cloud.position(original_count + j);
  for (PointIndex id : neighbor_row(j)) {
    nl.indices.push_back(id);
    nl.distances.push_back(std::sqrt(squared_distance(m, cloud.position(id))));
  }
  nl.truncated = nl.size() < neighbor_k;
  return nl;
}

bool colorize(InterpolationOutput& output, const PointCloud& original) {
  if (!original.has_colors()) {
    log().warn("colorize: original cloud has no colors, leaving output uncolored");
    return false;
  }
  require(original.size() == output.original_count, "colorize: original cloud size mismatch");
  std::vector<Rgb> colors(original.colors().begin(), original.colors().end());
  colors.reserve(output.cloud.size());
  for (std::size_t j = 0; j < output.parents.size(); ++j) {
    const ParentPair& pair = output.parents[j];
    const Vec3& m = output.cloud.position(output.original_count + j);
    const double dp = squared_distance(m, original.position(pair.p));
    const double dq = squared_distance(m, original.position(pair.q));
    colors.push_back(dq < dp ? original.color(pair.q) : original.color(pair.p));
  }
  std::vector<Vec3> positions(output.cloud.positions().begin(), output.cloud.positions().end());
  output.cloud = PointCloud(std::move(positions), std::move(colors));
  return true;
}

}  // namespace volut
