#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "volut/error.hpp"
#include "volut/interpolate.hpp"
#include "volut/octree.hpp"
#include "volut/sr_pipeline.hpp"

using namespace volut;

namespace {

// Coefficient of variation of nearest-neighbor distances.
double nn_cv(const PointCloud& c) {
  const TwoLayerOctree tree = build_octree(c);
  std::vector<double> d(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) d[i] = knn_query(tree, c, c.position(i), 1, i).distances[0];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(d.size())) / mean;
}

template <typename F>
double best_of(int runs, F&& fn) {
  double best = INFINITY;
  for (int r = 0; r < runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

TEST_SUITE("interpolate") {

TEST_CASE("plan_upsample arithmetic") {
  CHECK(plan_upsample(100, 1.0, 4, 2, 1).new_point_count == 0);
  const UpsamplePlan two = plan_upsample(100, 2.0, 4, 2, 1);
  CHECK(two.new_point_count == 100);
  CHECK(std::all_of(two.counts.begin(), two.counts.end(), [](std::uint32_t c) { return c == 1; }));
  const UpsamplePlan half = plan_upsample(100, 2.5, 4, 2, 1);
  CHECK(half.new_point_count == 150);
  CHECK(std::count(half.counts.begin(), half.counts.end(), 2u) == 50);
  CHECK(std::count(half.counts.begin(), half.counts.end(), 1u) == 50);
  CHECK(plan_upsample(100, 2.5, 4, 2, 1).counts == half.counts);
  CHECK(plan_upsample(100, 2.5, 4, 2, 2).counts != half.counts);
  CHECK_THROWS_AS(plan_upsample(100, 0.5, 4, 2, 1), Error);
  try {
    plan_upsample(100, 10.0, 4, 2, 1);
    FAIL("capacity not enforced");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCapacity);
  }
}

TEST_CASE("plan counts stay within d*k and sum to the new point count") {
  gen::for_all(100, 80, [](std::uint64_t seed) {
    gen::Source s(seed);
    const std::size_t n = 1 + s.below(1000), k = 1 + s.below(8), d = 1 + s.below(4);
    const double ratio = 1.0 + s.unit() * static_cast<double>(d * k);
    const UpsamplePlan p = plan_upsample(n, ratio, k, d, seed);
    std::size_t sum = 0;
    for (std::uint32_t c : p.counts) {
      CHECK(c <= d * k);
      sum += c;
    }
    INFO("seed " << seed);
    CHECK(sum == p.new_point_count);
    CHECK(n + p.new_point_count == static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
  });
}

TEST_CASE("two points, ratio 1.5, k=1, d=1") {
  const PointCloud c({{0, 0, 0}, {2, 4, 6}});
  const InterpolationOutput out = dilated_midpoint_interpolate(c, plan_upsample(2, 1.5, 1, 1, 3), 1, 1);
  REQUIRE(out.cloud.size() == 3);
  CHECK(out.cloud.position(2) == Vec3{1, 2, 3});
}

TEST_CASE("midpoints are exact, parents unique and drawn from the dilated set") {
  gen::for_all(12, 81, [](std::uint64_t seed) {
    gen::Source s(seed);
    const std::size_t n = 64 + s.below(800);
    const std::size_t k = 2 + s.below(6), d = 1 + s.below(3);
    const double ratio = 1.0 + s.unit() * std::min<double>(d * k / 2.0, 3.0);
    const PointCloud c = s.below(3) ? gen::uniform_cloud(n, seed) : gen::lattice_cloud(n, seed, 5);
    const InterpolationOutput out = dilated_midpoint_interpolate(c, plan_upsample(n, ratio, k, d, seed), k, d);
    INFO("seed " << seed << " n " << n << " k " << k << " d " << d << " ratio " << ratio);
    CHECK(out.cloud.size() == static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
    std::set<std::pair<PointIndex, PointIndex>> pairs;
    for (std::size_t j = 0; j < out.parents.size(); ++j) {
      const ParentPair& pp = out.parents[j];
      const Vec3& m = out.cloud.position(n + j);
      CHECK(m == midpoint(c.position(pp.p), c.position(pp.q)));
      CHECK(c.bbox().contains(m));
      CHECK(pairs.insert({std::min(pp.p, pp.q), std::max(pp.p, pp.q)}).second);
      const auto dil = oracle::knn(c.positions(), c.position(pp.p), d * k, pp.p);
      CHECK(std::find(dil.begin(), dil.end(), pp.q) != dil.end());
    }
    for (std::size_t i = 0; i < n; ++i) CHECK(out.cloud.position(i) == c.position(i));
  });
}

TEST_CASE("neighbor lists: reuse path is merge_and_prune, exact path is the oracle") {
  const PointCloud c = gen::uniform_cloud(1500, 82);
  const TwoLayerOctree tree = build_octree(c);
  const UpsamplePlan plan = plan_upsample(c.size(), 2.6, 4, 2, 5);
  const InterpolationOutput reuse = dilated_midpoint_interpolate(c, plan, 4, 2);
  InterpolationOptions exact_opts;
  exact_opts.reuse_neighbors = false;
  const InterpolationOutput exact = dilated_midpoint_interpolate(c, plan, 4, 2, exact_opts);
  exact_opts.search = NeighborSearch::kBruteForce;
  const InterpolationOutput brute = dilated_midpoint_interpolate(c, plan, 4, 2, exact_opts);
  REQUIRE(reuse.parents == exact.parents);
  REQUIRE(brute.cloud == exact.cloud);
  for (std::size_t j = 0; j < reuse.parents.size(); ++j) {
    const ParentPair pp = reuse.parents[j];
    const Vec3& m = reuse.cloud.position(c.size() + j);
    const NeighborList want = merge_and_prune(knn_query(tree, c, c.position(pp.p), 4, pp.p),
                                              knn_query(tree, c, c.position(pp.q), 4, pp.q), pp.p, pp.q, m, c, 4);
    const auto got = reuse.neighbor_row(j);
    CHECK(std::vector<PointIndex>(got.begin(), got.end()) == want.indices);
    const auto ex = exact.neighbor_row(j);
    const auto oracle_row = oracle::knn(c.positions(), m, 4);
    CHECK(std::vector<PointIndex>(ex.begin(), ex.end()) == oracle_row);
    const auto br = brute.neighbor_row(j);
    CHECK(std::vector<PointIndex>(br.begin(), br.end()) == oracle_row);
  }
}

TEST_CASE("output size exact for every 0.01 ratio in [1, 8]") {
  const PointCloud c = gen::uniform_cloud(300, 83, true);
  SrConfig cfg;
  std::size_t wrong = 0;
  for (int step = 0; step <= 700; ++step) {
    const double ratio = 1.0 + step / 100.0;
    const auto target = static_cast<std::size_t>(std::llround(ratio * 300.0));
    wrong += super_resolve(c, target, cfg, nullptr, static_cast<std::uint64_t>(step)).cloud.size() != target;
  }
  CHECK(wrong == 0);
}

TEST_CASE("determinism: identical inputs give bit-identical output") {
  const PointCloud c = gen::uniform_cloud(2000, 84, true);
  SrConfig cfg;
  const SrResult a = super_resolve(c, 5123, cfg, nullptr, 42);
  const SrResult b = super_resolve(c, 5123, cfg, nullptr, 42);
  CHECK(a.cloud == b.cloud);
  CHECK_FALSE(super_resolve(c, 5123, cfg, nullptr, 43).cloud == a.cloud);
}

TEST_CASE("effective dilation covers the pair demand") {
  CHECK(effective_dilation(2, 4, 2.0) == 2);
  CHECK(effective_dilation(2, 4, 4.0) == 2);
  CHECK(effective_dilation(2, 4, 8.0) == 4);
  CHECK(effective_dilation(1, 4, 8.0) == 4);
  CHECK(effective_dilation(5, 4, 2.0) == 5);
}

TEST_CASE("dense cluster: too few distinct pairs is reported, not silent") {
  // Five points, k=1, d=1: at most 4 distinct 1-NN pairs exist for 5 new points.
  const PointCloud c({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}});
  try {
    dilated_midpoint_interpolate(c, plan_upsample(5, 2.0, 1, 1, 1), 1, 1);
    FAIL("shortfall not reported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCapacity);
  }
}

TEST_CASE("uniformity: dilation lowers the NN-distance spread on a skewed cloud") {
  // The effect is small next to the spread between the two clusters, so the
  // direction is checked on the mean over a fixed set of fixtures.
  double cv1 = 0.0, cv2 = 0.0;
  gen::for_all(8, 85, [&](std::uint64_t seed) {
    const PointCloud c = gen::two_clusters(4000, 0.9, seed);
    cv1 += nn_cv(dilated_midpoint_interpolate(c, plan_upsample(c.size(), 2.0, 4, 1, seed), 4, 1).cloud);
    cv2 += nn_cv(dilated_midpoint_interpolate(c, plan_upsample(c.size(), 2.0, 4, 2, seed), 4, 2).cloud);
  });
  MESSAGE("mean NN-distance CV, d=1: " << cv1 / 8 << ", d=2: " << cv2 / 8);
  CHECK(cv2 < cv1);
}

TEST_CASE("colorize: nearer parent, ties to the source") {
  const PointCloud c({{0, 0, 0}, {2, 0, 0}, {10, 0, 0}}, {Rgb{255, 0, 0}, Rgb{0, 0, 255}, Rgb{0, 255, 0}});
  InterpolationOutput out;
  out.original_count = 3;
  out.parents = {{0, 1}, {1, 0}};
  out.neighbor_k = 1;
  out.neighbor_counts = {0, 0};
  out.neighbor_indices = {0, 0};
  out.cloud = PointCloud({c.position(0), c.position(1), c.position(2), {1, 0, 0}, {1, 0, 0}});
  REQUIRE(colorize(out, c));
  CHECK(out.cloud.color(3) == Rgb{255, 0, 0});
  CHECK(out.cloud.color(4) == Rgb{0, 0, 255});
  CHECK(out.cloud.color(2) == Rgb{0, 255, 0});
}

TEST_CASE("colorize: shared parent color propagates; uncolored input is a no-op") {
  gen::Source s(86);
  std::vector<Vec3> pos;
  for (int i = 0; i < 500; ++i) pos.push_back(gen::point_in_box(s));
  const PointCloud c(pos, std::vector<Rgb>(500, Rgb{9, 8, 7}));
  InterpolationOutput out = dilated_midpoint_interpolate(c, plan_upsample(500, 3.0, 4, 2, 1), 4, 2);
  REQUIRE(colorize(out, c));
  for (const Rgb& col : out.cloud.colors()) CHECK(col == Rgb{9, 8, 7});

  const PointCloud bare(pos);
  InterpolationOutput out2 = dilated_midpoint_interpolate(bare, plan_upsample(500, 2.0, 4, 2, 1), 4, 2);
  CHECK_FALSE(colorize(out2, bare));
  CHECK_FALSE(out2.cloud.has_colors());
}

TEST_CASE("colorize costs under 10% of interpolation at 100K points") {
  const PointCloud c = gen::uniform_cloud(100000, 87, true);
  const UpsamplePlan plan = plan_upsample(c.size(), 2.0, 4, 2, 1);
  InterpolationOutput out;
  const double interp = best_of(3, [&] { out = dilated_midpoint_interpolate(c, plan, 4, 2); });
  const double color = best_of(3, [&] {
    InterpolationOutput copy = out;
    colorize(copy, c);
  });
  MESSAGE("interpolate " << interp << " s, colorize " << color << " s");
  CHECK(color < 0.10 * interp);
}

}  // TEST_SUITE
