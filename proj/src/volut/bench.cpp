#include "volut/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>

#include "volut/error.hpp"
#include "volut/interpolate.hpp"
#include "volut/octree.hpp"
#include "volut/rng.hpp"
#include "volut/sr_pipeline.hpp"
#include "volut/synthetic.hpp"

namespace volut {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double median_time(int repeats, F&& f) {
  std::vector<double> t;
  for (int i = 0; i < std::max(1, repeats); ++i) {
    const auto t0 = Clock::now();
    f(i);
    t.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

json knn_suite(const BenchOptions& o) {
  const PointCloud cloud = synthetic_frame(o.points, 0.0, o.seed);
  const std::size_t k = o.k * o.d;
  std::unique_ptr<TwoLayerOctree> tree;
  const double build = median_time(o.repeats, [&](int) { tree = std::make_unique<TwoLayerOctree>(cloud); });
  const double query = median_time(o.repeats, [&](int) {
    for (std::size_t i = 0; i < cloud.size(); ++i) tree->query(cloud.position(i), k, i);
  });
  const std::size_t sample = std::min<std::size_t>(cloud.size(), 2000);
  const double brute = median_time(1, [&](int) {
    for (std::size_t i = 0; i < sample; ++i) brute_force_knn(cloud, cloud.position(i), k, i);
  });
  const double brute_per_query = brute / static_cast<double>(sample);
  const double octree_per_query = query / static_cast<double>(cloud.size());
  return {{"suite", "knn"},
          {"points", cloud.size()},
          {"k", k},
          {"octree_build_s", build},
          {"octree_query_all_s", query},
          {"octree_per_query_s", octree_per_query},
          {"brute_force_per_query_s", brute_per_query},
          {"brute_force_sampled_queries", sample},
          {"speedup", brute_per_query / octree_per_query}};
}

json interpolation_suite(const BenchOptions& o) {
  json rows = json::array();
  for (double ratio : o.ratios) {
    const std::size_t d = effective_dilation(o.d, o.k, ratio);
    if (o.brute_force_limit == 0 || o.points <= o.brute_force_limit) {
      const InterpolationTiming t = time_interpolation(o.points, ratio, o.k, d, o.seed, o.repeats);
      rows.push_back({{"ratio", ratio},
                      {"d", d},
                      {"octree_reuse_s", t.octree_reuse_s},
                      {"brute_force_s", t.brute_force_s},
                      {"brute_force_extrapolated", false},
                      {"speedup", t.brute_force_s / t.octree_reuse_s}});
    } else {
      // Brute force is quadratic: time it on a subset and scale by N^2.
      const InterpolationTiming full = time_interpolation(o.points, ratio, o.k, d, o.seed, o.repeats);
      const InterpolationTiming sub = time_interpolation(o.brute_force_limit, ratio, o.k, d, o.seed, 1);
      const double scale = std::pow(static_cast<double>(o.points) / static_cast<double>(o.brute_force_limit), 2.0);
      const double brute = sub.brute_force_s * scale;
      rows.push_back({{"ratio", ratio},
                      {"d", d},
                      {"octree_reuse_s", full.octree_reuse_s},
                      {"brute_force_s", brute},
                      {"brute_force_extrapolated", true},
                      {"speedup", brute / full.octree_reuse_s}});
    }
  }
  return {{"suite", "interpolation"}, {"points", o.points}, {"k", o.k}, {"results", rows}};
}

json lut_suite(const BenchOptions& o, const LutTable* given) {
  std::unique_ptr<LutTable> built;
  double build_s = 0.0;
  if (given == nullptr) {
    build_s = median_time(1, [&](int) {
      built = std::make_unique<LutTable>(build_lut(laplacian_refiner(0.5), o.rf_size, o.bins));
    });
    given = built.get();
  }
  const double ratio = o.ratios.empty() ? 2.0 : o.ratios.front();
  const std::size_t input = std::max<std::size_t>(64, static_cast<std::size_t>(std::llround(o.points / ratio)));
  const PointCloud cloud = synthetic_frame(input, 0.0, o.seed);
  const std::size_t d = effective_dilation(o.d, o.k, ratio);
  const UpsamplePlan plan = plan_upsample(cloud.size(), ratio, o.k, d, o.seed);
  const InterpolationOutput out = dilated_midpoint_interpolate(cloud, plan, o.k, d);
  const double refine = median_time(o.repeats, [&](int) { refine_frame(*given, out); });
  return {{"suite", "lut"},
          {"n", given->rf_size()},
          {"b", given->bins()},
          {"table_bytes", lut_size_bytes(given->rf_size(), given->bins())},
          {"build_s", build_s},
          {"refined_points", out.new_point_count()},
          {"refine_s", refine},
          {"per_point_s", refine / static_cast<double>(std::max<std::size_t>(1, out.new_point_count()))}};
}

json e2e_suite(const BenchOptions& o, const LutTable* lut) {
  const std::vector<double> times = time_sr_ratios(o.points, o.ratios, o.k, o.d, lut, o.seed, o.repeats);
  json rows = json::array();
  for (std::size_t i = 0; i < o.ratios.size(); ++i)
    rows.push_back({{"ratio", o.ratios[i]}, {"frame_s", times[i]}, {"fps", 1.0 / times[i]}});
  const auto [mn, mx] = std::minmax_element(times.begin(), times.end());
  return {{"suite", "e2e"},
          {"input_points", o.points},
          {"k", o.k},
          {"d", o.d},
          {"refine", lut != nullptr},
          {"results", rows},
          {"max_over_min", *mx / *mn}};
}

}  // namespace

InterpolationTiming time_interpolation(std::size_t points, double ratio, std::size_t k, std::size_t d,
                                       std::uint64_t seed, int repeats, std::size_t sampled_queries) {
  const PointCloud cloud = synthetic_frame(points, 0.0, seed);
  const UpsamplePlan plan = plan_upsample(cloud.size(), ratio, k, d, seed);
  InterpolationTiming t;
  InterpolationOptions fast;
  t.octree_reuse_s = median_time(repeats, [&](int) { dilated_midpoint_interpolate(cloud, plan, k, d, fast); });
  InterpolationOptions slow;
  slow.search = NeighborSearch::kBruteForce;
  slow.reuse_neighbors = false;
  if (sampled_queries == 0) {
    t.brute_force_s = median_time(1, [&](int) { dilated_midpoint_interpolate(cloud, plan, k, d, slow); });
    return t;
  }
  const std::size_t n = cloud.size();
  const std::size_t s = std::min(sampled_queries, n);
  const std::size_t stride = n / s;
  const double source = median_time(1, [&](int) {
    for (std::size_t i = 0; i < s; ++i) brute_force_knn(cloud, cloud.position(i * stride), k * d, i * stride);
  });
  const double mid = median_time(1, [&](int) {
    for (std::size_t i = 0; i < s; ++i) {
      const Vec3& a = cloud.position(i * stride);
      const Vec3& b = cloud.position((i * stride + 1) % n);
      brute_force_knn(cloud, {(a.x + b.x) * 0.5f, (a.y + b.y) * 0.5f, (a.z + b.z) * 0.5f}, k);
    }
  });
  const double per = 1.0 / static_cast<double>(s);
  t.brute_force_s = source * per * static_cast<double>(n) + mid * per * static_cast<double>(plan.new_point_count);
  return t;
}

std::vector<double> time_sr_ratios(std::size_t input_points, const std::vector<double>& ratios, std::size_t k,
                                   std::size_t d, const LutTable* lut, std::uint64_t seed, int repeats) {
  const PointCloud input = synthetic_frame(input_points, 0.0, seed);
  SrConfig config;
  config.k = k;
  config.d = d;
  std::vector<double> out;
  for (double r : ratios) {
    require(r >= 1.0, "bench: ratios must be >= 1");
    const auto target = static_cast<std::size_t>(std::llround(r * static_cast<double>(input.size())));
    out.push_back(median_time(repeats, [&](int i) { super_resolve(input, target, config, lut, derive_seed(seed, i)); }));
  }
  return out;
}

std::string run_bench(const BenchOptions& options, const LutTable* lut) {
  require(options.points >= 64, "bench: need at least 64 points");
  json j;
  if (options.suite == "knn") {
    j = knn_suite(options);
  } else if (options.suite == "interpolation") {
    j = interpolation_suite(options);
  } else if (options.suite == "lut") {
    j = lut_suite(options, lut);
  } else if (options.suite == "e2e") {
    j = e2e_suite(options, lut);
  } else {
    fail(ErrorCode::kInvalidArgument, "bench: unknown suite '" + options.suite + "'");
  }
  j["repeats"] = options.repeats;
  j["seed"] = options.seed;
  return j.dump(2) + "\n";
}

}  // namespace volut
