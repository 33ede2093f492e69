#include "volut/sr_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "volut/error.hpp"

namespace volut {

namespace {
using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }
}  // namespace

std::size_t effective_dilation(std::size_t d, std::size_t k, double ratio) {
  require(k >= 1 && d >= 1, "sr: k and d must be >= 1");
  const double needed = std::ceil(2.0 * (ratio - 1.0) / static_cast<double>(k) - 1e-9);
  return std::max(d, static_cast<std::size_t>(std::max(1.0, needed)));
}

SrResult super_resolve(const PointCloud& input, std::size_t target_count, const SrConfig& config,
                       const LutTable* lut, std::uint64_t seed) {
  require(!input.empty(), "sr: empty input");
  require(target_count >= input.size(), "sr: target count below input size");
  const auto t_start = Clock::now();
  SrResult result;
  const double ratio = static_cast<double>(target_count) / static_cast<double>(input.size());
  const std::size_t d = config.adapt_dilation ? effective_dilation(config.d, config.k, ratio) : config.d;
  result.dilation = d;
  if (target_count == input.size()) {
    result.cloud = input;
    result.timings.total_s = since(t_start);
    return result;
  }
  const UpsamplePlan plan = plan_upsample(input.size(), ratio, config.k, d, seed);
  require(input.size() + plan.new_point_count == target_count, "sr: plan does not reach the target count");
  InterpolationOutput interp = dilated_midpoint_interpolate(input, plan, config.k, d, config.interpolation);
  result.timings.knn_s = interp.stats.knn_seconds;
  result.timings.pairing_s = interp.stats.pairing_seconds;
  result.timings.neighbor_s = interp.stats.neighbor_seconds;

  auto t0 = Clock::now();
  if (input.has_colors()) colorize(interp, input);
  result.timings.colorize_s = since(t0);

  t0 = Clock::now();
  if (config.refine && lut != nullptr) {
    result.cloud = refine_frame(*lut, interp);
  } else {
    result.cloud = std::move(interp.cloud);
  }
  result.timings.refine_s = since(t0);
  result.timings.total_s = since(t_start);
  return result;
}

}  // namespace volut
