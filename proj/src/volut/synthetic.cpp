#include "volut/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "volut/error.hpp"
#include "volut/rng.hpp"
#include "volut/server.hpp"

namespace volut {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gaussian(Rng& rng) {
  // Box-Muller on the hand-rolled uniform, so results do not depend on the
  // standard library's distribution implementation.
  const double u1 = 1.0 - uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

Vec3 unit_sphere_point(Rng& rng) {
  const double u = 2.0 * uniform_unit(rng) - 1.0;
  const double phi = kTwoPi * uniform_unit(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
  return {static_cast<float>(s * std::cos(phi)), static_cast<float>(s * std::sin(phi)), static_cast<float>(u)};
}

}  // namespace

PointCloud sample_sphere(std::size_t n, std::uint64_t seed, double radius) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) {
    const Vec3 u = unit_sphere_point(rng);
    p = {static_cast<float>(radius * u.x), static_cast<float>(radius * u.y), static_cast<float>(radius * u.z)};
  }
  return PointCloud(std::move(pts));
}

PointCloud sample_torus(std::size_t n, std::uint64_t seed, double major, double minor) {
  require(major > minor && minor > 0.0, "torus: need major > minor > 0");
  Rng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(n);
  while (pts.size() < n) {
    const double u = kTwoPi * uniform_unit(rng);
    const double v = kTwoPi * uniform_unit(rng);
    // Area element is proportional to (major + minor cos v).
    if (uniform_unit(rng) * (major + minor) > major + minor * std::cos(v)) continue;
    const double w = major + minor * std::cos(v);
    pts.push_back({static_cast<float>(w * std::cos(u)), static_cast<float>(w * std::sin(u)),
                   static_cast<float>(minor * std::sin(v))});
  }
  return PointCloud(std::move(pts));
}

PointCloud sample_cube(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (auto& p : pts)
    p = {static_cast<float>(uniform_unit(rng)), static_cast<float>(uniform_unit(rng)),
         static_cast<float>(uniform_unit(rng))};
  return PointCloud(std::move(pts));
}

PointCloud synthetic_frame(std::size_t n, double t, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  std::vector<Rgb> cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 u = unit_sphere_point(rng);
    const double bump = 0.15 * std::sin(3.0 * u.x + 1.3 * t) * std::cos(2.0 * u.y - 0.7 * t) +
                        0.1 * std::sin(4.0 * u.z + 2.1 * t);
    const double r = 0.8 * (1.0 + bump);
    pts[i] = {static_cast<float>(r * u.x), static_cast<float>(1.6 * r * u.y), static_cast<float>(r * u.z)};
    auto channel = [](double v) { return static_cast<std::uint8_t>(std::clamp(127.5 * (v + 1.0), 0.0, 255.0)); };
    cols[i] = {channel(u.x), channel(u.y), channel(std::sin(5.0 * bump))};
  }
  return PointCloud(std::move(pts), std::move(cols));
}

ChunkManifest synthetic_manifest(const VideoSpec& spec) {
  require(spec.chunks > 0 && spec.frames_per_chunk > 0 && spec.points_per_frame > 0,
          "synthetic video: sizes must be positive");
  require(spec.point_jitter >= 0.0 && spec.point_jitter < 1.0, "synthetic video: jitter must lie in [0, 1)");
  ChunkManifest m;
  m.video_id = spec.video_id;
  m.chunk_duration_s = spec.chunk_duration_s;
  m.frames_per_chunk = spec.frames_per_chunk;
  m.has_colors = true;
  Rng rng(derive_seed(spec.seed, 1));
  const double base = static_cast<double>(spec.points_per_frame);
  m.chunk_points.resize(spec.chunks);
  for (auto& c : m.chunk_points) {
    c.resize(spec.frames_per_chunk);
    for (auto& n : c) {
      const double f = 1.0 + spec.point_jitter * (2.0 * uniform_unit(rng) - 1.0);
      n = static_cast<std::uint32_t>(std::max(16.0, std::round(base * f)));
    }
  }
  m.validate();
  return m;
}

ChunkManifest write_synthetic_video(const std::filesystem::path& dir, const VideoSpec& spec) {
  const ChunkManifest m = synthetic_manifest(spec);
  const double frame_dt = spec.chunk_duration_s / static_cast<double>(spec.frames_per_chunk);
  for (std::size_t c = 0; c < m.chunk_count(); ++c) {
    std::filesystem::create_directories(frame_path(dir, c, 0).parent_path());
    for (std::size_t f = 0; f < m.frames_per_chunk; ++f) {
      const double t = static_cast<double>(c * m.frames_per_chunk + f) * frame_dt;
      const PointCloud frame =
          synthetic_frame(m.chunk_points[c][f], t, derive_seed(spec.seed, 1000 + c * m.frames_per_chunk + f));
      save_ply(frame, frame_path(dir, c, f), PlyFormat::kBinary);
    }
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

NetworkTrace synthetic_lte_trace(double mean_mbps, double std_mbps, double duration_s, double step_s,
                                 std::uint64_t seed) {
  require(mean_mbps > 0.0 && std_mbps >= 0.0, "lte trace: bad mean/std");
  require(duration_s > 0.0 && step_s > 0.0, "lte trace: bad duration/step");
  Rng rng(seed);
  constexpr double kPhi = 0.8;  // lag-1 correlation
  const double innovation = std_mbps * std::sqrt(1.0 - kPhi * kPhi);
  double x = 0.0;
  std::vector<TraceSample> samples;
  for (double t = 0.0; t < duration_s; t += step_s) {
    x = kPhi * x + innovation * gaussian(rng);
    const double mbps = std::max(0.05 * mean_mbps, mean_mbps + x);
    samples.push_back({std::round(t * 1000.0) / 1000.0, std::round(mbps * 1000.0) * 1e3});
  }
  return NetworkTrace(std::move(samples));
}

}  // namespace volut
