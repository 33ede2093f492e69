#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

std::vector<std::uint32_t> knn(std::span<const volut::Vec3> points, const volut::Vec3& q, std::size_t k,
                               std::size_t exclude) {
  std::vector<std::pair<double, std::uint32_t>> all;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == exclude) continue;
    const double dx = static_cast<double>(points[i].x) - static_cast<double>(q.x);
    const double dy = static_cast<double>(points[i].y) - static_cast<double>(q.y);
    const double dz = static_cast<double>(points[i].z) - static_cast<double>(q.z);
    all.emplace_back(dx * dx + dy * dy + dz * dz, static_cast<std::uint32_t>(i));
  }
  std::sort(all.begin(), all.end());
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

double chamfer(std::span<const volut::Vec3> a, std::span<const volut::Vec3> b) {
  auto directed = [](std::span<const volut::Vec3> from, std::span<const volut::Vec3> to) {
    long double sum = 0.0L;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : to) {
        const double dx = static_cast<double>(p.x) - r.x, dy = static_cast<double>(p.y) - r.y,
                     dz = static_cast<double>(p.z) - r.z;
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      sum += best;
    }
    return static_cast<double>(sum / static_cast<long double>(from.size()));
  };
  return directed(a, b) + directed(b, a);
}

std::uint32_t crc32c(std::string_view bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char c : bytes) {
    crc ^= c;
    for (int bit = 0; bit < 8; ++bit) crc = (crc >> 1) ^ (0x82F63B78u & (0u - (crc & 1u)));
  }
  return ~crc;
}

double round_to_half(double x) {
  if (x == 0.0 || std::isnan(x)) return x;
  const double mag = std::fabs(x);
  // Quantum is 2^(e-10) for normals, fixed at 2^-24 below 2^-14.
  const int e = std::max(static_cast<int>(std::floor(std::log2(mag))), -14);
  const double quantum = std::ldexp(1.0, e - 10);
  double r = std::nearbyint(mag / quantum) * quantum;
  if (r >= 65520.0) r = std::numeric_limits<double>::infinity();
  else if (r > 65504.0) r = 65504.0;
  return std::copysign(r, x);
}

double laplacian_at_bins(std::span<const std::uint32_t> q, std::uint32_t bins, double lambda) {
  auto rep = [bins](std::uint32_t v) {
    return std::clamp(2.0 * (v + 0.5) / (bins - 1.0) - 1.0, -1.0, 1.0);
  };
  double mean = 0.0;
  for (std::size_t i = 1; i < q.size(); ++i) mean += rep(q[i]);
  mean /= static_cast<double>(q.size() - 1);
  return lambda * (mean - rep(q[0]));
}

volut::Vec3 refine_laplacian(std::span<const volut::Vec3> slots, std::uint32_t bins, double lambda) {
  const std::size_t n = slots.size();
  double c[3] = {0, 0, 0};
  for (const volut::Vec3& p : slots)
    for (int a = 0; a < 3; ++a) c[a] += p[a];
  for (double& v : c) v /= static_cast<double>(n);
  double r = 0.0;
  for (const volut::Vec3& p : slots) {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) s += (p[a] - c[a]) * (p[a] - c[a]);
    r = std::max(r, std::sqrt(s));
  }
  if (r == 0.0) return slots[0];
  volut::Vec3 out;
  for (int a = 0; a < 3; ++a) {
    std::vector<std::uint32_t> q;
    for (const volut::Vec3& p : slots) {
      const double v = std::clamp((p[a] - c[a]) / r, -1.0, 1.0);
      const double f = std::floor((v + 1.0) / 2.0 * (bins - 1.0));
      q.push_back(static_cast<std::uint32_t>(std::clamp(f, 0.0, bins - 1.0)));
    }
    const double off = round_to_half(std::clamp(laplacian_at_bins(q, bins, lambda), -1.0, 1.0));
    out[a] = static_cast<float>(slots[0][a] + off * r);
  }
  return out;
}

std::pair<double, double> mpc(const MpcProblem& p) {
  const std::size_t h = p.bytes.size();
  const std::size_t g = p.grid.size();
  std::vector<std::size_t> idx(h, 0);
  double best_value = -std::numeric_limits<double>::infinity();
  double best_ratio = 0.0;
  while (true) {
    double buffer = p.buffer_s;
    double total = 0.0;
    double prev_q = p.has_prev ? p.curve(p.prev_ratio) : p.curve(p.grid[idx[0]]);
    for (std::size_t s = 0; s < h; ++s) {
      const double r = p.grid[idx[s]];
      const double download = 8.0 * p.bytes[s](r) / p.throughput_bps;
      const double sr = static_cast<double>(p.frames) * p.sr_per_frame_s;
      const double stall = p.startup && s == 0 ? 0.0 : std::max(0.0, download + sr - buffer);
      buffer = std::max(0.0, buffer - download - sr) + p.chunk_s;
      const double q = p.curve(r);
      double v = std::fabs(q - prev_q);
      if (q < prev_q) v *= p.drop;
      total += p.alpha * q - p.beta * v - p.gamma * stall;
      prev_q = q;
    }
    const double first = p.grid[idx[0]];
    if (total > best_value + 1e-12 || (std::fabs(total - best_value) <= 1e-12 && first > best_ratio)) {
      best_value = std::max(total, best_value);
      best_ratio = first;
    }
    std::size_t s = 0;
    while (s < h && ++idx[s] == g) idx[s++] = 0;
    if (s == h) break;
  }
  return {best_ratio, best_value};
}

}  // namespace oracle
