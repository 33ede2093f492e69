// Acceptance run: one PASS/FAIL line per criterion, each judged at its
// stated tolerance and time budget. Usage: volut_acceptance [id...]
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "volut/abr.hpp"
#include "volut/bench.hpp"
#include "volut/lut.hpp"
#include "volut/manifest.hpp"
#include "volut/metrics.hpp"
#include "volut/octree.hpp"
#include "volut/sampling.hpp"
#include "volut/server.hpp"
#include "volut/session.hpp"
#include "volut/sr_pipeline.hpp"
#include "volut/synthetic.hpp"
#include "volut/trace.hpp"
#include "volut/wire.hpp"

using namespace volut;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string report;  // deterministic output, compared by criterion 12
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::filesystem::path kData = VOLUT_DATA_DIR;

const LutTable& lut_4_16() {
  static const LutTable t = build_lut(laplacian_refiner(0.5), 4, 16);
  return t;
}

// 1. Table sizes: b^n entries per axis, 3 axes, 2 bytes each.
Outcome table_sizes() {
  struct Row {
    std::size_t n;
    std::uint32_t b;
    const char* label;
  };
  const Row rows[] = {{3, 128, "12 MB"},  {3, 64, "1.5 MB"},  {4, 128, "1.61 GB"},
                      {4, 64, "100 MB"},  {5, 128, "201 GB"}, {5, 64, "6.25 GB"}};
  Outcome o{true, "", ""};
  for (const Row& r : rows) {
    std::uint64_t want = 6;
    for (std::size_t i = 0; i < r.n; ++i) want *= r.b;
    const std::uint64_t got = lut_size_bytes(r.n, r.b);
    o.pass = o.pass && got == want;
    o.detail += fmt("(%zu,%u)=%llu B [%s] ", r.n, r.b, static_cast<unsigned long long>(got), r.label);
  }
  return o;
}

// 2. Octree kNN and dilated neighborhoods against a full sort.
Outcome knn_exactness() {
  std::size_t checked = 0, wrong = 0;
  for (std::uint64_t seed : {1, 2}) {
    const PointCloud cloud = gen::uniform_cloud(2048, seed);
    const TwoLayerOctree tree = build_octree(cloud);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      // A (distance, index) full sort: every shorter list is a prefix.
      const auto order = oracle::knn(cloud.positions(), cloud.position(i), 64, i);
      for (std::size_t k : {4, 8, 16}) {
        const auto q = knn_query(tree, cloud, cloud.position(i), k, i).indices;
        ++checked;
        wrong += !std::equal(q.begin(), q.end(), order.begin(), order.begin() + k) || q.size() != k;
        for (std::size_t d : {1, 2, 4}) {
          const auto n = dilated_neighborhood(tree, cloud, i, k, d).indices;
          ++checked;
          wrong += n.size() != d * k || !std::equal(n.begin(), n.end(), order.begin());
        }
      }
    }
  }
  return {wrong == 0, fmt("%zu/%zu lists identical (2 clouds x 2048 queries x k{4,8,16} x {knn, d1, d2, d4})",
                          checked - wrong, checked)};
}

// 3. Table lookup against direct refiner evaluation, plus symmetry.
Outcome lut_oracle() {
  const LutTable& t = lut_4_16();
  gen::Source s(31);
  double worst = 0.0;  // in units of the binary16 step at the radius
  for (int c = 0; c < 10000; ++c) {
    std::vector<Vec3> slots;
    const Vec3 base = gen::point_in_box(s, 10.0);
    const double spread = s.range(1e-3, 3.0);
    for (int i = 0; i < 4; ++i)
      slots.push_back({static_cast<float>(base.x + s.range(-spread, spread)),
                       static_cast<float>(base.y + s.range(-spread, spread)),
                       static_cast<float>(base.z + s.range(-spread, spread))});
    const Vec3 got = lookup_refine_positions(t, slots);
    const Vec3 want = oracle::refine_laplacian(slots, 16, 0.5);
    const double r = encode_positions(slots, 16).radius;
    for (int a = 0; a < 3; ++a) worst = std::max(worst, std::fabs(got[a] - want[a]) / (r * std::ldexp(1.0, -11)));
  }
  double scale_err = 0.0, shift_err = 0.0;
  for (int c = 0; c < 2000; ++c) {
    std::vector<Vec3> slots(4);
    for (Vec3& p : slots)
      p = {static_cast<float>(s.below(4096)) / 1024.0f, static_cast<float>(s.below(4096)) / 1024.0f,
           static_cast<float>(s.below(4096)) / 1024.0f};
    const Vec3 base = lookup_refine_positions(t, slots);
    const double r = std::max(encode_positions(slots, 16).radius, 1e-30);
    for (float scale : {0.125f, 0.5f, 4.0f, 1024.0f}) {
      std::vector<Vec3> scaled;
      for (const Vec3& p : slots) scaled.push_back({p.x * scale, p.y * scale, p.z * scale});
      const Vec3 got = lookup_refine_positions(t, scaled);
      for (int a = 0; a < 3; ++a) {
        const double want_off = scale * (static_cast<double>(base[a]) - slots[0][a]);
        const double got_off = static_cast<double>(got[a]) - scaled[0][a];
        scale_err = std::max(scale_err, std::fabs(got_off - want_off) / (scale * r));
      }
    }
    const Vec3 shift{static_cast<float>(s.below(64)) - 32.0f, 0.25f * static_cast<float>(s.below(64)), -7.5f};
    std::vector<Vec3> moved;
    for (const Vec3& p : slots) moved.push_back({p.x + shift.x, p.y + shift.y, p.z + shift.z});
    const Vec3 got = lookup_refine_positions(t, moved);
    for (int a = 0; a < 3; ++a) {
      const double want = static_cast<double>(base[a]) + shift[a];
      shift_err = std::max(shift_err, std::fabs(got[a] - want) / std::max(1.0, std::fabs(want)));
    }
  }
  const bool pass = worst <= 1.0 && scale_err <= 1e-6 && shift_err <= 1e-6;
  return {pass, fmt("10^4 neighborhoods: max |lut - oracle| = %.3g binary16 steps; scale rel err %.3g, "
                    "translation rel err %.3g (limit 1e-6)",
                    worst, scale_err, shift_err)};
}

// 4. Quantization roundtrip and endpoints.
Outcome quantization() {
  gen::Source s(41);
  bool pass = true;
  std::string detail;
  for (std::uint32_t b : {8u, 128u}) {
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double v = s.range(-1.0, 1.0);
      worst = std::max(worst, std::fabs(bin_representative(quantize(v, b), b) - v));
    }
    const bool ends = quantize(-1.0, b) == 0 && quantize(1.0, b) == b - 1;
    pass = pass && ends && worst <= 1.0 / (b - 1);
    detail += fmt("b=%u: max err %.5f <= %.5f, endpoints %s; ", b, worst, 1.0 / (b - 1), ends ? "ok" : "WRONG");
  }
  return {pass, detail};
}

// 5. Quality direction on a sphere and a torus.
Outcome quality_direction() {
  Outcome o{true, "", ""};
  for (int shape = 0; shape < 2; ++shape) {
    const PointCloud full = shape == 0 ? sample_sphere(4096, 1) : sample_torus(4096, 1);
    const PointCloud half = random_downsample(full, 0.5, 2);
    auto run = [&](std::size_t d, bool refine) {
      SrConfig c;
      c.k = 4;
      c.d = d;
      c.adapt_dilation = false;
      c.refine = refine;
      return super_resolve(half, full.size(), c, refine ? &lut_4_16() : nullptr, 3).cloud;
    };
    const PointCloud d1 = run(1, false), d2 = run(2, false), d2l = run(2, true);
    const double c1 = chamfer_distance(full, d1), c2 = chamfer_distance(full, d2), c2l = chamfer_distance(full, d2l);
    const double psnr = geometry_psnr(full, d2l);
    const bool ok = c2 <= c1 && c2l <= c2 && psnr >= 30.0;
    o.pass = o.pass && ok;
    const char* name = shape == 0 ? "sphere" : "torus";
    o.detail += fmt("%s: CD d1 %.4g, d2 %.4g, d2+LUT %.4g, PSNR %.2f dB; ", name, c1, c2, c2l, psnr);
    o.report += fmt("%s %.17g %.17g %.17g %.17g\n", name, c1, c2, c2l, psnr);
  }
  return o;
}

// 6. Octree + reuse against brute-force kNN interpolation.
Outcome interpolation_speedup() {
  // A full brute-force run takes about 8 minutes on one core, so its kNN
  // searches are timed on 2000 sampled queries per kind and scaled.
  const InterpolationTiming t = time_interpolation(100000, 2.0, 4, 2, 1, 3, 2000);
  const double speedup = t.brute_force_s / t.octree_reuse_s;
  return {speedup >= 2.0,
          fmt("100K points x2: octree+reuse %.3f s, brute-force kNN >= %.1f s (2000 sampled queries per kind), "
              "speedup >= %.0fx (need >= 2)",
              t.octree_reuse_s, t.brute_force_s, speedup)};
}

// 7. SR time across ratios on a fixed input.
Outcome sr_flatness() {
  const std::vector<double> ratios{2.0, 4.0, 8.0};
  const auto times = time_sr_ratios(50000, ratios, 4, 2, &lut_4_16(), 1, 3);
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  const double spread = *hi / *lo - 1.0;
  return {spread < 0.5, fmt("50K input: x2 %.3f s, x4 %.3f s, x8 %.3f s per frame; max/min - 1 = %.0f%% (need < 50%%)",
                            times[0], times[1], times[2], 100.0 * spread)};
}

// 8. MPC sanity and monotonicity in bandwidth.
Outcome abr_sanity() {
  AbrConfig cfg;
  const QualityCurve curve = QualityCurve::logarithmic();
  auto linear = [](double full) { return ChunkModel{[full](double r) { return full * r; }, 30, 1.0}; };
  auto state = [&](double bps, double buffer) {
    AbrState s = initial_state(cfg);
    for (int i = 0; i < 5; ++i) s.throughput_history.push_back(bps);
    s.buffer_level = buffer;
    return s;
  };
  const std::vector<ChunkModel> window(3, linear(30 * 10000 * 15.0));
  const double abundant = mpc_select(state(1e9, 2.0), window, cfg, curve).fetch_ratio;
  const double starved = mpc_select(state(1e3, 0.0), window, cfg, curve).fetch_ratio;
  std::size_t violations = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    gen::Source s(seed);
    AbrState base = initial_state(cfg);
    base.buffer_level = s.range(0, 5);
    base.sr_latency_estimate = s.range(0, 0.02);
    base.has_last_ratio = s.below(2);
    base.last_ratio = s.range(0.1, 1);
    for (int i = 0; i < 5; ++i) base.throughput_history.push_back(s.range(5e5, 3e7));
    const std::vector<ChunkModel> w(3, linear(s.range(2e5, 1e6)));
    double prev = 0.0;
    for (int f = 0; f < 20; ++f) {
      AbrState st = base;
      for (double& v : st.throughput_history) v *= std::pow(1.4, f - 10);
      const double r = mpc_select(st, w, cfg, curve).fetch_ratio;
      violations += r < prev;
      prev = r;
    }
  }
  return {abundant == 1.0 && starved == cfg.r_min && violations == 0,
          fmt("abundant -> %.2f, starved -> %.2f (r_min %.2f), monotonicity violations %zu over 40 states x 20 scales",
              abundant, starved, cfg.r_min, violations)};
}

ChunkManifest sim_manifest() { return load_manifest(kData / "videos" / "sim10k" / "manifest.json"); }

NetworkTrace lte(int i) { return load_trace_csv(kData / "traces" / ("lte_" + std::to_string(i) + ".csv")); }

// 9. Continuous grid against the discrete ladder.
Outcome continuous_vs_discrete() {
  const ChunkManifest m = sim_manifest();
  Outcome o{true, "", ""};
  int wins = 0;
  for (int i = 1; i <= 5; ++i) {
    SessionConfig cont;
    SessionConfig disc;
    disc.abr.discrete_ratios = {1.0 / 8, 1.0 / 4, 1.0 / 3, 1.0 / 2, 1.0};
    const SessionReport a = simulate_session(lte(i), m, cont);
    const SessionReport b = simulate_session(lte(i), m, disc);
    const bool ok = a.total_qoe >= b.total_qoe;
    wins += ok;
    o.pass = o.pass && ok;
    o.detail += fmt("lte_%d %.2f%s%.2f; ", i, a.total_qoe, ok ? ">=" : "<", b.total_qoe);
    o.report += report_to_json(a) + report_to_json(b);
  }
  o.detail = fmt("%d/5 traces: ", wins) + o.detail;
  return o;
}

// 10. Eight times slower SR against the measured latency.
Outcome fast_sr_benefit() {
  const ChunkManifest m = sim_manifest();
  SessionConfig measured;
  measured.sr_model = calibrate_sr_latency(10000, 2.0, SrConfig{}, &lut_4_16(), 1, 3);
  SessionConfig slow = measured;
  slow.sr_model.slowdown = 8.0;
  int lower = 0;
  std::string detail = fmt("measured %.1f ms/frame; ", 1e3 * measured.sr_model.per_frame_s);
  for (int i = 1; i <= 5; ++i) {
    const double fast = simulate_session(lte(i), m, measured).total_qoe;
    const double slowq = simulate_session(lte(i), m, slow).total_qoe;
    lower += slowq < fast;
    detail += fmt("lte_%d %.1f vs %.1f; ", i, fast, slowq);
  }
  return {lower >= 4, fmt("%d/5 traces strictly lower with 8x SR; ", lower) + detail};
}

// 11. Live loopback session over a shaped 50 Mbps link.
Outcome end_to_end() {
  const auto dir = std::filesystem::temp_directory_path() / "volut_acceptance_video";
  std::filesystem::remove_all(dir);
  VideoSpec spec;
  spec.video_id = "acceptance";
  spec.chunks = 30;
  write_synthetic_video(dir, spec);
  const auto store = VideoStore::load(dir, dir / "manifest.json");
  ServerOptions opts;
  opts.trace = NetworkTrace::constant(50e6);
  opts.rtt_s = 0.010;
  Server server(store, opts);
  server.start();
  SessionConfig cfg;
  const SessionReport r = live_session({"127.0.0.1", server.port()}, cfg, &lut_4_16());
  server.stop();
  // The client already rejects checksum mismatches; recompute each CRC from
  // an independent encoder as well.
  ChunkEncoder reference(store, 1);
  std::size_t crc_mismatch = 0;
  for (const ChunkRecord& c : r.chunks) {
    const auto resp = reference.chunk_response(static_cast<std::uint32_t>(c.index), static_cast<float>(c.ratio));
    const std::string_view payload =
        std::string_view(*resp).substr(kResponseHeaderSize, resp->size() - kResponseHeaderSize - kCrcSize);
    crc_mismatch += oracle::crc32c(payload) != c.crc32c;
  }
  std::filesystem::remove_all(dir);
  const double recomputed = recompute_qoe(r);
  const bool pass = r.chunks.size() == 30 && r.total_stall_s == 0.0 && crc_mismatch == 0 &&
                    recomputed == r.total_qoe;
  return {pass,
          fmt("%zu chunks, stalls %.3f s, CRC mismatches %zu, QoE %.17g recomputed %.17g",
              r.chunks.size(), r.total_stall_s, crc_mismatch, r.total_qoe, recomputed),
          report_to_json(r, false)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  std::map<int, std::string> reports;
  const std::vector<Criterion> criteria = {
      {1, "table-size arithmetic", 1, table_sizes},
      {2, "kNN exactness", 10, knn_exactness},
      {3, "LUT equals oracle", 30, lut_oracle},
      {4, "quantization", 5, quantization},
      {5, "quality direction", 120, quality_direction},
      {6, "interpolation speedup", 300, interpolation_speedup},
      {7, "SR latency flatness", 300, sr_flatness},
      {8, "ABR sanity", 60, abr_sanity},
      {9, "continuous >= discrete", 120, continuous_vs_discrete},
      {10, "fast-SR benefit", 120, fast_sr_benefit},
      {11, "end-to-end lossless transport", 180, end_to_end},
      {12, "determinism",
       420,
       [&]() -> Outcome {
         std::string detail;
         bool pass = true;
         const std::pair<int, std::function<Outcome()>> again[] = {
             {5, quality_direction}, {9, continuous_vs_discrete}, {11, end_to_end}};
         for (const auto& [id, fn] : again) {
           if (!reports.count(id)) reports[id] = fn().report;
           const Outcome o = fn();
           const bool same = o.report == reports[id];
           pass = pass && same;
           detail += fmt("criterion %d %s (%zu bytes); ", id, same ? "identical" : "DIFFERS", o.report.size());
         }
         return {pass, detail};
       }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what(), ""};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.report.empty()) reports[c.id] = o.report;
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2d %s: %s [%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return failed;
}
