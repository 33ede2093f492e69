#include "volut/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <thread>

#include "volut/error.hpp"
#include "volut/logging.hpp"
#include "volut/rng.hpp"
#include "volut/sampling.hpp"
#include "volut/server.hpp"
#include "volut/shaper.hpp"
#include "volut/synthetic.hpp"
#include "volut/wire.hpp"

namespace volut {

using nlohmann::json;

double SrLatencyModel::frame_seconds(std::size_t output_points) const {
  return slowdown * (per_frame_s + per_output_point_s * static_cast<double>(output_points));
}

SrLatencyModel calibrate_sr_latency(std::size_t points, double sr_ratio, const SrConfig& sr,
                                    const LutTable* lut, std::uint64_t seed, int repeats) {
  require(points >= 64 && sr_ratio >= 1.0 && repeats >= 1, "calibration: bad arguments");
  const PointCloud full = synthetic_frame(points, 0.0, seed);
  const PointCloud input = random_downsample(full, 1.0 / sr_ratio, derive_seed(seed, 1));
  std::vector<double> times;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    super_resolve(input, full.size(), sr, lut, derive_seed(seed, 2 + i));
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  SrLatencyModel model;
  model.per_frame_s = times[times.size() / 2];
  return model;
}

namespace {

QualityCurve curve_for(const ChunkManifest& m, double theta) {
  return m.quality_table.empty() ? QualityCurve::logarithmic(theta) : QualityCurve::table(m.quality_table);
}

std::vector<ChunkModel> window_models(const ChunkManifest& m, std::size_t chunk, std::size_t horizon) {
  std::vector<ChunkModel> out;
  for (std::size_t c = chunk; c < m.chunk_count() && out.size() < horizon; ++c) {
    out.push_back({[&m, c](double r) { return static_cast<double>(m.chunk_bytes(c, static_cast<float>(r))); },
                   m.frames_per_chunk, m.chunk_duration_s});
  }
  return out;
}

// Shared per-chunk bookkeeping for simulated and live sessions.
class SessionDriver {
 public:
  SessionDriver(const ChunkManifest& manifest, const SessionConfig& config, std::string mode)
      : manifest_(manifest),
        config_(config),
        curve_(curve_for(manifest, config.theta)),
        timeline_(manifest.chunk_duration_s, std::max(config.max_buffer_s, manifest.chunk_duration_s)),
        state_(initial_state(config.abr)) {
    report_.mode = std::move(mode);
    report_.video_id = manifest.video_id;
    report_.chunk_duration_s = manifest.chunk_duration_s;
    report_.weights = config.abr.weights;
    report_.theta = config.theta;
    report_.quality_table = manifest.quality_table;
    state_.sr_latency_estimate = config.abr.initial_sr_latency_s;
    state_.startup = true;
  }

  std::size_t chunk_limit() const {
    return config_.max_chunks ? std::min(config_.max_chunks, manifest_.chunk_count()) : manifest_.chunk_count();
  }

  // Decides the next chunk; returns the request time in session time.
  double decide(std::size_t chunk, ChunkRecord& rec) {
    const double request = timeline_.next_request_time();
    state_.buffer_level = timeline_.buffer_level(request);
    const auto window = window_models(manifest_, chunk, config_.abr.horizon);
    const AbrDecision d = mpc_select(state_, window, config_.abr, curve_);
    rec.index = chunk;
    rec.ratio = static_cast<double>(static_cast<float>(d.fetch_ratio));
    rec.sr_ratio = 1.0 / rec.ratio;
    rec.expected_qoe = d.expected_qoe;
    rec.buffer_before_s = state_.buffer_level;
    return request;
  }

  void finish(ChunkRecord& rec, double request, bool sr_ran) {
    rec.events = timeline_.add_chunk(request, rec.download_s, rec.sr_s);
    rec.stall_s = rec.events.stall_s;
    const double payload_bits = 8.0 * static_cast<double>(rec.bytes - kResponseHeaderSize - kCrcSize);
    rec.throughput_bps = rec.download_s > 0.0 ? std::max(1.0, payload_bits / rec.download_s) : 1e12;
    const double sr_per_frame = sr_ran ? rec.sr_s / static_cast<double>(manifest_.frames_per_chunk) : 0.0;
    const double prev = report_.chunks.empty() ? rec.ratio : report_.chunks.back().ratio;
    rec.qoe = qoe_terms(rec.ratio, prev, rec.stall_s, config_.abr.weights, curve_);
    state_ = update_after_chunk(state_, rec.throughput_bps, sr_per_frame, rec.ratio, rec.download_s, rec.sr_s,
                                manifest_.chunk_duration_s);
    report_.chunks.push_back(rec);
    log().debug("chunk {} ratio {:.2f} dl {:.3f}s sr {:.3f}s stall {:.3f}s", rec.index, rec.ratio, rec.download_s,
                rec.sr_s, rec.stall_s);
  }

  SessionReport finalize(std::uint64_t manifest_bytes, std::uint64_t lut_bytes) {
    SessionReport& r = report_;
    r.manifest_bytes = manifest_bytes;
    r.lut_bytes = config_.count_lut_bytes ? lut_bytes : 0;
    double ratio_sum = 0.0;
    for (const ChunkRecord& c : r.chunks) {
      r.total_qoe += c.qoe.total;
      r.total_stall_s += c.stall_s;
      if (c.stall_s > 0.0) ++r.stall_events;
      r.chunk_bytes += c.bytes;
      ratio_sum += c.ratio;
    }
    r.startup_s = timeline_.startup_delay_s();
    r.bytes_downloaded = r.chunk_bytes + r.manifest_bytes + r.lut_bytes;
    r.mean_ratio = r.chunks.empty() ? 0.0 : ratio_sum / static_cast<double>(r.chunks.size());
    return r;
  }

  const PlaybackTimeline& timeline() const { return timeline_; }

 private:
  const ChunkManifest& manifest_;
  const SessionConfig& config_;
  QualityCurve curve_;
  PlaybackTimeline timeline_;
  AbrState state_;
  SessionReport report_;
};

}  // namespace

SessionReport simulate_session(const NetworkTrace& trace, const ChunkManifest& manifest,
                               const SessionConfig& config, std::uint64_t lut_bytes) {
  manifest.validate();
  TraceShaper shaper(trace, config.rtt_s, config.burst_bytes);
  SessionDriver driver(manifest, config, "simulated");
  for (std::size_t c = 0; c < driver.chunk_limit(); ++c) {
    ChunkRecord rec;
    const double request = driver.decide(c, rec);
    const float wire_ratio = static_cast<float>(rec.ratio);
    rec.bytes = manifest.chunk_bytes(c, wire_ratio);
    const double done = shaper.schedule(request + shaper.rtt(), static_cast<double>(rec.bytes));
    if (!std::isfinite(done))
      fail(ErrorCode::kInvalidArgument, "simulate: trace never delivers chunk " + std::to_string(c));
    rec.download_s = done - request;
    bool sr_ran = false;
    for (std::uint32_t n : manifest.chunk_points[c]) {
      const std::size_t fetched = downsample_count(n, static_cast<double>(wire_ratio));
      rec.fetched_points += fetched;
      rec.played_points += n;
      if (fetched < n) {
        rec.sr_s += config.sr_model.frame_seconds(n);
        sr_ran = true;
      }
    }
    driver.finish(rec, request, sr_ran);
  }
  SessionReport report = driver.finalize(0, lut_bytes);
  report.manifest_bytes = kResponseHeaderSize + manifest_to_json(manifest).size() + kCrcSize;
  report.bytes_downloaded += report.manifest_bytes;
  report.shaped_bytes = static_cast<std::uint64_t>(shaper.bytes_shaped());
  return report;
}

SessionReport live_session(const Endpoint& server, const SessionConfig& config, const LutTable* lut,
                           std::uint64_t lut_bytes, const FrameSink& sink) {
  ChunkClient client(server, config.timeout_s);
  const auto [manifest, manifest_bytes] = client.fetch_manifest();
  SessionDriver driver(manifest, config, "live");
  const auto epoch = std::chrono::steady_clock::now();
  for (std::size_t c = 0; c < driver.chunk_limit(); ++c) {
    ChunkRecord rec;
    const double request = driver.decide(c, rec);
    if (config.realtime)
      std::this_thread::sleep_until(epoch + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                std::chrono::duration<double>(request)));
    FetchResult fetched = client.fetch_chunk(static_cast<std::uint32_t>(c), static_cast<float>(rec.ratio));
    rec.bytes = fetched.bytes;
    rec.download_s = fetched.seconds;
    rec.crc32c = fetched.crc;
    if (fetched.frames.size() != manifest.frames_per_chunk)
      fail(ErrorCode::kProtocol, "chunk " + std::to_string(c) + ": unexpected frame count");

    bool sr_ran = false;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<PointCloud> played;
    played.reserve(fetched.frames.size());
    for (std::size_t f = 0; f < fetched.frames.size(); ++f) {
      const PointCloud& in = fetched.frames[f];
      const std::uint32_t full = manifest.chunk_points[c][f];
      if (in.size() > full) fail(ErrorCode::kProtocol, "chunk " + std::to_string(c) + ": frame larger than manifest");
      rec.fetched_points += in.size();
      if (in.size() < full) {
        sr_ran = true;
        const std::uint64_t seed = derive_seed(derive_seed(config.seed, c), f);
        played.push_back(super_resolve(in, full, config.sr, lut, seed).cloud);
      } else {
        played.push_back(std::move(fetched.frames[f]));
      }
      rec.played_points += played.back().size();
    }
    rec.sr_s = sr_ran ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
    if (sink) sink(c, played);
    driver.finish(rec, request, sr_ran);
  }
  return driver.finalize(manifest_bytes, lut_bytes);
}

namespace {

json terms_json(const QoeTerms& t) {
  return {{"quality", t.quality}, {"variation", t.variation}, {"stall", t.stall}, {"total", t.total}};
}

}  // namespace

std::string report_to_json(const SessionReport& r, bool with_timing) {
  json j;
  j["mode"] = r.mode;
  j["video_id"] = r.video_id;
  j["chunk_duration_s"] = r.chunk_duration_s;
  j["weights"] = {{"alpha", r.weights.alpha},
                  {"beta", r.weights.beta},
                  {"gamma", r.weights.gamma},
                  {"drop_penalty_multiplier", r.weights.drop_penalty_multiplier}};
  j["quality_curve"] = r.quality_table.empty() ? json{{"kind", "log"}, {"theta", r.theta}}
                                               : json{{"kind", "table"}, {"knots", r.quality_table}};
  json chunks = json::array();
  for (const ChunkRecord& c : r.chunks) {
    json e;
    e["index"] = c.index;
    e["ratio"] = c.ratio;
    e["sr_ratio"] = c.sr_ratio;
    e["bytes"] = c.bytes;
    e["fetched_points"] = c.fetched_points;
    e["played_points"] = c.played_points;
    e["stall_s"] = c.stall_s;
    if (r.mode == "live") e["crc32c"] = c.crc32c;
    if (with_timing) {
      e["download_s"] = c.download_s;
      e["sr_s"] = c.sr_s;
      e["throughput_bps"] = c.throughput_bps;
      e["buffer_before_s"] = c.buffer_before_s;
      e["expected_qoe"] = c.expected_qoe;
      e["events"] = {{"request_s", c.events.request_s},   {"fetch_done_s", c.events.fetch_done_s},
                     {"sr_start_s", c.events.sr_start_s}, {"ready_s", c.events.ready_s},
                     {"deadline_s", c.events.deadline_s}, {"play_start_s", c.events.play_start_s}};
    }
    e["qoe_terms"] = terms_json(c.qoe);
    chunks.push_back(std::move(e));
  }
  j["chunks"] = std::move(chunks);
  json totals;
  totals["chunks"] = r.chunks.size();
  totals["qoe"] = r.total_qoe;
  totals["stall_s"] = r.total_stall_s;
  totals["stall_events"] = r.stall_events;
  if (with_timing) totals["startup_s"] = r.startup_s;
  totals["mean_ratio"] = r.mean_ratio;
  totals["manifest_bytes"] = r.manifest_bytes;
  totals["lut_bytes"] = r.lut_bytes;
  totals["chunk_bytes"] = r.chunk_bytes;
  totals["bytes_downloaded"] = r.bytes_downloaded;
  if (r.mode == "simulated") totals["shaped_bytes"] = r.shaped_bytes;
  j["totals"] = std::move(totals);
  return j.dump(2) + "\n";
}

SessionReport report_from_json(std::string_view text) {
  SessionReport r;
  try {
    const json j = json::parse(text);
    r.mode = j.at("mode").get<std::string>();
    r.video_id = j.at("video_id").get<std::string>();
    r.chunk_duration_s = j.at("chunk_duration_s").get<double>();
    const json& w = j.at("weights");
    r.weights = {w.at("alpha").get<double>(), w.at("beta").get<double>(), w.at("gamma").get<double>(),
                 w.at("drop_penalty_multiplier").get<double>()};
    const json& qc = j.at("quality_curve");
    if (qc.at("kind") == "table") {
      r.quality_table = qc.at("knots").get<std::vector<std::pair<double, double>>>();
    } else {
      r.theta = qc.at("theta").get<double>();
    }
    for (const json& e : j.at("chunks")) {
      ChunkRecord c;
      c.index = e.at("index").get<std::size_t>();
      c.ratio = e.at("ratio").get<double>();
      c.sr_ratio = e.at("sr_ratio").get<double>();
      c.bytes = e.at("bytes").get<std::uint64_t>();
      c.fetched_points = e.at("fetched_points").get<std::uint64_t>();
      c.played_points = e.at("played_points").get<std::uint64_t>();
      c.stall_s = e.at("stall_s").get<double>();
      c.crc32c = e.value("crc32c", 0u);
      c.download_s = e.value("download_s", 0.0);
      c.sr_s = e.value("sr_s", 0.0);
      c.throughput_bps = e.value("throughput_bps", 0.0);
      c.buffer_before_s = e.value("buffer_before_s", 0.0);
      c.expected_qoe = e.value("expected_qoe", 0.0);
      if (e.contains("events")) {
        const json& ev = e.at("events");
        c.events.request_s = ev.at("request_s").get<double>();
        c.events.fetch_done_s = ev.at("fetch_done_s").get<double>();
        c.events.sr_start_s = ev.at("sr_start_s").get<double>();
        c.events.ready_s = ev.at("ready_s").get<double>();
        c.events.deadline_s = ev.at("deadline_s").get<double>();
        c.events.play_start_s = ev.at("play_start_s").get<double>();
      }
      c.events.stall_s = c.stall_s;
      const json& t = e.at("qoe_terms");
      c.qoe = {t.at("quality").get<double>(), t.at("variation").get<double>(), t.at("stall").get<double>(),
               t.at("total").get<double>()};
      r.chunks.push_back(c);
    }
    const json& t = j.at("totals");
    r.total_qoe = t.at("qoe").get<double>();
    r.total_stall_s = t.at("stall_s").get<double>();
    r.stall_events = t.at("stall_events").get<std::size_t>();
    r.startup_s = t.value("startup_s", 0.0);
    r.shaped_bytes = t.value("shaped_bytes", std::uint64_t{0});
    r.mean_ratio = t.at("mean_ratio").get<double>();
    r.manifest_bytes = t.at("manifest_bytes").get<std::uint64_t>();
    r.lut_bytes = t.at("lut_bytes").get<std::uint64_t>();
    r.chunk_bytes = t.at("chunk_bytes").get<std::uint64_t>();
    r.bytes_downloaded = t.at("bytes_downloaded").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("session report: ") + e.what());
  }
  return r;
}

double recompute_qoe(const SessionReport& report) {
  const QualityCurve curve = report.quality_table.empty() ? QualityCurve::logarithmic(report.theta)
                                                          : QualityCurve::table(report.quality_table);
  double total = 0.0;
  for (std::size_t i = 0; i < report.chunks.size(); ++i) {
    const ChunkRecord& c = report.chunks[i];
    const double prev = i == 0 ? c.ratio : report.chunks[i - 1].ratio;
    total += qoe_terms(c.ratio, prev, c.stall_s, report.weights, curve).total;
  }
  return total;
}

}  // namespace volut
