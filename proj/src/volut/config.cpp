#include "volut/config.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

#include "volut/error.hpp"

namespace volut {
namespace {

using nlohmann::json;

json parse_object(std::string_view text, const char* what) {
  if (text.empty()) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kInvalidArgument, std::string(what) + ": expected a JSON object");
  return j;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(ErrorCode::kInvalidArgument, what + ": unknown option '" + key + "'");
  }
}

template <typename T>
void get(const json& j, const char* key, T& out, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidArgument, what + ": option '" + key + "' has the wrong type");
  }
}

void apply_sr(const json& j, SrConfig& c, const std::string& what) {
  check_keys(j, {"k", "d", "adapt_dilation", "refine", "search", "reuse_neighbors", "max_attempts_per_point"},
             what);
  get(j, "k", c.k, what);
  get(j, "d", c.d, what);
  get(j, "adapt_dilation", c.adapt_dilation, what);
  get(j, "refine", c.refine, what);
  get(j, "reuse_neighbors", c.interpolation.reuse_neighbors, what);
  get(j, "max_attempts_per_point", c.interpolation.max_attempts_per_point, what);
  std::string search = c.interpolation.search == NeighborSearch::kOctree ? "octree" : "brute_force";
  get(j, "search", search, what);
  if (search == "octree")
    c.interpolation.search = NeighborSearch::kOctree;
  else if (search == "brute_force")
    c.interpolation.search = NeighborSearch::kBruteForce;
  else
    fail(ErrorCode::kInvalidArgument, what + ": search must be 'octree' or 'brute_force'");
  require(c.k >= 1 && c.d >= 1, what + ": k and d must be at least 1");
}

}  // namespace

SrConfig sr_config_from_json(std::string_view text) {
  SrConfig c;
  apply_sr(parse_object(text, "sr config"), c, "sr config");
  return c;
}

SessionConfig session_config_from_json(std::string_view text) {
  const std::string what = "session config";
  const json j = parse_object(text, what.c_str());
  check_keys(j, {"abr", "theta", "max_buffer_s", "seed", "count_lut_bytes", "max_chunks", "rtt_s", "burst_bytes",
                 "sr_model", "sr", "timeout_s", "realtime"},
             what);
  SessionConfig c;
  if (auto it = j.find("abr"); it != j.end()) {
    const std::string w = what + ".abr";
    if (!it->is_object()) fail(ErrorCode::kInvalidArgument, w + ": expected an object");
    check_keys(*it, {"alpha", "beta", "gamma", "drop_penalty_multiplier", "horizon", "window", "grid_step", "r_min",
                     "discrete_ratios", "initial_throughput_bps", "initial_sr_latency_s"},
               w);
    AbrConfig& a = c.abr;
    get(*it, "alpha", a.weights.alpha, w);
    get(*it, "beta", a.weights.beta, w);
    get(*it, "gamma", a.weights.gamma, w);
    get(*it, "drop_penalty_multiplier", a.weights.drop_penalty_multiplier, w);
    get(*it, "horizon", a.horizon, w);
    get(*it, "window", a.window, w);
    get(*it, "grid_step", a.grid_step, w);
    get(*it, "r_min", a.r_min, w);
    get(*it, "discrete_ratios", a.discrete_ratios, w);
    get(*it, "initial_throughput_bps", a.initial_throughput_bps, w);
    get(*it, "initial_sr_latency_s", a.initial_sr_latency_s, w);
    validate(a.weights);
    ratio_grid(a);  // throws on a bad grid
    require(a.horizon >= 1 && a.window >= 1, w + ": horizon and window must be at least 1");
  }
  get(j, "theta", c.theta, what);
  get(j, "max_buffer_s", c.max_buffer_s, what);
  get(j, "seed", c.seed, what);
  get(j, "count_lut_bytes", c.count_lut_bytes, what);
  get(j, "max_chunks", c.max_chunks, what);
  get(j, "rtt_s", c.rtt_s, what);
  get(j, "burst_bytes", c.burst_bytes, what);
  get(j, "timeout_s", c.timeout_s, what);
  get(j, "realtime", c.realtime, what);
  if (auto it = j.find("sr_model"); it != j.end()) {
    const std::string w = what + ".sr_model";
    if (!it->is_object()) fail(ErrorCode::kInvalidArgument, w + ": expected an object");
    check_keys(*it, {"per_frame_s", "per_output_point_s", "slowdown"}, w);
    get(*it, "per_frame_s", c.sr_model.per_frame_s, w);
    get(*it, "per_output_point_s", c.sr_model.per_output_point_s, w);
    get(*it, "slowdown", c.sr_model.slowdown, w);
    require(c.sr_model.per_frame_s >= 0 && c.sr_model.per_output_point_s >= 0 && c.sr_model.slowdown > 0,
            w + ": latencies must be non-negative and slowdown positive");
  }
  if (auto it = j.find("sr"); it != j.end()) {
    if (!it->is_object()) fail(ErrorCode::kInvalidArgument, what + ".sr: expected an object");
    apply_sr(*it, c.sr, what + ".sr");
  }
  require(c.theta > 0, what + ": theta must be positive");
  require(c.rtt_s >= 0 && c.burst_bytes >= 0 && c.timeout_s > 0, what + ": bad network settings");
  return c;
}

BenchOptions bench_options_from_json(std::string_view text) {
  const std::string what = "bench options";
  const json j = parse_object(text, what.c_str());
  check_keys(j, {"suite", "points", "ratios", "k", "d", "bins", "rf_size", "repeats", "seed", "brute_force_limit"},
             what);
  BenchOptions o;
  get(j, "suite", o.suite, what);
  get(j, "points", o.points, what);
  get(j, "ratios", o.ratios, what);
  get(j, "k", o.k, what);
  get(j, "d", o.d, what);
  get(j, "bins", o.bins, what);
  get(j, "rf_size", o.rf_size, what);
  get(j, "repeats", o.repeats, what);
  get(j, "seed", o.seed, what);
  get(j, "brute_force_limit", o.brute_force_limit, what);
  return o;
}

ServerOptions server_options_from_json(std::string_view text) {
  const std::string what = "server options";
  const json j = parse_object(text, what.c_str());
  check_keys(j, {"bind", "trace", "rtt_s", "burst_bytes", "cache_capacity"}, what);
  ServerOptions o;
  if (auto it = j.find("bind"); it != j.end()) {
    std::string bind;
    get(j, "bind", bind, what);
    o.bind = parse_endpoint(bind);
  }
  if (auto it = j.find("trace"); it != j.end() && !it->is_null()) {
    std::string path;
    get(j, "trace", path, what);
    o.trace = load_trace_csv(path);
  }
  get(j, "rtt_s", o.rtt_s, what);
  get(j, "burst_bytes", o.burst_bytes, what);
  get(j, "cache_capacity", o.cache_capacity, what);
  require(o.rtt_s >= 0 && o.burst_bytes >= 0, what + ": rtt_s and burst_bytes must be non-negative");
  return o;
}

VideoSpec video_spec_from_json(std::string_view text) {
  const std::string what = "video spec";
  const json j = parse_object(text, what.c_str());
  check_keys(j, {"video_id", "chunks", "frames_per_chunk", "points_per_frame", "point_jitter", "chunk_duration_s",
                 "seed"},
             what);
  VideoSpec v;
  get(j, "video_id", v.video_id, what);
  get(j, "chunks", v.chunks, what);
  get(j, "frames_per_chunk", v.frames_per_chunk, what);
  get(j, "points_per_frame", v.points_per_frame, what);
  get(j, "point_jitter", v.point_jitter, what);
  get(j, "chunk_duration_s", v.chunk_duration_s, what);
  get(j, "seed", v.seed, what);
  return v;
}

}  // namespace volut
