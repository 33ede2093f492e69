// volut command-line front end. Talks to the library only through volut.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "volut/volut.h"

using nlohmann::json;

namespace {

// Thrown when a library call fails; main() turns it into an error document.
struct CallFailed {
  volut_status status;
  std::string message;
};

void check(volut_status s) {
  if (s != VOLUT_OK) throw CallFailed{s, volut_last_error()};
}

struct CloudDeleter {
  void operator()(volut_cloud* c) const { volut_cloud_free(c); }
};
struct LutDeleter {
  void operator()(volut_lut* l) const { volut_lut_free(l); }
};
struct ServerDeleter {
  void operator()(volut_server* s) const { volut_server_free(s); }
};
using CloudPtr = std::unique_ptr<volut_cloud, CloudDeleter>;
using LutPtr = std::unique_ptr<volut_lut, LutDeleter>;
using ServerPtr = std::unique_ptr<volut_server, ServerDeleter>;

// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  volut_string_free(s);
  return out;
}

CloudPtr load_cloud(const std::string& path) {
  volut_cloud* c = nullptr;
  check(volut_cloud_load_ply(path.c_str(), &c));
  return CloudPtr(c);
}

LutPtr load_lut(const std::string& path) {
  if (path.empty()) return nullptr;
  volut_lut* l = nullptr;
  check(volut_lut_load(path.c_str(), &l));
  return LutPtr(l);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text << "\n";
  if (!out) throw CallFailed{VOLUT_ERR_IO, "cannot write " + path};
}

struct SrFlags {
  std::size_t k = 4;
  std::size_t d = 2;
  bool no_refine = false;
  bool fixed_dilation = false;
  std::string search = "octree";
  bool no_reuse = false;

  void add(CLI::App* app) {
    app->add_option("--k", k, "neighbors per point")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--d", d, "dilation factor")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_flag("--no-refine", no_refine, "skip LUT refinement");
    app->add_flag("--fixed-dilation", fixed_dilation, "do not widen d at high ratios");
    app->add_option("--search", search, "neighbor search")
        ->capture_default_str()
        ->check(CLI::IsMember({"octree", "brute_force"}));
    app->add_flag("--no-reuse", no_reuse, "exact kNN per new point instead of merging parent lists");
  }
  json to_json() const {
    return {{"k", k},           {"d", d}, {"refine", !no_refine}, {"adapt_dilation", !fixed_dilation},
            {"search", search}, {"reuse_neighbors", !no_reuse}};
  }
};

struct SessionFlags {
  double alpha = 1.0, beta = 1.0, gamma = 4.0, drop = 2.0;
  std::size_t horizon = 3, window = 5;
  double grid_step = 0.01, r_min = 0.1;
  std::vector<double> discrete;
  double theta = 20.0;
  double max_buffer = 5.0;
  double initial_throughput = 5e6;
  std::uint64_t seed = 1;
  bool count_lut_bytes = false;
  std::size_t max_chunks = 0;
  bool no_timing = false;
  std::string report;

  void add(CLI::App* app) {
    app->add_option("--alpha", alpha, "quality weight")->capture_default_str();
    app->add_option("--beta", beta, "quality variation weight")->capture_default_str();
    app->add_option("--gamma", gamma, "stall weight per second")->capture_default_str();
    app->add_option("--drop-penalty", drop, "multiplier on quality drops")->capture_default_str();
    app->add_option("--horizon", horizon, "MPC lookahead in chunks")->capture_default_str();
    app->add_option("--window", window, "throughput history window")->capture_default_str();
    app->add_option("--grid-step", grid_step, "ratio grid step")->capture_default_str();
    app->add_option("--r-min", r_min, "smallest fetch ratio")->capture_default_str();
    app->add_option("--discrete", discrete, "restrict ratios to this set")->delimiter(',');
    app->add_option("--theta", theta, "log quality curve parameter")->capture_default_str();
    app->add_option("--max-buffer", max_buffer, "buffer cap in seconds")->capture_default_str();
    app->add_option("--initial-throughput", initial_throughput, "bits/s assumed before the first chunk")
        ->capture_default_str();
    app->add_option("--seed", seed, "session seed")->capture_default_str();
    app->add_flag("--count-lut-bytes", count_lut_bytes, "charge the LUT download before playback");
    app->add_option("--max-chunks", max_chunks, "stop after this many chunks (0: all)")->capture_default_str();
    app->add_flag("--no-timing", no_timing, "omit wall-clock fields from the report");
    app->add_option("--report", report, "write the session report here instead of stdout");
  }
  json to_json() const {
    json abr = {{"alpha", alpha},
                {"beta", beta},
                {"gamma", gamma},
                {"drop_penalty_multiplier", drop},
                {"horizon", horizon},
                {"window", window},
                {"grid_step", grid_step},
                {"r_min", r_min},
                {"discrete_ratios", discrete},
                {"initial_throughput_bps", initial_throughput}};
    return {{"abr", abr},
            {"theta", theta},
            {"max_buffer_s", max_buffer},
            {"seed", seed},
            {"count_lut_bytes", count_lut_bytes},
            {"max_chunks", max_chunks}};
  }
};

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volut: point-cloud super-resolution and adaptive streaming"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(volut_version()));

  // downsample
  auto* ds = app.add_subcommand("downsample", "reduce a PLY by random sampling or farthest point sampling");
  std::string ds_in, ds_out;
  double ds_ratio = 0.5;
  std::uint64_t ds_seed = 1;
  bool ds_fps = false, ds_ascii = false;
  std::size_t ds_count = 0;
  ds->add_option("input", ds_in, "input PLY")->required()->check(CLI::ExistingFile);
  ds->add_option("output", ds_out, "output PLY")->required();
  auto* ds_ratio_opt = ds->add_option("--ratio", ds_ratio, "fraction of points kept")->capture_default_str();
  ds->add_option("--seed", ds_seed, "sampling seed")->capture_default_str();
  auto* ds_fps_flag = ds->add_flag("--fps", ds_fps, "farthest point sampling");
  ds->add_option("--count", ds_count, "points kept with --fps")->needs(ds_fps_flag);
  ds_fps_flag->excludes(ds_ratio_opt);
  ds->add_flag("--ascii", ds_ascii, "write ASCII PLY");

  // upsample
  auto* us = app.add_subcommand("upsample", "super-resolve a PLY");
  std::string us_in, us_out, us_lut, us_stats;
  double us_ratio = 2.0;
  std::uint64_t us_seed = 1;
  bool us_ascii = false;
  SrFlags us_sr;
  us->add_option("input", us_in, "input PLY")->required()->check(CLI::ExistingFile);
  us->add_option("output", us_out, "output PLY")->required();
  us->add_option("--ratio", us_ratio, "upsampling ratio (>= 1)")->capture_default_str()->check(CLI::Range(1.0, 64.0));
  us->add_option("--lut", us_lut, "LUT file for refinement")->check(CLI::ExistingFile);
  us->add_option("--seed", us_seed, "pairing seed")->capture_default_str();
  us->add_option("--stats", us_stats, "write timing JSON here");
  us->add_flag("--ascii", us_ascii, "write ASCII PLY");
  us_sr.add(us);

  // build-lut
  auto* bl = app.add_subcommand("build-lut", "tabulate a refiner into a LUT file");
  std::string bl_out, bl_refiner = "laplacian";
  std::size_t bl_n = 4;
  std::uint32_t bl_b = 16;
  double bl_lambda = 0.5;
  bl->add_option("output", bl_out, "output .vlut")->required();
  bl->add_option("--n", bl_n, "receptive field size")->capture_default_str()->check(CLI::Range(2, 8));
  bl->add_option("--b", bl_b, "bins per axis")->capture_default_str()->check(CLI::Range(2, 1024));
  bl->add_option("--refiner", bl_refiner, "refinement function")
      ->capture_default_str()
      ->check(CLI::IsMember({"laplacian", "zero"}));
  bl->add_option("--lambda", bl_lambda, "laplacian step")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "chamfer distance and geometry PSNR of test against reference");
  std::string ev_ref, ev_test;
  ev->add_option("reference", ev_ref, "reference PLY")->required()->check(CLI::ExistingFile);
  ev->add_option("test", ev_test, "test PLY")->required()->check(CLI::ExistingFile);

  // serve
  auto* sv = app.add_subcommand("serve", "serve a chunked video over TCP until interrupted");
  std::string sv_dir, sv_manifest, sv_bind = "127.0.0.1:9000", sv_trace;
  double sv_rtt = 0.0;
  sv->add_option("video", sv_dir, "video directory")->required()->check(CLI::ExistingDirectory);
  sv->add_option("--manifest", sv_manifest, "manifest (default: video/manifest.json)")->check(CLI::ExistingFile);
  sv->add_option("--bind", sv_bind, "listen address host:port")->capture_default_str();
  sv->add_option("--trace", sv_trace, "shape each connection to this bandwidth trace")->check(CLI::ExistingFile);
  sv->add_option("--rtt", sv_rtt, "added delay per response in seconds")->capture_default_str();

  // play
  auto* pl = app.add_subcommand("play", "stream from a server with ABR and SR");
  std::string pl_server, pl_trace, pl_video, pl_manifest, pl_lut, pl_out_dir;
  double pl_rtt = 0.0, pl_timeout = 30.0;
  bool pl_realtime = false;
  SessionFlags pl_session;
  SrFlags pl_sr;
  auto* pl_server_opt = pl->add_option("--server", pl_server, "server address host:port");
  auto* pl_trace_opt =
      pl->add_option("--trace", pl_trace, "serve --video in-process, shaped to this trace")->check(CLI::ExistingFile);
  auto* pl_video_opt = pl->add_option("--video", pl_video, "video directory for --trace")->check(CLI::ExistingDirectory);
  pl->add_option("--manifest", pl_manifest, "manifest for --video")->check(CLI::ExistingFile);
  pl_server_opt->excludes(pl_trace_opt);
  pl_trace_opt->needs(pl_video_opt);
  pl->add_option("--rtt", pl_rtt, "in-process server delay per response")->capture_default_str();
  pl->add_option("--lut", pl_lut, "LUT for refinement")->check(CLI::ExistingFile);
  pl->add_option("--out-dir", pl_out_dir, "write played frames as PLY here");
  pl->add_option("--timeout", pl_timeout, "network timeout in seconds")->capture_default_str();
  pl->add_flag("--realtime", pl_realtime, "pace requests by the playback clock");
  pl_session.add(pl);
  pl_sr.add(pl);

  // simulate
  auto* sm = app.add_subcommand("simulate", "trace-driven session simulation");
  std::string sm_trace, sm_manifest, sm_lut;
  double sm_rtt = 0.010, sm_sr_frame = 0.010, sm_sr_point = 0.0, sm_slowdown = 1.0;
  std::size_t sm_calibrate = 0;
  SessionFlags sm_session;
  SrFlags sm_sr;
  sm->add_option("trace", sm_trace, "bandwidth trace CSV")->required()->check(CLI::ExistingFile);
  sm->add_option("manifest", sm_manifest, "video manifest")->required()->check(CLI::ExistingFile);
  sm->add_option("--lut", sm_lut, "LUT (size counted with --count-lut-bytes; used by --calibrate)")
      ->check(CLI::ExistingFile);
  sm->add_option("--rtt", sm_rtt, "request round trip in seconds")->capture_default_str();
  sm->add_option("--sr-per-frame", sm_sr_frame, "SR seconds per frame")->capture_default_str();
  sm->add_option("--sr-per-point", sm_sr_point, "SR seconds per output point")->capture_default_str();
  sm->add_option("--sr-slowdown", sm_slowdown, "multiply SR latency")->capture_default_str();
  sm->add_option("--calibrate", sm_calibrate, "measure SR per frame at this many output points")
      ->check(CLI::PositiveNumber);
  sm_session.add(sm);
  sm_sr.add(sm);

  // bench
  auto* bn = app.add_subcommand("bench", "timing suites");
  std::string bn_suite = "e2e", bn_json, bn_lut;
  std::size_t bn_points = 50000;
  std::vector<double> bn_ratios{2.0, 4.0, 8.0};
  int bn_repeats = 3;
  std::uint64_t bn_seed = 1;
  std::size_t bn_k = 4, bn_d = 2;
  bn->add_option("--suite", bn_suite, "which suite")
      ->capture_default_str()
      ->check(CLI::IsMember({"interpolation", "knn", "lut", "e2e"}));
  bn->add_option("--points", bn_points, "input points")->capture_default_str()->check(CLI::PositiveNumber);
  bn->add_option("--ratio", bn_ratios, "upsampling ratios")->delimiter(',')->capture_default_str();
  bn->add_option("--repeats", bn_repeats, "repetitions (median reported)")->capture_default_str();
  bn->add_option("--seed", bn_seed, "seed")->capture_default_str();
  bn->add_option("--k", bn_k, "neighbors")->capture_default_str();
  bn->add_option("--d", bn_d, "dilation")->capture_default_str();
  bn->add_option("--lut", bn_lut, "LUT for the e2e suite")->check(CLI::ExistingFile);
  bn->add_option("--json", bn_json, "also write the result here");

  // synthetic data
  auto* sy = app.add_subcommand("synth-video", "write a synthetic chunked video");
  std::string sy_dir;
  std::string sy_id = "synthetic";
  std::size_t sy_chunks = 30, sy_frames = 30, sy_points = 2000;
  double sy_jitter = 0.05;
  std::uint64_t sy_seed = 7;
  sy->add_option("dir", sy_dir, "output directory")->required();
  sy->add_option("--id", sy_id, "video id")->capture_default_str();
  sy->add_option("--chunks", sy_chunks, "chunks")->capture_default_str();
  sy->add_option("--frames", sy_frames, "frames per chunk")->capture_default_str();
  sy->add_option("--points", sy_points, "points per frame")->capture_default_str();
  sy->add_option("--jitter", sy_jitter, "relative per-frame count variation")->capture_default_str();
  sy->add_option("--seed", sy_seed, "seed")->capture_default_str();
  bool sy_manifest_only = false;
  sy->add_flag("--manifest-only", sy_manifest_only, "write manifest.json only (for simulation)");

  auto* st = app.add_subcommand("synth-trace", "write an LTE-like bandwidth trace");
  std::string st_out;
  double st_mean = 20.0, st_std = 8.0, st_duration = 120.0, st_step = 1.0;
  std::uint64_t st_seed = 1;
  st->add_option("output", st_out, "output CSV")->required();
  st->add_option("--mean", st_mean, "mean Mbps")->capture_default_str();
  st->add_option("--std", st_std, "standard deviation in Mbps")->capture_default_str();
  st->add_option("--duration", st_duration, "seconds")->capture_default_str();
  st->add_option("--step", st_step, "sample spacing in seconds")->capture_default_str();
  st->add_option("--seed", st_seed, "seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*ds && ds_fps && ds_count == 0) {
    std::cerr << "downsample: --fps needs --count\n";
    return 2;
  }
  if (*pl && pl_server.empty() && pl_trace.empty()) {
    std::cerr << "play: give --server, or --trace with --video\n";
    return 2;
  }

  try {
    if (*ds) {
      CloudPtr in = load_cloud(ds_in);
      volut_cloud* out = nullptr;
      if (ds_fps) {
        check(volut_downsample_fps(in.get(), ds_count, &out));
      } else {
        check(volut_downsample_random(in.get(), ds_ratio, ds_seed, &out));
      }
      CloudPtr result(out);
      check(volut_cloud_save_ply(result.get(), ds_out.c_str(), ds_ascii ? 0 : 1));
      std::cout << json{{"input_points", volut_cloud_size(in.get())}, {"output_points", volut_cloud_size(result.get())}}
                       .dump()
                << "\n";
    } else if (*us) {
      CloudPtr in = load_cloud(us_in);
      LutPtr lut = load_lut(us_lut);
      volut_cloud* out = nullptr;
      char* stats = nullptr;
      check(volut_upsample(in.get(), us_ratio, us_sr.to_json().dump().c_str(), lut.get(), us_seed, &out, &stats));
      CloudPtr result(out);
      const std::string stats_text = take(stats);
      check(volut_cloud_save_ply(result.get(), us_out.c_str(), us_ascii ? 0 : 1));
      emit(stats_text, us_stats);
    } else if (*bl) {
      volut_lut* l = nullptr;
      check(volut_lut_build(bl_n, bl_b, bl_refiner.c_str(), bl_lambda, &l));
      LutPtr lut(l);
      std::uint64_t bytes = 0, table_bytes = 0;
      check(volut_lut_save(lut.get(), bl_out.c_str(), &bytes));
      check(volut_lut_size_bytes(bl_n, bl_b, &table_bytes));
      std::cout << json{{"path", bl_out},
                        {"rf_size", bl_n},
                        {"bins", bl_b},
                        {"table_bytes", table_bytes},
                        {"file_bytes", bytes}}
                       .dump()
                << "\n";
    } else if (*ev) {
      CloudPtr ref = load_cloud(ev_ref);
      CloudPtr test = load_cloud(ev_test);
      char* report = nullptr;
      check(volut_evaluate(ref.get(), test.get(), &report));
      std::cout << take(report) << "\n";
    } else if (*sv) {
      json options = {{"bind", sv_bind}, {"rtt_s", sv_rtt}};
      if (!sv_trace.empty()) options["trace"] = sv_trace;
      volut_server* s = nullptr;
      check(volut_server_start(sv_dir.c_str(), sv_manifest.empty() ? nullptr : sv_manifest.c_str(),
                               options.dump().c_str(), &s));
      ServerPtr server(s);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << json{{"listening", true}, {"port", volut_server_port(server.get())}}.dump() << std::endl;
      while (!g_stop) pause();
      volut_server_stop(server.get());
      std::cout << json{{"stopped", true}, {"bytes_sent", volut_server_bytes_sent(server.get())}}.dump() << "\n";
    } else if (*pl) {
      LutPtr lut = load_lut(pl_lut);
      json config = pl_session.to_json();
      config["sr"] = pl_sr.to_json();
      config["timeout_s"] = pl_timeout;
      config["realtime"] = pl_realtime;
      ServerPtr local;
      std::string endpoint = pl_server;
      if (!pl_trace.empty()) {
        json options = {{"bind", "127.0.0.1:0"}, {"trace", pl_trace}, {"rtt_s", pl_rtt}};
        volut_server* s = nullptr;
        check(volut_server_start(pl_video.c_str(), pl_manifest.empty() ? nullptr : pl_manifest.c_str(),
                                 options.dump().c_str(), &s));
        local.reset(s);
        endpoint = "127.0.0.1:" + std::to_string(volut_server_port(s));
      }
      char* report = nullptr;
      const volut_status status = volut_play(endpoint.c_str(), config.dump().c_str(), lut.get(),
                                             pl_out_dir.empty() ? nullptr : pl_out_dir.c_str(),
                                             pl_session.no_timing ? 0 : 1, &report);
      if (local) volut_server_stop(local.get());
      check(status);
      emit(take(report), pl_session.report);
    } else if (*sm) {
      LutPtr lut = load_lut(sm_lut);
      json config = sm_session.to_json();
      config["rtt_s"] = sm_rtt;
      config["sr"] = sm_sr.to_json();
      double per_frame = sm_sr_frame;
      if (sm_calibrate > 0) {
        check(volut_calibrate_sr(sm_calibrate, 2.0, sm_sr.to_json().dump().c_str(), lut.get(), sm_session.seed, 3,
                                 &per_frame));
      }
      config["sr_model"] = {{"per_frame_s", per_frame}, {"per_output_point_s", sm_sr_point}, {"slowdown", sm_slowdown}};
      char* report = nullptr;
      check(volut_simulate(sm_trace.c_str(), sm_manifest.c_str(), config.dump().c_str(), lut.get(),
                           sm_session.no_timing ? 0 : 1, &report));
      emit(take(report), sm_session.report);
    } else if (*bn) {
      LutPtr lut = load_lut(bn_lut);
      json options = {{"suite", bn_suite}, {"points", bn_points}, {"ratios", bn_ratios}, {"repeats", bn_repeats},
                      {"seed", bn_seed},   {"k", bn_k},           {"d", bn_d}};
      char* result = nullptr;
      check(volut_bench(options.dump().c_str(), lut.get(), &result));
      const std::string text = take(result);
      std::cout << text << "\n";
      if (!bn_json.empty()) emit(text, bn_json);
    } else if (*sy) {
      json spec = {{"video_id", sy_id},       {"chunks", sy_chunks}, {"frames_per_chunk", sy_frames},
                   {"points_per_frame", sy_points}, {"point_jitter", sy_jitter}, {"seed", sy_seed}};
      check(volut_synthetic_video(sy_dir.c_str(), spec.dump().c_str(), sy_manifest_only ? 1 : 0));
      std::cout << json{{"dir", sy_dir}, {"manifest", sy_dir + "/manifest.json"}}.dump() << "\n";
    } else if (*st) {
      check(volut_synthetic_trace(st_out.c_str(), st_mean, st_std, st_duration, st_step, st_seed));
      std::cout << json{{"path", st_out}}.dump() << "\n";
    }
  } catch (const CallFailed& e) {
    std::cerr << json{{"error", {{"status", volut_status_name(e.status)}, {"message", e.message}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
