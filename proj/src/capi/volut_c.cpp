#include "volut/volut.h"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "volut/bench.hpp"
#include "volut/config.hpp"
#include "volut/error.hpp"
#include "volut/lut.hpp"
#include "volut/manifest.hpp"
#include "volut/metrics.hpp"
#include "volut/ply.hpp"
#include "volut/sampling.hpp"
#include "volut/server.hpp"
#include "volut/session.hpp"
#include "volut/sr_pipeline.hpp"
#include "volut/synthetic.hpp"
#include "volut/trace.hpp"

struct volut_cloud {
  volut::PointCloud cloud;
};

struct volut_lut {
  volut::LutTable table;
  std::uint64_t serialized_bytes;
};

struct volut_server {
  std::unique_ptr<volut::Server> server;
};

namespace {

thread_local std::string g_last_error;

volut_status set_error(volut_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, mapping every exception to a status and the thread's last error.
template <typename F>
volut_status guarded(F&& body) {
  try {
    body();
    return VOLUT_OK;
  } catch (const volut::Error& e) {
    return set_error(static_cast<volut_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(VOLUT_ERR_CAPACITY, "out of memory");
  } catch (const std::exception& e) {
    return set_error(VOLUT_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(VOLUT_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (!p) volut::fail(volut::ErrorCode::kInvalidArgument, std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string_view opt_text(const char* s) { return s ? std::string_view(s) : std::string_view(); }

const volut::LutTable* table_of(const volut_lut* lut) { return lut ? &lut->table : nullptr; }

}  // namespace

extern "C" {

const char* volut_version(void) { return "1.0.0"; }

const char* volut_status_name(volut_status status) {
  if (status == VOLUT_OK) return "ok";
  if (status < VOLUT_ERR_INVALID_ARGUMENT || status > VOLUT_ERR_INTERNAL) return "unknown";
  return volut::error_code_name(static_cast<volut::ErrorCode>(status));
}

const char* volut_last_error(void) { return g_last_error.c_str(); }

void volut_string_free(char* s) { std::free(s); }

volut_status volut_cloud_create(const float* xyz, const uint8_t* rgb, size_t count, volut_cloud** out) {
  return guarded([&] {
    need(out, "out");
    if (count > 0) need(xyz, "xyz");
    std::vector<volut::Vec3> pos(count);
    for (size_t i = 0; i < count; ++i) pos[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
    std::vector<volut::Rgb> col;
    if (rgb) {
      col.resize(count);
      for (size_t i = 0; i < count; ++i) col[i] = {rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]};
    }
    *out = new volut_cloud{volut::PointCloud(std::move(pos), std::move(col))};
  });
}

volut_status volut_cloud_load_ply(const char* path, volut_cloud** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new volut_cloud{volut::load_ply(path)};
  });
}

volut_status volut_cloud_save_ply(const volut_cloud* cloud, const char* path, int binary) {
  return guarded([&] {
    need(cloud, "cloud");
    need(path, "path");
    volut::save_ply(cloud->cloud, path, binary ? volut::PlyFormat::kBinary : volut::PlyFormat::kAscii);
  });
}

size_t volut_cloud_size(const volut_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

int volut_cloud_has_colors(const volut_cloud* cloud) { return cloud && cloud->cloud.has_colors() ? 1 : 0; }

volut_status volut_cloud_positions(const volut_cloud* cloud, float* xyz) {
  return guarded([&] {
    need(cloud, "cloud");
    need(xyz, "xyz");
    size_t i = 0;
    for (const volut::Vec3& p : cloud->cloud.positions()) {
      xyz[i++] = p.x;
      xyz[i++] = p.y;
      xyz[i++] = p.z;
    }
  });
}

volut_status volut_cloud_colors(const volut_cloud* cloud, uint8_t* rgb) {
  return guarded([&] {
    need(cloud, "cloud");
    need(rgb, "rgb");
    if (!cloud->cloud.has_colors()) volut::fail(volut::ErrorCode::kInvalidArgument, "cloud has no colors");
    size_t i = 0;
    for (const volut::Rgb& c : cloud->cloud.colors()) {
      rgb[i++] = c.r;
      rgb[i++] = c.g;
      rgb[i++] = c.b;
    }
  });
}

void volut_cloud_free(volut_cloud* cloud) { delete cloud; }

volut_status volut_downsample_random(const volut_cloud* cloud, double ratio, uint64_t seed, volut_cloud** out) {
  return guarded([&] {
    need(cloud, "cloud");
    need(out, "out");
    *out = new volut_cloud{volut::random_downsample(cloud->cloud, ratio, seed)};
  });
}

volut_status volut_downsample_fps(const volut_cloud* cloud, size_t count, volut_cloud** out) {
  return guarded([&] {
    need(cloud, "cloud");
    need(out, "out");
    *out = new volut_cloud{volut::farthest_point_sample(cloud->cloud, count)};
  });
}

volut_status volut_upsample(const volut_cloud* cloud, double ratio, const char* sr_json, const volut_lut* lut,
                            uint64_t seed, volut_cloud** out, char** stats_json) {
  return guarded([&] {
    need(cloud, "cloud");
    need(out, "out");
    if (!(std::isfinite(ratio) && ratio >= 1.0))
      volut::fail(volut::ErrorCode::kInvalidArgument, "upsample: ratio must be at least 1");
    const volut::SrConfig config = volut::sr_config_from_json(opt_text(sr_json));
    const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(cloud->cloud.size())));
    volut::SrResult r = volut::super_resolve(cloud->cloud, target, config, table_of(lut), seed);
    if (stats_json) {
      nlohmann::json j = {{"input_points", cloud->cloud.size()},
                          {"output_points", r.cloud.size()},
                          {"dilation", r.dilation},
                          {"refined", lut != nullptr && config.refine},
                          {"timings",
                           {{"knn_s", r.timings.knn_s},
                            {"pairing_s", r.timings.pairing_s},
                            {"neighbor_s", r.timings.neighbor_s},
                            {"colorize_s", r.timings.colorize_s},
                            {"refine_s", r.timings.refine_s},
                            {"total_s", r.timings.total_s}}}};
      *stats_json = dup_string(j.dump(2));
    }
    *out = new volut_cloud{std::move(r.cloud)};
  });
}

volut_status volut_evaluate(const volut_cloud* reference, const volut_cloud* test, char** report_json) {
  return guarded([&] {
    need(reference, "reference");
    need(test, "test");
    need(report_json, "report_json");
    const volut::QualityReport q = volut::evaluate_quality(reference->cloud, test->cloud);
    nlohmann::json j = {{"chamfer", q.chamfer},
                        {"geometry_psnr", q.exact ? nlohmann::json(nullptr) : nlohmann::json(q.geometry_psnr)},
                        {"exact", q.exact},
                        {"reference_points", q.point_count_in},
                        {"test_points", q.point_count_out}};
    *report_json = dup_string(j.dump(2));
  });
}

volut_status volut_lut_size_bytes(size_t rf_size, uint32_t bins, uint64_t* bytes) {
  return guarded([&] {
    need(bytes, "bytes");
    *bytes = volut::lut_size_bytes(rf_size, bins);
  });
}

volut_status volut_lut_build(size_t rf_size, uint32_t bins, const char* refiner, double lambda, volut_lut** out) {
  return guarded([&] {
    need(out, "out");
    const std::string name = refiner ? refiner : "laplacian";
    volut::RefinementFunction f;
    if (name == "laplacian")
      f = volut::laplacian_refiner(lambda);
    else if (name == "zero")
      f = volut::zero_refiner();
    else
      volut::fail(volut::ErrorCode::kInvalidArgument, "unknown refiner '" + name + "' (laplacian, zero)");
    volut::LutTable table = volut::build_lut(f, rf_size, bins);
    const std::uint64_t size = volut::serialize_lut(table).size();
    *out = new volut_lut{std::move(table), size};
  });
}

volut_status volut_lut_load(const char* path, volut_lut** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    volut::LutTable table = volut::load_lut(path);
    const std::uint64_t size = std::filesystem::file_size(path);
    *out = new volut_lut{std::move(table), size};
  });
}

volut_status volut_lut_save(const volut_lut* lut, const char* path, uint64_t* bytes_written) {
  return guarded([&] {
    need(lut, "lut");
    need(path, "path");
    volut::save_lut(lut->table, path);
    if (bytes_written) *bytes_written = lut->serialized_bytes;
  });
}

size_t volut_lut_rf_size(const volut_lut* lut) { return lut ? lut->table.rf_size() : 0; }

uint32_t volut_lut_bins(const volut_lut* lut) { return lut ? lut->table.bins() : 0; }

void volut_lut_free(volut_lut* lut) { delete lut; }

volut_status volut_simulate(const char* trace_csv, const char* manifest_path, const char* config_json,
                            const volut_lut* lut, int with_timing, char** report_json) {
  return guarded([&] {
    need(trace_csv, "trace_csv");
    need(manifest_path, "manifest_path");
    need(report_json, "report_json");
    const volut::NetworkTrace trace = volut::load_trace_csv(trace_csv);
    const volut::ChunkManifest manifest = volut::load_manifest(manifest_path);
    const volut::SessionConfig config = volut::session_config_from_json(opt_text(config_json));
    const volut::SessionReport report =
        volut::simulate_session(trace, manifest, config, lut ? lut->serialized_bytes : 0);
    *report_json = dup_string(volut::report_to_json(report, with_timing != 0));
  });
}

volut_status volut_play(const char* endpoint, const char* config_json, const volut_lut* lut, const char* out_dir,
                        int with_timing, char** report_json) {
  return guarded([&] {
    need(endpoint, "endpoint");
    need(report_json, "report_json");
    const volut::Endpoint ep = volut::parse_endpoint(endpoint);
    const volut::SessionConfig config = volut::session_config_from_json(opt_text(config_json));
    volut::FrameSink sink;
    if (out_dir) {
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      sink = [dir](std::size_t chunk, const std::vector<volut::PointCloud>& frames) {
        std::filesystem::create_directories(volut::frame_path(dir, chunk, 0).parent_path());
        for (std::size_t f = 0; f < frames.size(); ++f)
          volut::save_ply(frames[f], volut::frame_path(dir, chunk, f), volut::PlyFormat::kBinary);
      };
    }
    const volut::SessionReport report =
        volut::live_session(ep, config, table_of(lut), lut ? lut->serialized_bytes : 0, sink);
    *report_json = dup_string(volut::report_to_json(report, with_timing != 0));
  });
}

volut_status volut_calibrate_sr(size_t points, double sr_ratio, const char* sr_json, const volut_lut* lut,
                                uint64_t seed, int repeats, double* per_frame_s) {
  return guarded([&] {
    need(per_frame_s, "per_frame_s");
    const volut::SrConfig config = volut::sr_config_from_json(opt_text(sr_json));
    *per_frame_s = volut::calibrate_sr_latency(points, sr_ratio, config, table_of(lut), seed, repeats).per_frame_s;
  });
}

volut_status volut_report_recompute_qoe(const char* report_json, double* total_qoe) {
  return guarded([&] {
    need(report_json, "report_json");
    need(total_qoe, "total_qoe");
    *total_qoe = volut::recompute_qoe(volut::report_from_json(report_json));
  });
}

volut_status volut_server_start(const char* video_dir, const char* manifest_path, const char* options_json,
                                volut_server** out) {
  return guarded([&] {
    need(video_dir, "video_dir");
    need(out, "out");
    const std::filesystem::path dir(video_dir);
    const std::filesystem::path manifest = manifest_path ? std::filesystem::path(manifest_path) : dir / "manifest.json";
    auto store = volut::VideoStore::load(dir, manifest);
    auto server = std::make_unique<volut::Server>(std::move(store), volut::server_options_from_json(opt_text(options_json)));
    server->start();
    *out = new volut_server{std::move(server)};
  });
}

uint16_t volut_server_port(const volut_server* server) { return server ? server->server->port() : 0; }

uint64_t volut_server_bytes_sent(const volut_server* server) { return server ? server->server->bytes_sent() : 0; }

void volut_server_stop(volut_server* server) {
  if (server) server->server->stop();
}

void volut_server_free(volut_server* server) { delete server; }

volut_status volut_bench(const char* options_json, const volut_lut* lut, char** result_json) {
  return guarded([&] {
    need(result_json, "result_json");
    *result_json = dup_string(volut::run_bench(volut::bench_options_from_json(opt_text(options_json)), table_of(lut)));
  });
}

volut_status volut_synthetic_video(const char* dir, const char* spec_json, int manifest_only) {
  return guarded([&] {
    need(dir, "dir");
    const volut::VideoSpec spec = volut::video_spec_from_json(opt_text(spec_json));
    if (manifest_only) {
      std::filesystem::create_directories(dir);
      volut::save_manifest(volut::synthetic_manifest(spec), std::filesystem::path(dir) / "manifest.json");
    } else {
      volut::write_synthetic_video(dir, spec);
    }
  });
}

volut_status volut_synthetic_trace(const char* path, double mean_mbps, double std_mbps, double duration_s,
                                   double step_s, uint64_t seed) {
  return guarded([&] {
    need(path, "path");
    volut::save_trace_csv(volut::synthetic_lte_trace(mean_mbps, std_mbps, duration_s, step_s, seed), path);
  });
}

}  // extern "C"
