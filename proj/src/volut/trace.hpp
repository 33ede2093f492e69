#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace volut {

struct TraceSample {
  double t_s = 0.0;
  double bandwidth_bps = 0.0;
};

// Step-function bandwidth over time. Each sample holds until the next one;
// the last sample holds forever and the first also covers t < t_0.
class NetworkTrace {
 public:
  explicit NetworkTrace(std::vector<TraceSample> samples);
  static NetworkTrace constant(double bandwidth_bps);

  const std::vector<TraceSample>& samples() const { return samples_; }
  double bandwidth_at(double t) const;
  double bits_between(double t0, double t1) const;
  // Earliest time at which `bits` have been carried starting at t0;
  // +infinity when the trace never delivers them.
  double transfer_end(double t0, double bits) const;
  double mean_bandwidth(double t0, double t1) const;

 private:
  std::size_t segment_at(double t) const;

  std::vector<TraceSample> samples_;
};

// CSV with header `timestamp_s,bandwidth_mbps` (1 Mbps = 1e6 bit/s).
NetworkTrace parse_trace_csv(std::string_view text);
NetworkTrace load_trace_csv(const std::filesystem::path& path);
std::string write_trace_csv(const NetworkTrace& trace);
void save_trace_csv(const NetworkTrace& trace, const std::filesystem::path& path);

}  // namespace volut
