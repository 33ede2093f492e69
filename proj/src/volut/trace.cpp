#include "volut/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "volut/error.hpp"

namespace volut {

NetworkTrace::NetworkTrace(std::vector<TraceSample> samples) : samples_(std::move(samples)) {
  require(!samples_.empty(), "trace: no samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    require(std::isfinite(samples_[i].t_s) && std::isfinite(samples_[i].bandwidth_bps),
            "trace: non-finite sample");
    require(samples_[i].bandwidth_bps >= 0.0, "trace: negative bandwidth");
    require(i == 0 || samples_[i].t_s > samples_[i - 1].t_s, "trace: timestamps must strictly increase");
  }
}

NetworkTrace NetworkTrace::constant(double bandwidth_bps) {
  return NetworkTrace({{0.0, bandwidth_bps}});
}

std::size_t NetworkTrace::segment_at(double t) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const TraceSample& s) { return v < s.t_s; });
  return it == samples_.begin() ? 0 : static_cast<std::size_t>(it - samples_.begin()) - 1;
}

double NetworkTrace::bandwidth_at(double t) const { return samples_[segment_at(t)].bandwidth_bps; }

double NetworkTrace::bits_between(double t0, double t1) const {
  if (t1 <= t0) return 0.0;
  double bits = 0.0;
  double t = t0;
  std::size_t seg = segment_at(t0);
  while (t < t1) {
    const double seg_end = seg + 1 < samples_.size() ? samples_[seg + 1].t_s : t1;
    const double end = std::min(seg_end, t1);
    bits += samples_[seg].bandwidth_bps * (end - t);
    t = end;
    ++seg;
  }
  return bits;
}

double NetworkTrace::transfer_end(double t0, double bits) const {
  if (bits <= 0.0) return t0;
  double remaining = bits;
  double t = t0;
  std::size_t seg = segment_at(t0);
  while (true) {
    const double bw = samples_[seg].bandwidth_bps;
    if (seg + 1 >= samples_.size()) {
      if (bw <= 0.0) return std::numeric_limits<double>::infinity();
      return t + remaining / bw;
    }
    const double seg_end = samples_[seg + 1].t_s;
    const double capacity = bw * (seg_end - t);
    if (capacity >= remaining && bw > 0.0) return t + remaining / bw;
    remaining -= capacity;
    t = seg_end;
    ++seg;
  }
}

double NetworkTrace::mean_bandwidth(double t0, double t1) const {
  require(t1 > t0, "trace: empty interval");
  return bits_between(t0, t1) / (t1 - t0);
}

NetworkTrace parse_trace_csv(std::string_view text) {
  std::vector<TraceSample> samples;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "timestamp_s,bandwidth_mbps")
        fail(ErrorCode::kFormat, "trace csv: expected header 'timestamp_s,bandwidth_mbps' on line " +
                                     std::to_string(line_no));
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos)
      fail(ErrorCode::kFormat, "trace csv: missing comma on line " + std::to_string(line_no));
    double t = 0.0, mbps = 0.0;
    const auto a = line.substr(0, comma);
    const auto b = line.substr(comma + 1);
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), t);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), mbps);
    if (ra.ec != std::errc{} || ra.ptr != a.data() + a.size() || rb.ec != std::errc{} ||
        rb.ptr != b.data() + b.size())
      fail(ErrorCode::kFormat, "trace csv: malformed number on line " + std::to_string(line_no));
    samples.push_back({t, mbps * 1e6});
  }
  if (!header_seen) fail(ErrorCode::kFormat, "trace csv: empty file");
  try {
    return NetworkTrace(std::move(samples));
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("trace csv: ") + e.what());
  }
}

NetworkTrace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "trace: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace_csv(ss.str());
}

std::string write_trace_csv(const NetworkTrace& trace) {
  std::string out = "timestamp_s,bandwidth_mbps\n";
  char buf[64];
  for (const TraceSample& s : trace.samples()) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f\n", s.t_s, s.bandwidth_bps / 1e6);
    out += buf;
  }
  return out;
}

void save_trace_csv(const NetworkTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "trace: cannot open " + path.string() + " for writing");
  out << write_trace_csv(trace);
}

}  // namespace volut
