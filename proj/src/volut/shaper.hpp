#pragma once

#include <cstddef>

#include "volut/trace.hpp"

namespace volut {

// Token bucket refilled at the trace's bandwidth. Both the live socket
// path and the virtual-time simulator drive transfers through schedule(),
// so they see identical pacing.
class TraceShaper {
 public:
  explicit TraceShaper(NetworkTrace trace, double rtt_s = 0.010, double burst_bytes = 16384.0);

  // Time (trace clock) at which `bytes` offered at `now` have cleared the
  // bucket. Calls must use non-decreasing `now`.
  double schedule(double now, double bytes);

  double rtt() const { return rtt_s_; }
  double bytes_shaped() const { return bytes_shaped_; }
  const NetworkTrace& trace() const { return trace_; }

 private:
  NetworkTrace trace_;
  double rtt_s_;
  double burst_bytes_;
  double tokens_;
  double last_;
  double bytes_shaped_ = 0.0;
};

}  // namespace volut
