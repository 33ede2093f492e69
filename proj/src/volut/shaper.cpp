#include "volut/shaper.hpp"

#include <algorithm>

#include "volut/error.hpp"

namespace volut {

TraceShaper::TraceShaper(NetworkTrace trace, double rtt_s, double burst_bytes)
    : trace_(std::move(trace)), rtt_s_(rtt_s), burst_bytes_(burst_bytes), tokens_(burst_bytes), last_(0.0) {
  require(rtt_s >= 0.0, "shaper: rtt must be >= 0");
  require(burst_bytes >= 0.0, "shaper: burst must be >= 0");
}

double TraceShaper::schedule(double now, double bytes) {
  require(bytes >= 0.0, "shaper: negative byte count");
  const double start = std::max(now, last_);
  tokens_ = std::min(burst_bytes_, tokens_ + trace_.bits_between(last_, start) / 8.0);
  last_ = start;
  bytes_shaped_ += bytes;
  if (tokens_ >= bytes) {
    tokens_ -= bytes;
    return start;
  }
  const double deficit = bytes - tokens_;
  tokens_ = 0.0;
  const double done = trace_.transfer_end(start, deficit * 8.0);
  if (done > last_) last_ = done;
  return done;
}

}  // namespace volut
