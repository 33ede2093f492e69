#include "volut/timeline.hpp"

#include <algorithm>
#include <cmath>

#include "volut/error.hpp"

namespace volut {

PlaybackTimeline::PlaybackTimeline(double chunk_duration_s, double max_buffer_s)
    : chunk_duration_s_(chunk_duration_s), max_buffer_s_(max_buffer_s) {
  require(chunk_duration_s > 0.0, "timeline: chunk duration must be > 0");
  require(max_buffer_s >= chunk_duration_s, "timeline: max buffer must hold at least one chunk");
}

double PlaybackTimeline::buffer_level(double t) const {
  double level = 0.0;
  for (const ChunkEvents& e : events_) {
    if (e.fetch_done_s > t) break;
    level += chunk_duration_s_ - std::clamp(t - e.play_start_s, 0.0, chunk_duration_s_);
  }
  return level;
}

double PlaybackTimeline::next_request_time() const {
  if (events_.empty()) return 0.0;
  const double t = events_.back().fetch_done_s;
  if (buffer_level(t) <= max_buffer_s_ + 1e-12) return t;
  // Play intervals are disjoint and in order; find when enough has played.
  double need = static_cast<double>(events_.size()) * chunk_duration_s_ - max_buffer_s_;
  for (const ChunkEvents& e : events_) {
    if (need <= chunk_duration_s_) return std::max(t, e.play_start_s + need);
    need -= chunk_duration_s_;
  }
  return t;  // unreachable: max_buffer_s >= chunk_duration_s
}

const ChunkEvents& PlaybackTimeline::add_chunk(double request_s, double download_s, double sr_s) {
  require(std::isfinite(request_s) && std::isfinite(download_s) && std::isfinite(sr_s),
          "timeline: non-finite event time");
  require(download_s >= 0.0 && sr_s >= 0.0, "timeline: negative duration");
  ChunkEvents e;
  e.request_s = request_s;
  e.fetch_done_s = request_s + download_s;
  e.sr_start_s = events_.empty() ? e.fetch_done_s : std::max(e.fetch_done_s, events_.back().ready_s);
  e.ready_s = e.sr_start_s + sr_s;
  if (events_.empty()) {
    e.deadline_s = e.ready_s;
    e.play_start_s = e.ready_s;
  } else {
    e.deadline_s = events_.back().play_start_s + chunk_duration_s_;
    e.play_start_s = std::max(e.ready_s, e.deadline_s);
    e.stall_s = std::max(0.0, e.ready_s - e.deadline_s);
  }
  events_.push_back(e);
  return events_.back();
}

double PlaybackTimeline::total_stall_s() const {
  double s = 0.0;
  for (const ChunkEvents& e : events_) s += e.stall_s;
  return s;
}

double PlaybackTimeline::end_time_s() const {
  return events_.empty() ? 0.0 : events_.back().play_start_s + chunk_duration_s_;
}

}  // namespace volut
