#pragma once

#include <cstddef>
#include <vector>

namespace volut {

// Virtual-time model of the client's three-stage pipeline: fetch of chunk
// t+1 overlaps SR of chunk t and playback of earlier chunks. Fetches and SR
// each run one chunk at a time in order. Playback starts when chunk 0 is
// ready; chunk i is due when chunk i-1 finishes playing, and a late chunk
// stalls playback by the difference. The startup delay is kept apart from
// stalls.
struct ChunkEvents {
  double request_s = 0.0;
  double fetch_done_s = 0.0;
  double sr_start_s = 0.0;
  double ready_s = 0.0;
  double deadline_s = 0.0;  // for chunk 0, equals ready_s
  double play_start_s = 0.0;
  double stall_s = 0.0;
};

class PlaybackTimeline {
 public:
  PlaybackTimeline(double chunk_duration_s, double max_buffer_s);

  // When the next fetch may start: after the previous fetch, and no earlier
  // than the buffer dropping to max_buffer_s.
  double next_request_time() const;
  // Seconds of fetched content not yet played at time t. Before playback
  // starts nothing drains, so every fetched chunk counts in full.
  double buffer_level(double t) const;

  const ChunkEvents& add_chunk(double request_s, double download_s, double sr_s);

  const std::vector<ChunkEvents>& events() const { return events_; }
  double startup_delay_s() const { return events_.empty() ? 0.0 : events_.front().ready_s; }
  double total_stall_s() const;
  double end_time_s() const;

 private:
  double chunk_duration_s_;
  double max_buffer_s_;
  std::vector<ChunkEvents> events_;
};

}  // namespace volut
