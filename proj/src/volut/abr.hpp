#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace volut {

struct QoeWeights {
  double alpha = 1.0;  // quality
  double beta = 1.0;   // quality variation
  double gamma = 4.0;  // stall seconds
  double drop_penalty_multiplier = 2.0;
};

void validate(const QoeWeights& w);

// Monotone map from fetched density ratio r in (0, 1] to a quality score
// in [0, 1] with quality(1) = 1. Either the analytic log curve
// log(1 + theta r) / log(1 + theta) or a measured table interpolated
// piecewise-linearly between (ratio, quality) knots.
class QualityCurve {
 public:
  static QualityCurve logarithmic(double theta = 20.0);
  static QualityCurve table(std::vector<std::pair<double, double>> knots);

  double operator()(double r) const;
  bool is_table() const { return !knots_.empty(); }
  double theta() const { return theta_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  double theta_ = 20.0;
  std::vector<std::pair<double, double>> knots_;
};

struct AbrConfig {
  QoeWeights weights;
  std::size_t horizon = 3;
  std::size_t window = 5;
  double grid_step = 0.01;
  double r_min = 0.1;
  // When non-empty, restricts decisions to these ratios (discrete ABR).
  std::vector<double> discrete_ratios;
  double initial_throughput_bps = 5e6;
  double initial_sr_latency_s = 0.005;
};

struct AbrState {
  double buffer_level = 0.0;              // seconds of playable content
  std::deque<double> throughput_history;  // bits/s, newest last
  std::deque<double> sr_latency_history;  // seconds per frame, newest last
  double sr_latency_estimate = 0.0;
  double last_ratio = 1.0;
  bool has_last_ratio = false;
  // Nothing fetched yet: the first chunk has no deadline, so its wait is
  // startup delay rather than stall.
  bool startup = false;
  std::size_t window = 5;
};

AbrState initial_state(const AbrConfig& config);

// Harmonic mean of the last `window` samples.
double estimate_throughput(std::span<const double> history, std::size_t window);
double estimate_throughput(const std::deque<double>& history, std::size_t window);

double qoe_chunk(double r_i, double r_prev, double predicted_stall_s, const QoeWeights& weights,
                 const QualityCurve& curve);

struct QoeTerms {
  double quality = 0.0;    // alpha-weighted
  double variation = 0.0;  // beta-weighted, multiplier applied
  double stall = 0.0;      // gamma-weighted
  double total = 0.0;
};
QoeTerms qoe_terms(double r_i, double r_prev, double stall_s, const QoeWeights& weights,
                   const QualityCurve& curve);

struct StallPrediction {
  double stall_s = 0.0;
  double download_s = 0.0;
  double sr_s = 0.0;
  double buffer_after = 0.0;
};

StallPrediction predict_stall(double chunk_bytes, double throughput_bps, double sr_latency_per_frame_s,
                              std::size_t frames_per_chunk, double buffer_level,
                              double chunk_duration_s);

// Per-chunk inputs for one horizon step.
struct ChunkModel {
  std::function<double(double)> bytes_at_ratio;
  std::size_t frames = 30;
  double duration_s = 1.0;
};

struct AbrDecision {
  double fetch_ratio = 1.0;
  double sr_ratio = 1.0;
  double expected_qoe = 0.0;
};

std::vector<double> ratio_grid(const AbrConfig& config);

// Receding-horizon exhaustive search over the ratio grid; returns the first
// chunk's ratio of the best sequence, ties broken toward the higher ratio.
AbrDecision mpc_select(const AbrState& state, std::span<const ChunkModel> window,
                       const AbrConfig& config, const QualityCurve& curve);

// Records a finished chunk: slides the sample windows, applies the buffer
// evolution law and remembers the ratio. A non-positive sr latency sample is
// ignored (no SR ran).
AbrState update_after_chunk(const AbrState& state, double measured_throughput_bps,
                            double measured_sr_latency_s, double chosen_ratio,
                            double download_s, double sr_s, double chunk_duration_s);

}  // namespace volut
