#include "volut/abr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "volut/error.hpp"

namespace volut {

void validate(const QoeWeights& w) {
  require(w.alpha >= 0.0 && w.beta >= 0.0 && w.gamma >= 0.0, "qoe weights must be non-negative");
  require(w.alpha > 0.0 || w.beta > 0.0 || w.gamma > 0.0, "at least one qoe weight must be positive");
  require(w.drop_penalty_multiplier >= 1.0, "drop penalty multiplier must be >= 1");
}

QualityCurve QualityCurve::logarithmic(double theta) {
  require(theta > 0.0, "quality curve: theta must be positive");
  QualityCurve c;
  c.theta_ = theta;
  return c;
}

QualityCurve QualityCurve::table(std::vector<std::pair<double, double>> knots) {
  require(!knots.empty(), "quality curve: empty table");
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    require(knots[i].first > 0.0 && knots[i].first <= 1.0, "quality curve: ratio outside (0, 1]");
    require(i == 0 || knots[i].first > knots[i - 1].first, "quality curve: duplicate ratio");
    require(i == 0 || knots[i].second >= knots[i - 1].second, "quality curve: table must be non-decreasing");
  }
  require(knots.back().first == 1.0 && knots.back().second == 1.0, "quality curve: table must end at (1, 1)");
  require(knots.front().second >= 0.0, "quality curve: quality must be >= 0");
  QualityCurve c;
  c.knots_ = std::move(knots);
  return c;
}

double QualityCurve::operator()(double r) const {
  if (knots_.empty()) return std::log1p(theta_ * r) / std::log1p(theta_);
  if (r <= knots_.front().first) return knots_.front().second * (r / knots_.front().first);
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (r <= knots_[i].first) {
      const auto [r0, q0] = knots_[i - 1];
      const auto [r1, q1] = knots_[i];
      return q0 + (q1 - q0) * (r - r0) / (r1 - r0);
    }
  }
  return 1.0;
}

AbrState initial_state(const AbrConfig& config) {
  require(config.window >= 1, "abr: window must be >= 1");
  AbrState s;
  s.window = config.window;
  s.sr_latency_estimate = config.initial_sr_latency_s;
  return s;
}

double estimate_throughput(std::span<const double> history, std::size_t window) {
  require(!history.empty(), "throughput estimate: empty history");
  require(window >= 1, "throughput estimate: window must be >= 1");
  const std::size_t w = std::min(window, history.size());
  double inv = 0.0;
  for (std::size_t i = history.size() - w; i < history.size(); ++i) {
    require(history[i] > 0.0, "throughput estimate: non-positive sample");
    inv += 1.0 / history[i];
  }
  return static_cast<double>(w) / inv;
}

double estimate_throughput(const std::deque<double>& history, std::size_t window) {
  const std::vector<double> v(history.begin(), history.end());
  return estimate_throughput(std::span<const double>(v), window);
}

QoeTerms qoe_terms(double r_i, double r_prev, double stall_s, const QoeWeights& weights,
                   const QualityCurve& curve) {
  require(r_i > 0.0 && r_i <= 1.0 && r_prev > 0.0 && r_prev <= 1.0, "qoe: ratio outside (0, 1]");
  const double q = curve(r_i);
  const double q_prev = curve(r_prev);
  double v = std::fabs(q - q_prev);
  if (q < q_prev) v *= weights.drop_penalty_multiplier;
  QoeTerms t;
  t.quality = weights.alpha * q;
  t.variation = weights.beta * v;
  t.stall = weights.gamma * stall_s;
  t.total = t.quality - t.variation - t.stall;
  return t;
}

double qoe_chunk(double r_i, double r_prev, double predicted_stall_s, const QoeWeights& weights,
                 const QualityCurve& curve) {
  return qoe_terms(r_i, r_prev, predicted_stall_s, weights, curve).total;
}

StallPrediction predict_stall(double chunk_bytes, double throughput_bps, double sr_latency_per_frame_s,
                              std::size_t frames_per_chunk, double buffer_level,
                              double chunk_duration_s) {
  require(throughput_bps > 0.0, "predict_stall: throughput must be positive");
  StallPrediction p;
  p.download_s = 8.0 * chunk_bytes / throughput_bps;
  p.sr_s = static_cast<double>(frames_per_chunk) * sr_latency_per_frame_s;
  const double busy = p.download_s + p.sr_s;
  p.stall_s = std::max(0.0, busy - buffer_level);
  p.buffer_after = std::max(0.0, buffer_level - busy) + chunk_duration_s;
  return p;
}

std::vector<double> ratio_grid(const AbrConfig& config) {
  std::vector<double> grid;
  if (!config.discrete_ratios.empty()) {
    grid = config.discrete_ratios;
    for (double r : grid) require(r > 0.0 && r <= 1.0, "abr: discrete ratio outside (0, 1]");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
  }
  require(config.grid_step > 0.0 && config.grid_step <= 0.5, "abr: grid step must lie in (0, 0.5]");
  require(config.r_min > 0.0 && config.r_min <= 1.0, "abr: r_min must lie in (0, 1]");
  for (std::size_t i = 0;; ++i) {
    double r = config.r_min + static_cast<double>(i) * config.grid_step;
    r = std::round(r * 1e9) / 1e9;
    if (r > 1.0 + 1e-9) break;
    grid.push_back(std::min(r, 1.0));
  }
  if (grid.empty()) fail(ErrorCode::kInvalidArgument, "abr: empty ratio grid");
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

namespace {

struct Search {
  const std::vector<double>& grid;
  const std::vector<double>& quality;           // curve(grid[g])
  const std::vector<std::vector<double>>& bytes;  // [step][g]
  std::span<const ChunkModel> window;
  double throughput;
  double sr_latency;
  const QoeWeights& w;
  bool startup;

  double best_from(std::size_t step, std::size_t prev_g, double buffer) const {
    if (step == bytes.size()) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t g = grid.size(); g-- > 0;) {
      const double value = step_value(step, g, quality[prev_g], buffer);
      if (value > best) best = value;
    }
    return best;
  }

  double step_value(std::size_t step, std::size_t g, double q_prev, double buffer) const {
    const ChunkModel& m = window[step];
    const StallPrediction p =
        predict_stall(bytes[step][g], throughput, sr_latency, m.frames, buffer, m.duration_s);
    const double q = quality[g];
    double v = std::fabs(q - q_prev);
    if (q < q_prev) v *= w.drop_penalty_multiplier;
    const double stall = startup && step == 0 ? 0.0 : p.stall_s;
    const double here = w.alpha * q - w.beta * v - w.gamma * stall;
    return here + best_from(step + 1, g, p.buffer_after);
  }
};

}  // namespace

AbrDecision mpc_select(const AbrState& state, std::span<const ChunkModel> window,
                       const AbrConfig& config, const QualityCurve& curve) {
  require(config.horizon >= 1, "abr: horizon must be >= 1");
  require(!window.empty(), "abr: empty manifest window");
  validate(config.weights);
  const std::vector<double> grid = ratio_grid(config);
  const std::size_t steps = std::min(config.horizon, window.size());
  std::vector<double> quality(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) quality[g] = curve(grid[g]);
  std::vector<std::vector<double>> bytes(steps, std::vector<double>(grid.size()));
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t g = 0; g < grid.size(); ++g) bytes[s][g] = window[s].bytes_at_ratio(grid[g]);
  }
  const double throughput = state.throughput_history.empty()
                                ? config.initial_throughput_bps
                                : estimate_throughput(state.throughput_history, state.window);
  const Search search{grid, quality, bytes, window.first(steps), throughput,
                      state.sr_latency_estimate, config.weights, state.startup};

  AbrDecision best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t g = grid.size(); g-- > 0;) {
    const double q_prev = state.has_last_ratio ? curve(state.last_ratio) : quality[g];
    const double value = search.step_value(0, g, q_prev, state.buffer_level);
    if (value > best_value) {
      best_value = value;
      best.fetch_ratio = grid[g];
    }
  }
  best.sr_ratio = 1.0 / best.fetch_ratio;
  best.expected_qoe = best_value;
  return best;
}

AbrState update_after_chunk(const AbrState& state, double measured_throughput_bps,
                            double measured_sr_latency_s, double chosen_ratio, double download_s,
                            double sr_s, double chunk_duration_s) {
  require(measured_throughput_bps > 0.0, "abr update: throughput sample must be positive");
  AbrState next = state;
  next.throughput_history.push_back(measured_throughput_bps);
  while (next.throughput_history.size() > next.window) next.throughput_history.pop_front();
  if (measured_sr_latency_s > 0.0) {
    next.sr_latency_history.push_back(measured_sr_latency_s);
    while (next.sr_latency_history.size() > next.window) next.sr_latency_history.pop_front();
    double sum = 0.0;
    for (double v : next.sr_latency_history) sum += v;
    next.sr_latency_estimate = sum / static_cast<double>(next.sr_latency_history.size());
  }
  next.buffer_level = std::max(0.0, state.buffer_level - download_s - sr_s) + chunk_duration_s;
  next.last_ratio = chosen_ratio;
  next.has_last_ratio = true;
  next.startup = false;
  return next;
}

}  // namespace volut
