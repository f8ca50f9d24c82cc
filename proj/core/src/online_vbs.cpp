#include "dasflow/online_vbs.hpp"

#include <cmath>
#include <string>

#include "byte_io.hpp"

namespace dasflow {

namespace {
constexpr char kMagic[4] = {'O', 'V', 'B', 'S'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::vector<double> candidate_bandwidths(double h, std::size_t ladder) {
  if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
  if (ladder < 1) throw ValidationError("ladder size must be >= 1");
  std::vector<double> etas(ladder);
  const auto L = static_cast<double>(ladder);
  etas[0] = h;
  for (std::size_t l = 1; l < ladder; ++l) {
    etas[l] = std::pow((L - static_cast<double>(l)) / L, 0.2) * h;
  }
  return etas;
}

std::size_t match_centroid(double eta, std::span<const double> centroids) {
  if (centroids.empty()) throw ValidationError("no centroids to match");
  std::size_t best = 0;
  double best_dist = std::abs(eta - centroids[0]);
  for (std::size_t i = 1; i < centroids.size(); ++i) {
    const double dist = std::abs(eta - centroids[i]);
    if (dist < best_dist) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

OnlineState OnlineState::init(const EvalGrid& grid, const OnlineConfig& config,
                              const FrameRecord& pilot_frame) {
  const auto pilot = fit_pilot(std::span<const FrameRecord>(&pilot_frame, 1));
  return with_pilot(grid, config, pilot);
}

OnlineState OnlineState::with_pilot(const EvalGrid& grid, const OnlineConfig& config,
                                    const BandwidthPilot& pilot) {
  if (config.ladder < 1 || config.ladder > kMaxLadder)
    throw ValidationError("ladder size must be in [1, " + std::to_string(kMaxLadder) + "]");
  if (grid.size() < 2) throw ValidationError("grid needs at least 2 points");
  if (pilot.points_per_frame < 1) throw ValidationError("pilot has no points per frame");
  OnlineState s;
  s.grid_ = grid;
  s.pilot_ = pilot;
  s.refresh_period_ = config.refresh_period;
  s.centroids_.assign(config.ladder, 0.0);
  s.layers_.assign(config.ladder, GridStats(grid.size()));
  return s;
}

double OnlineState::current_bandwidth() const {
  if (frame_count_ == 0) throw ValidationError("no frame ingested yet");
  return pilot_.bandwidth(static_cast<double>(frame_count_) *
                          static_cast<double>(pilot_.points_per_frame));
}

void OnlineState::accumulate_residuals(const FrameRecord& frame) {
  const MeanCurve curve = query_mean();
  if (curve.supported_count() == 0) return;
  const auto dense = curve.dense_values();
  for (std::size_t d = 0; d < frame.size(); ++d) {
    const double x = frame.coordinates[d];
    if (x < grid_.front() || x > grid_.back()) continue;
    const double r = frame.amplitudes[d] - interpolate(grid_, dense, x);
    residual_sum_ += r * r;
    ++residual_count_;
  }
}

void OnlineState::ingest(const FrameRecord& frame) {
  if (frame.size() != pilot_.points_per_frame)
    throw ValidationError("frame has " + std::to_string(frame.size()) + " points, state expects " +
                          std::to_string(pilot_.points_per_frame));
  if (frame.coordinates.empty() || grid_.front() < frame.coordinates.front() ||
      grid_.back() > frame.coordinates.back())
    throw ValidationError("grid extends beyond the frame's coordinate span");

  if (refresh_period_ > 0 && frame_count_ > 0) accumulate_residuals(frame);

  ++frame_count_;
  if (refresh_period_ > 0 && frame_count_ > 1 && (frame_count_ - 1) % refresh_period_ == 0 &&
      residual_count_ > 0) {
    pilot_.sigma2_hat = residual_sum_ / static_cast<double>(residual_count_);
    residual_sum_ = 0.0;
    residual_count_ = 0;
  }

  const auto f = static_cast<double>(frame_count_);
  const std::size_t L = centroids_.size();
  const auto etas = candidate_bandwidths(current_bandwidth(), L);

  std::vector<GridStats> next_layers(L);
  std::vector<double> next_centroids(L);
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t j = match_centroid(etas[l], centroids_);
    GridStats stats = frame_stats(frame, grid_, etas[l]);
    accumulate(stats, layers_[j]);
    next_layers[l] = std::move(stats);
    next_centroids[l] = (1.0 - 1.0 / f) * centroids_[j] + etas[l] / f;
  }
  layers_ = std::move(next_layers);
  centroids_ = std::move(next_centroids);
}

MeanCurve OnlineState::query_mean() const {
  if (frame_count_ == 0) throw ValidationError("no frame ingested yet");
  return solve_curve(grid_, layers_.front());
}

std::size_t OnlineState::state_size() const {
  const std::size_t L = centroids_.size();
  const std::size_t G = grid_.size();
  return 4 + 4 + 4 + 4 + 8      // magic, version, L, G, f
         + 8 * 3 + 8 + 8 + 4 + 4 + 8 + 8  // pilot and refresh fields
         + 8 * G + 8 * L + 48 * L * G;
}

std::vector<std::uint8_t> OnlineState::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(state_size());
  detail::ByteWriter w(out);
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(centroids_.size()));
  w.u32(static_cast<std::uint32_t>(grid_.size()));
  w.u64(frame_count_);
  w.f64(pilot_.sigma2_hat);
  w.f64(pilot_.roughness_hat);
  w.f64(pilot_.interval_length);
  w.u64(pilot_.points_per_frame);
  w.f64(pilot_.h_floor);
  w.u32(static_cast<std::uint32_t>(pilot_.blocks));
  w.u32(refresh_period_);
  w.f64(residual_sum_);
  w.u64(residual_count_);
  for (double x : grid_.points()) w.f64(x);
  for (double c : centroids_) w.f64(c);
  for (const auto& layer : layers_) {
    for (const auto& s : layer) {
      for (double v : s.p) w.f64(v);
      for (double v : s.q) w.f64(v);
    }
  }
  return out;
}

OnlineState OnlineState::deserialize(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.remaining() < 4 || r.bytes(4) != std::string(kMagic, 4)) throw ValidationError("bad magic");
  if (r.u32() != kVersion) throw ValidationError("unsupported checkpoint version");
  const std::uint32_t L = r.u32();
  const std::uint32_t G = r.u32();
  if (L < 1 || L > kMaxLadder) throw ValidationError("checkpoint ladder size out of range");
  if (G < 2) throw ValidationError("checkpoint grid too small");
  OnlineState s;
  s.frame_count_ = r.u64();
  s.pilot_.sigma2_hat = r.f64();
  s.pilot_.roughness_hat = r.f64();
  s.pilot_.interval_length = r.f64();
  s.pilot_.points_per_frame = r.u64();
  s.pilot_.h_floor = r.f64();
  s.pilot_.blocks = r.u32();
  s.refresh_period_ = r.u32();
  s.residual_sum_ = r.f64();
  s.residual_count_ = r.u64();
  if (r.remaining() != 8ull * G + 8ull * L + 48ull * L * G)
    throw ValidationError("checkpoint payload size mismatch");
  std::vector<double> xs(G);
  for (auto& x : xs) x = r.f64();
  s.grid_ = EvalGrid(std::move(xs));
  s.centroids_.resize(L);
  for (auto& c : s.centroids_) c = r.f64();
  s.layers_.assign(L, GridStats(G));
  for (auto& layer : s.layers_) {
    for (auto& st : layer) {
      for (auto& v : st.p) v = r.f64();
      for (auto& v : st.q) v = r.f64();
    }
  }
  return s;
}

}  // namespace dasflow
