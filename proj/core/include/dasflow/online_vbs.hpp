#pragma once

// Constant-memory streaming mean estimation with variable bandwidth
// selection. The state keeps L layers of pseudo summary statistics, each
// accumulated at a drifting candidate bandwidth, and L centroids recording
// the weighted average bandwidth that fed each layer. Memory is a function
// of (L, G) only.

#include <cstdint>
#include <span>
#include <vector>

#include "dasflow/lpr.hpp"
#include "dasflow/types.hpp"

namespace dasflow {

inline constexpr std::size_t kMaxLadder = 32;

struct OnlineConfig {
  std::size_t ladder = 5;
  /// Re-estimate sigma^2 from one-step-ahead residuals every `refresh_period`
  /// frames. 0 disables refresh so h follows C (fD)^{-1/5} exactly.
  std::uint32_t refresh_period = 0;
};

/// Candidate bandwidths ((L - l + 1) / L)^{1/5} h for l = 1..L.
std::vector<double> candidate_bandwidths(double h, std::size_t ladder);

/// Index of the centroid nearest to `eta`; ties go to the lowest index.
std::size_t match_centroid(double eta, std::span<const double> centroids);

class OnlineState {
 public:
  /// Zeroed state with the bandwidth pilot fitted on `pilot_frame`. The
  /// pilot frame is not ingested.
  static OnlineState init(const EvalGrid& grid, const OnlineConfig& config,
                          const FrameRecord& pilot_frame);
  /// Zeroed state around an existing pilot.
  static OnlineState with_pilot(const EvalGrid& grid, const OnlineConfig& config,
                                const BandwidthPilot& pilot);

  /// Ingests one frame: advances f, rebuilds the candidate ladder, merges the
  /// frame's statistics into the matched layers and updates the centroids.
  /// Reads of previous layers and centroids use the pre-update snapshot.
  void ingest(const FrameRecord& frame);

  /// Local linear estimate from layer 1, whose latest bandwidth is h(f).
  MeanCurve query_mean() const;

  /// h(f) = C (f D)^{-1/5}, clamped. Throws when no frame has been ingested.
  double current_bandwidth() const;

  /// Serialized byte count; depends on (L, G) only.
  std::size_t state_size() const;

  std::uint64_t frame_count() const { return frame_count_; }
  std::size_t ladder_size() const { return centroids_.size(); }
  const EvalGrid& grid() const { return grid_; }
  const BandwidthPilot& pilot() const { return pilot_; }
  const std::vector<double>& centroids() const { return centroids_; }
  /// Candidate ladder used by the most recent ingest. Throws before the first.
  std::vector<double> etas() const { return candidate_bandwidths(current_bandwidth(), ladder_size()); }
  const GridStats& layer(std::size_t l) const { return layers_[l]; }
  std::uint32_t refresh_period() const { return refresh_period_; }

  /// Checkpoint blob; see README for the byte layout.
  std::vector<std::uint8_t> serialize() const;
  static OnlineState deserialize(std::span<const std::uint8_t> bytes);

  bool operator==(const OnlineState&) const = default;

 private:
  OnlineState() = default;

  void accumulate_residuals(const FrameRecord& frame);

  EvalGrid grid_;
  BandwidthPilot pilot_;
  std::uint64_t frame_count_ = 0;
  std::uint32_t refresh_period_ = 0;
  std::vector<double> centroids_;
  std::vector<GridStats> layers_;
  // One-step-ahead residual accumulator for bandwidth refresh.
  double residual_sum_ = 0.0;
  std::uint64_t residual_count_ = 0;
};

}  // namespace dasflow
