#pragma once

// Vehicle entry detection on the first waterfall column and line-by-line
// keypoint tracking with a fitted-velocity search window.

#include <cstddef>
#include <span>
#include <vector>

#include "dasflow/types.hpp"

namespace dasflow {

/// Dense rows (seconds) x cols (distance points) matrix, row-major.
class Waterfall {
 public:
  Waterfall() = default;
  Waterfall(std::size_t rows, std::size_t cols, double row_period, double col_spacing);
  Waterfall(std::size_t rows, std::size_t cols, double row_period, double col_spacing,
            std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double row_period() const { return row_period_; }
  double col_spacing() const { return col_spacing_; }

  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;
  const std::vector<double>& values() const { return values_; }

  /// Throws unless rows, cols >= 2 and every entry is finite and >= 0.
  void validate() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double row_period_ = 1.0;
  double col_spacing_ = 1.0;
  std::vector<double> values_;
};

struct TrackerConfig {
  double peak_threshold = 0.0;
  double v_init_min = 60.0 / 3.6;   // m/s
  double v_init_max = 120.0 / 3.6;  // m/s
  double cof = 0.3;
  std::size_t fit_window = 5;
  std::size_t min_track_len = 3;
  /// Tracks whose mean keypoint amplitude falls below this are dropped.
  /// Negative disables the check.
  double min_track_score = -1.0;

  void validate() const;
};

struct Keypoint {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Keypoint&) const = default;
};

struct Track {
  std::vector<Keypoint> points;
  double velocity_mps = 0.0;
  bool short_track = false;
  bool operator==(const Track&) const = default;
};

struct TrajectorySet {
  std::vector<Track> tracks;
  bool operator==(const TrajectorySet&) const = default;
};

/// Interior indices i with s[i] > s[i-1], s[i] >= s[i+1] and s[i] > threshold.
std::vector<std::size_t> find_peaks(std::span<const double> series, double threshold);

/// Least-squares slope of col against row over the last `window` points,
/// in meters per second.
double fit_velocity(std::span<const Keypoint> points, const Waterfall& w, std::size_t window);

/// Tracks one vehicle seeded at (entry_row, 0).
Track track_vehicle(const Waterfall& w, std::size_t entry_row, const TrackerConfig& config);

TrajectorySet extract_trajectories(const Waterfall& w, const TrackerConfig& config);

/// Throws unless rows step by one and columns never decrease in every track.
void check_track_invariants(const TrajectorySet& set);

struct MatchStats {
  std::size_t total = 0;  // extracted tracks
  std::size_t correct = 0;
  std::size_t missing = 0;
  std::size_t wrong = 0;
  double accuracy = 0.0;  // correct / truth count
};

/// One-to-one matching of extracted to truth tracks. A pair qualifies when
/// the tracks share at least one row and their mean absolute column error
/// over shared rows is <= tol_cols; qualifying pairs are taken greedily by
/// entry-row distance, then column error.
MatchStats match_trajectories(const TrajectorySet& extracted, const TrajectorySet& truth,
                              double tol_cols);

}  // namespace dasflow
