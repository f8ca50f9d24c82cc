#include "dasflow/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace dasflow {

Waterfall::Waterfall(std::size_t rows, std::size_t cols, double row_period, double col_spacing)
    : Waterfall(rows, cols, row_period, col_spacing, std::vector<double>(rows * cols, 0.0)) {}

Waterfall::Waterfall(std::size_t rows, std::size_t cols, double row_period, double col_spacing,
                     std::vector<double> values)
    : rows_(rows), cols_(cols), row_period_(row_period), col_spacing_(col_spacing), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) throw ValidationError("waterfall value count mismatch");
  if (!(row_period_ > 0.0) || !(col_spacing_ > 0.0))
    throw ValidationError("waterfall periods must be positive");
}

std::vector<double> Waterfall::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
  return out;
}

void Waterfall::validate() const {
  if (rows_ < 2 || cols_ < 2) throw ValidationError("waterfall needs at least 2 rows and 2 columns");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw ValidationError("waterfall entry " + std::to_string(i) + " is negative or non-finite",
                            static_cast<std::ptrdiff_t>(i));
  }
}

void TrackerConfig::validate() const {
  if (!(v_init_min > 0.0) || !(v_init_max > v_init_min))
    throw ValidationError("need 0 < v_init_min < v_init_max");
  if (!(cof > 0.0 && cof < 1.0)) throw ValidationError("cof must lie in (0, 1)");
  if (fit_window < 2) throw ValidationError("fit_window must be >= 2");
}

std::vector<std::size_t> find_peaks(std::span<const double> series, double threshold) {
  if (series.size() < 3) throw ValidationError("peak search needs at least 3 samples");
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    if (series[i] > series[i - 1] && series[i] >= series[i + 1] && series[i] > threshold)
      peaks.push_back(i);
  }
  return peaks;
}

namespace {

// Slope of col on row, in columns per row.
double slope_cols_per_row(std::span<const Keypoint> points, std::size_t window) {
  if (points.size() < 2) throw ValidationError("velocity fit needs at least 2 points");
  const std::size_t n = std::min(window, points.size());
  const auto tail = points.subspan(points.size() - n);
  double mr = 0.0, mc = 0.0;
  for (const auto& p : tail) {
    mr += static_cast<double>(p.row);
    mc += static_cast<double>(p.col);
  }
  mr /= static_cast<double>(n);
  mc /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : tail) {
    const double dr = static_cast<double>(p.row) - mr;
    sxx += dr * dr;
    sxy += dr * (static_cast<double>(p.col) - mc);
  }
  if (sxx == 0.0) throw ValidationError("velocity fit needs distinct rows");
  return sxy / sxx;
}

}  // namespace

double fit_velocity(std::span<const Keypoint> points, const Waterfall& w, std::size_t window) {
  if (window < 2) throw ValidationError("velocity window must be >= 2");
  return slope_cols_per_row(points, window) * w.col_spacing() / w.row_period();
}

Track track_vehicle(const Waterfall& w, std::size_t entry_row, const TrackerConfig& config) {
  config.validate();
  if (entry_row >= w.rows()) throw ValidationError("entry row outside waterfall");
  const double cols_per_mps = w.row_period() / w.col_spacing();
  const auto last_col = static_cast<std::ptrdiff_t>(w.cols()) - 1;

  Track track;
  track.points.push_back({entry_row, 0});
  if (entry_row + 1 >= w.rows()) {
    track.short_track = true;
    return track;
  }

  for (std::size_t row = entry_row + 1; row < w.rows(); ++row) {
    const auto prev = static_cast<std::ptrdiff_t>(track.points.back().col);
    std::ptrdiff_t lo = 0, hi = 0;
    if (track.points.size() == 1) {
      lo = static_cast<std::ptrdiff_t>(std::floor(config.v_init_min * cols_per_mps));
      hi = static_cast<std::ptrdiff_t>(std::ceil(config.v_init_max * cols_per_mps));
    } else {
      const double v = slope_cols_per_row(track.points, config.fit_window);
      // The projected position has left the matrix.
      if (static_cast<double>(prev) + v > static_cast<double>(last_col) + 0.5) break;
      lo = static_cast<std::ptrdiff_t>(std::floor((1.0 - config.cof) * v));
      hi = static_cast<std::ptrdiff_t>(std::ceil((1.0 + config.cof) * v));
    }
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::max(hi, lo);
    const std::ptrdiff_t from = prev + lo;
    if (from > last_col) break;
    const std::ptrdiff_t to = std::min(prev + hi, last_col);

    const auto values = w.row(row);
    std::ptrdiff_t best = from;
    for (std::ptrdiff_t c = from + 1; c <= to; ++c) {
      if (values[static_cast<std::size_t>(c)] > values[static_cast<std::size_t>(best)]) best = c;
    }
    track.points.push_back({row, static_cast<std::size_t>(best)});
  }

  track.velocity_mps = track.points.size() >= 2 ? fit_velocity(track.points, w, track.points.size()) : 0.0;
  track.short_track = track.points.size() < config.min_track_len;
  return track;
}

TrajectorySet extract_trajectories(const Waterfall& w, const TrackerConfig& config) {
  w.validate();
  config.validate();
  TrajectorySet set;
  for (std::size_t entry : find_peaks(w.column(0), config.peak_threshold)) {
    Track track = track_vehicle(w, entry, config);
    if (track.points.size() < config.min_track_len) continue;
    if (config.min_track_score >= 0.0) {
      double score = 0.0;
      for (const auto& p : track.points) score += w.at(p.row, p.col);
      score /= static_cast<double>(track.points.size());
      if (score < config.min_track_score) continue;
    }
    set.tracks.push_back(std::move(track));
  }
  return set;
}

void check_track_invariants(const TrajectorySet& set) {
  for (std::size_t t = 0; t < set.tracks.size(); ++t) {
    const auto& pts = set.tracks[t].points;
    if (pts.empty()) throw ValidationError("track " + std::to_string(t) + " is empty");
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].row != pts[i - 1].row + 1)
        throw ValidationError("track " + std::to_string(t) + " rows not consecutive at " + std::to_string(i));
      if (pts[i].col < pts[i - 1].col)
        throw ValidationError("track " + std::to_string(t) + " column decreases at " + std::to_string(i));
    }
  }
}

MatchStats match_trajectories(const TrajectorySet& extracted, const TrajectorySet& truth, double tol_cols) {
  if (!(tol_cols >= 0.0)) throw ValidationError("tol_cols must be non-negative");
  struct Candidate {
    std::size_t entry_gap;
    double error;
    std::size_t truth_idx;
    std::size_t extracted_idx;
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < truth.tracks.size(); ++t) {
    const auto& tp = truth.tracks[t].points;
    if (tp.empty()) continue;
    for (std::size_t e = 0; e < extracted.tracks.size(); ++e) {
      const auto& ep = extracted.tracks[e].points;
      if (ep.empty()) continue;
      double err = 0.0;
      std::size_t shared = 0;
      for (const auto& p : ep) {
        if (p.row < tp.front().row) continue;
        const std::size_t k = p.row - tp.front().row;
        if (k >= tp.size() || tp[k].row != p.row) continue;
        err += std::abs(static_cast<double>(p.col) - static_cast<double>(tp[k].col));
        ++shared;
      }
      if (shared == 0) continue;
      err /= static_cast<double>(shared);
      if (err > tol_cols) continue;
      const std::size_t gap = tp.front().row > ep.front().row ? tp.front().row - ep.front().row
                                                             : ep.front().row - tp.front().row;
      candidates.push_back({gap, err, t, e});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.entry_gap, a.error, a.truth_idx, a.extracted_idx) <
           std::tie(b.entry_gap, b.error, b.truth_idx, b.extracted_idx);
  });
  std::vector<bool> truth_used(truth.tracks.size(), false);
  std::vector<bool> extracted_used(extracted.tracks.size(), false);
  MatchStats stats;
  stats.total = extracted.tracks.size();
  for (const auto& c : candidates) {
    if (truth_used[c.truth_idx] || extracted_used[c.extracted_idx]) continue;
    truth_used[c.truth_idx] = extracted_used[c.extracted_idx] = true;
    ++stats.correct;
  }
  stats.missing = truth.tracks.size() - stats.correct;
  stats.wrong = extracted.tracks.size() - stats.correct;
  if (truth.tracks.empty()) {
    stats.accuracy = extracted.tracks.empty() ? 1.0 : 0.0;
  } else {
    stats.accuracy = static_cast<double>(stats.correct) / static_cast<double>(truth.tracks.size());
  }
  return stats;
}

}  // namespace dasflow
