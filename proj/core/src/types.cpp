#include "dasflow/types.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace dasflow {

void StreamConfig::validate() const {
  if (points_per_frame < 2) throw ValidationError("points_per_frame must be >= 2");
  if (!(point_spacing > 0.0) || !std::isfinite(point_spacing))
    throw ValidationError("point_spacing must be positive");
  if (fps < 1) throw ValidationError("fps must be >= 1");
  if (!std::isfinite(distance_origin)) throw ValidationError("distance_origin must be finite");
}

std::vector<double> StreamConfig::coordinates() const {
  std::vector<double> xs(points_per_frame);
  for (std::size_t d = 0; d < points_per_frame; ++d) xs[d] = coordinate(d);
  return xs;
}

FrameRecord make_frame(const StreamConfig& config, std::uint32_t second,
                       std::uint32_t frame_index, std::vector<double> amplitudes) {
  FrameRecord frame;
  frame.second = second;
  frame.frame_index = frame_index;
  frame.coordinates = config.coordinates();
  frame.amplitudes = std::move(amplitudes);
  return frame;
}

const FrameRecord& validate_frame(const FrameRecord& frame, const StreamConfig& config) {
  const std::size_t n = frame.coordinates.size();
  if (frame.amplitudes.size() != n) {
    throw ValidationError("length mismatch: " + std::to_string(n) + " coordinates vs " +
                              std::to_string(frame.amplitudes.size()) + " amplitudes",
                          static_cast<std::ptrdiff_t>(std::min(n, frame.amplitudes.size())));
  }
  if (n != config.points_per_frame) {
    throw ValidationError("frame has " + std::to_string(n) + " points, stream declares " +
                          std::to_string(config.points_per_frame));
  }
  if (frame.frame_index < 1 || frame.frame_index > config.fps) {
    throw ValidationError("frame_index " + std::to_string(frame.frame_index) +
                          " outside [1, " + std::to_string(config.fps) + "]");
  }
  for (std::size_t d = 0; d < n; ++d) {
    if (!std::isfinite(frame.coordinates[d])) {
      throw ValidationError("non-finite coordinate at index " + std::to_string(d),
                            static_cast<std::ptrdiff_t>(d));
    }
    if (d > 0 && !(frame.coordinates[d] > frame.coordinates[d - 1])) {
      throw ValidationError("non-increasing at index " + std::to_string(d),
                            static_cast<std::ptrdiff_t>(d));
    }
  }
  for (std::size_t d = 0; d < n; ++d) {
    const double a = frame.amplitudes[d];
    if (!std::isfinite(a)) {
      throw ValidationError("non-finite amplitude at index " + std::to_string(d),
                            static_cast<std::ptrdiff_t>(d));
    }
    if (a < 0.0 && !config.allow_negative) {
      throw ValidationError("negative amplitude at index " + std::to_string(d),
                            static_cast<std::ptrdiff_t>(d));
    }
  }
  return frame;
}

EvalGrid::EvalGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ValidationError("grid needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i]))
      throw ValidationError("non-finite grid point at index " + std::to_string(i),
                            static_cast<std::ptrdiff_t>(i));
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw ValidationError("grid non-increasing at index " + std::to_string(i),
                            static_cast<std::ptrdiff_t>(i));
  }
}

double EvalGrid::max_spacing() const {
  double gap = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) gap = std::max(gap, points_[i] - points_[i - 1]);
  return gap;
}

EvalGrid regular_grid(const StreamConfig& config, std::size_t count) {
  if (count < 2) throw ValidationError("grid size must be >= 2");
  config.validate();
  const double lo = config.distance_origin;
  const double length = config.interval_length();
  std::vector<double> xs(count);
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = lo + length * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  xs.back() = lo + length;
  return EvalGrid(std::move(xs));
}

std::size_t MeanCurve::supported_count() const {
  return static_cast<std::size_t>(std::count(supported.begin(), supported.end(), true));
}

std::vector<double> MeanCurve::dense_values() const {
  std::vector<double> out = values;
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < supported.size(); ++i)
    if (supported[i]) good.push_back(i);
  if (good.empty()) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (supported[i]) continue;
    auto hi = std::lower_bound(good.begin(), good.end(), i);
    if (hi == good.begin()) {
      out[i] = values[good.front()];
    } else if (hi == good.end()) {
      out[i] = values[good.back()];
    } else {
      const std::size_t b = *hi;
      const std::size_t a = *std::prev(hi);
      const double t = (grid[i] - grid[a]) / (grid[b] - grid[a]);
      out[i] = values[a] + t * (values[b] - values[a]);
    }
  }
  return out;
}

double interpolate(const EvalGrid& grid, const std::vector<double>& values, double x) {
  const auto& xs = grid.points();
  if (x <= xs.front()) return values.front();
  if (x >= xs.back()) return values.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

}  // namespace dasflow
