#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dasflow {

/// Raised when an input violates a documented invariant. `index()` names the
/// first offending element when the violation is positional, else -1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what, std::ptrdiff_t index = -1)
      : std::invalid_argument(what), index_(index) {}

  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// Acquisition geometry of a frame stream. Distances are in meters.
struct StreamConfig {
  std::size_t points_per_frame = 800;
  double point_spacing = 0.4;
  std::uint32_t fps = 3;
  double distance_origin = 0.0;
  /// Accept negative amplitudes (pre-normalized data).
  bool allow_negative = false;

  void validate() const;

  double interval_length() const {
    return static_cast<double>(points_per_frame - 1) * point_spacing;
  }
  double coordinate(std::size_t d) const {
    return distance_origin + static_cast<double>(d) * point_spacing;
  }
  std::vector<double> coordinates() const;
};

/// One frame: D amplitude observations at known distances.
struct FrameRecord {
  std::uint32_t second = 0;
  std::uint32_t frame_index = 1;  // 1-based within its second
  std::vector<double> coordinates;
  std::vector<double> amplitudes;

  std::size_t size() const { return amplitudes.size(); }
  bool operator==(const FrameRecord&) const = default;
};

/// Builds a frame on the regular grid described by `config`.
FrameRecord make_frame(const StreamConfig& config, std::uint32_t second,
                       std::uint32_t frame_index, std::vector<double> amplitudes);

/// Throws ValidationError unless `frame` satisfies every FrameRecord
/// invariant for `config`. Returns the frame unchanged otherwise.
const FrameRecord& validate_frame(const FrameRecord& frame, const StreamConfig& config);

/// Strictly increasing set of evaluation distances.
class EvalGrid {
 public:
  EvalGrid() = default;
  explicit EvalGrid(std::vector<double> points);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  /// Largest gap between neighbouring points.
  double max_spacing() const;

  bool operator==(const EvalGrid&) const = default;

 private:
  std::vector<double> points_;
};

/// G equally spaced points spanning the stream's distance interval.
EvalGrid regular_grid(const StreamConfig& config, std::size_t count);

/// Estimated mean on a grid; `supported[i]` is false where the local fit
/// was degenerate and `values[i]` carries no information.
struct MeanCurve {
  EvalGrid grid;
  std::vector<double> values;
  std::vector<bool> supported;

  std::size_t size() const { return values.size(); }
  std::size_t supported_count() const;
  /// Values with unsupported points filled by linear interpolation from the
  /// nearest supported neighbours (constant extrapolation at the ends).
  std::vector<double> dense_values() const;
};

/// Linear interpolation of `values` on `grid` at `x` (clamped at the ends).
double interpolate(const EvalGrid& grid, const std::vector<double>& values, double x);

}  // namespace dasflow
