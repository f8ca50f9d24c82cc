#pragma once

// File formats: frame streams (binary DAS1 and CSV), per-second curve
// tables, waterfalls, trajectory sets, metrics and estimator checkpoints.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dasflow/online_vbs.hpp"
#include "dasflow/trajectory.hpp"
#include "dasflow/types.hpp"

namespace dasflow::io {

enum class Format { Binary, Csv };

/// Csv for paths ending in ".csv", Binary otherwise.
Format format_for_path(const std::string& path);
Format parse_format(const std::string& name);

/// Sequential frame writer. Binary layout: "DAS1", u32 version = 1, u32 D,
/// f64 spacing_m, u32 fps, u64 frame_count (0 = unbounded), then per frame
/// u32 second, u32 frame_index, D x f32 amplitudes, all little-endian.
/// CSV layout: header `second,frame,a_0,...,a_{D-1}`, one frame per row.
class FrameStreamWriter {
 public:
  FrameStreamWriter(std::ostream& out, const StreamConfig& config, std::uint64_t frame_count, Format format);
  void write(const FrameRecord& frame);
  std::uint64_t written() const { return written_; }

 private:
  std::ostream& out_;
  StreamConfig config_;
  Format format_;
  std::uint64_t written_ = 0;
};

/// Sequential frame reader holding one frame at a time. CSV files carry no
/// geometry, so spacing, fps and origin come from `csv_geometry`; D is taken
/// from the header. Binary streams use origin 0.
class FrameStreamReader {
 public:
  FrameStreamReader(std::istream& in, Format format, const StreamConfig& csv_geometry = {});

  const StreamConfig& config() const { return config_; }
  /// Declared frame count; 0 for unbounded or CSV streams.
  std::uint64_t declared_frames() const { return declared_; }
  std::optional<FrameRecord> next();

 private:
  std::istream& in_;
  Format format_;
  StreamConfig config_;
  std::uint64_t declared_ = 0;
  std::uint64_t read_ = 0;
  std::size_t line_ = 1;
};

void write_frame_stream(const std::string& path, const StreamConfig& config,
                        const std::vector<FrameRecord>& frames, std::optional<Format> format = {});

struct FrameStream {
  StreamConfig config;
  std::vector<FrameRecord> frames;
};
FrameStream read_frame_stream(const std::string& path, std::optional<Format> format = {},
                              const StreamConfig& csv_geometry = {});

/// Per-second curves. CSV header `second,<x_0>,...,<x_{G-1}>` with grid
/// distances; unsupported points are written as `nan`.
struct CurveTable {
  EvalGrid grid;
  std::vector<std::uint32_t> seconds;
  std::vector<MeanCurve> curves;
};

class CurveCsvWriter {
 public:
  CurveCsvWriter(std::ostream& out, const EvalGrid& grid);
  void write(std::uint32_t second, const MeanCurve& curve);

 private:
  std::ostream& out_;
  EvalGrid grid_;
};

CurveTable read_curves(std::istream& in);
CurveTable read_curves(const std::string& path);

/// Stacks per-second curves into a waterfall: unsupported points are filled
/// from their neighbours and negative values clipped to zero.
Waterfall curves_to_waterfall(const CurveTable& table, double row_period = 1.0);

/// First line `# waterfall row_period_s=<p> col_spacing_m=<s>`, then header
/// `row,c_0,...,c_{n-1}` and one row per line.
void write_waterfall(std::ostream& out, const Waterfall& w);
Waterfall read_waterfall(std::istream& in);

/// `vehicle_id,row,col,velocity_mps`, one keypoint per line.
void write_trajectories(std::ostream& out, const TrajectorySet& set);
TrajectorySet read_trajectories(std::istream& in);

void write_metrics_csv(std::ostream& out, const MatchStats& stats);
std::string metrics_json(const MatchStats& stats);

void save_checkpoint(const std::string& path, const OnlineState& state);
OnlineState load_checkpoint(const std::string& path);

}  // namespace dasflow::io
