#include "dasflow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dasflow/baselines.hpp"
#include "dasflow/lpr.hpp"
#include "dasflow/online_vbs.hpp"

namespace dasflow {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

double median_ingest_us(const OnlineState& state, const FrameRecord& frame, std::size_t reps) {
  std::vector<double> times;
  times.reserve(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    OnlineState copy = state;
    const auto start = Clock::now();
    copy.ingest(frame);
    times.push_back(elapsed_us(start));
  }
  std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(reps / 2), times.end());
  return times[reps / 2];
}

}  // namespace

BenchReport run_bench(const Scenario& scenario, std::size_t timing_reps) {
  timing_reps = std::max<std::size_t>(timing_reps, 1);
  const StreamConfig& config = scenario.stream;
  const StreamSample sample = generate_stream(scenario.mean, config, scenario.frames);
  const auto& frames = sample.frames;
  const std::size_t G = scenario.grid_points == 0 ? config.points_per_frame : scenario.grid_points;
  const EvalGrid grid = regular_grid(config, G);
  const MeanCurve truth_grid = true_curve(scenario.mean.mean, grid);
  const std::size_t raw_bytes = frames.size() * config.points_per_frame * sizeof(double);

  BenchReport report;
  report.frames = frames.size();
  report.grid_points = G;

  {
    OnlineConfig oc;
    oc.ladder = scenario.ladder;
    OnlineState state = OnlineState::init(grid, oc, frames.front());
    double total_us = 0.0;
    for (std::size_t f = 0; f < frames.size(); ++f) {
      if (f == 9) {
        report.ingest_us_f10 = median_ingest_us(state, frames[f], timing_reps);
      } else if (f == 999) {
        report.ingest_us_f1000 = median_ingest_us(state, frames[f], timing_reps);
      }
      const auto start = Clock::now();
      state.ingest(frames[f]);
      total_us += elapsed_us(start);
      if (f == 9) report.state_bytes_f10 = state.state_size();
    }
    report.state_bytes_final = state.state_size();
    report.online_bandwidth = state.current_bandwidth();
    report.rows.push_back({"online", rmse(state.query_mean(), truth_grid), state.state_size(),
                           total_us / static_cast<double>(frames.size())});
  }
  {
    const auto start = Clock::now();
    const auto rot = rot_bandwidth(std::span<const FrameRecord>(frames.data(), 1),
                                   static_cast<double>(frames.size() * config.points_per_frame));
    const MeanCurve curve = batch_estimate(frames, grid, rot.h);
    const double us = elapsed_us(start);
    report.batch_bandwidth = rot.h;
    report.rows.push_back({"batch", rmse(curve, truth_grid), raw_bytes, us / static_cast<double>(frames.size())});
  }
  {
    const auto start = Clock::now();
    const MeanCurve curve = kalman_denoise_frames(frames);
    const double us = elapsed_us(start);
    report.rows.push_back({"kalman", rmse(curve, sample.truth), raw_bytes, us / static_cast<double>(frames.size())});
  }
  {
    WaveletParams wp;
    wp.levels = std::min<std::size_t>(3, max_haar_levels(config.points_per_frame));
    const auto start = Clock::now();
    const MeanCurve curve = wavelet_denoise_frames(frames, wp);
    const double us = elapsed_us(start);
    report.rows.push_back({"wavelet", rmse(curve, sample.truth), raw_bytes, us / static_cast<double>(frames.size())});
  }
  return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& report) {
  out << "method,rmse,state_bytes,us_per_frame\n";
  for (const auto& r : report.rows) out << r.method << ',' << r.rmse << ',' << r.state_bytes << ',' << r.us_per_frame << '\n';
  out << "# frames=" << report.frames << " grid_points=" << report.grid_points
      << " online_h=" << report.online_bandwidth << " batch_h=" << report.batch_bandwidth
      << " ingest_us_f10=" << report.ingest_us_f10 << " ingest_us_f1000=" << report.ingest_us_f1000
      << " state_bytes_f10=" << report.state_bytes_f10 << " state_bytes_final=" << report.state_bytes_final << '\n';
}

std::string bench_json(const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"method", r.method}, {"rmse", r.rmse}, {"state_bytes", r.state_bytes}, {"us_per_frame", r.us_per_frame}});
  const nlohmann::json j = {{"rows", rows},
                            {"frames", report.frames},
                            {"grid_points", report.grid_points},
                            {"online_bandwidth", report.online_bandwidth},
                            {"batch_bandwidth", report.batch_bandwidth},
                            {"ingest_us_f10", report.ingest_us_f10},
                            {"ingest_us_f1000", report.ingest_us_f1000},
                            {"state_bytes_f10", report.state_bytes_f10},
                            {"state_bytes_final", report.state_bytes_final}};
  return j.dump(2);
}

}  // namespace dasflow
