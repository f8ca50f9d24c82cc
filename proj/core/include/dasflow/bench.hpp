#pragma once

// Side-by-side run of the online estimator, the batch estimator and both
// baselines on one synthetic scenario.

#include <iosfwd>
#include <string>
#include <vector>

#include "dasflow/synth.hpp"

namespace dasflow {

struct BenchRow {
  std::string method;
  double rmse = 0.0;
  std::size_t state_bytes = 0;
  double us_per_frame = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // online, batch, kalman, wavelet
  std::size_t frames = 0;
  std::size_t grid_points = 0;
  double online_bandwidth = 0.0;
  double batch_bandwidth = 0.0;
  /// Median single-ingest time with the state at f = 9 and f = 999 (the
  /// ingest producing f = 10 and f = 1000); 0 when the stream is shorter.
  double ingest_us_f10 = 0.0;
  double ingest_us_f1000 = 0.0;
  std::size_t state_bytes_f10 = 0;
  std::size_t state_bytes_final = 0;
};

/// Runs all four methods on `scenario.frames` frames of a stationary stream.
BenchReport run_bench(const Scenario& scenario, std::size_t timing_reps = 25);

void write_bench_csv(std::ostream& out, const BenchReport& report);
std::string bench_json(const BenchReport& report);

}  // namespace dasflow
