#pragma once

// Synthetic streams and waterfalls with known ground truth, plus the RMSE
// metric used to score estimators against that truth.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "dasflow/trajectory.hpp"
#include "dasflow/types.hpp"

namespace dasflow {

struct ConstantTerm {
  double value = 0.0;
};
struct LinearTerm {
  double intercept = 0.0;
  double slope = 0.0;
};
struct SineTerm {
  double amplitude = 1.0;
  double period = 1.0;  // meters
  double phase = 0.0;   // radians
};
struct BumpTerm {
  double height = 1.0;
  double center = 0.0;
  double width = 1.0;  // Gaussian standard deviation, meters
};

using MeanTerm = std::variant<ConstantTerm, LinearTerm, SineTerm, BumpTerm>;

/// Sum of terms evaluated at a distance in meters.
struct MeanFunction {
  std::vector<MeanTerm> terms;

  double operator()(double x) const;
  /// Second derivative, used by bandwidth oracles.
  double second_derivative(double x) const;
};

/// Y = mu(X) + Phi_f(X) + eps with eps ~ N(0, sigma^2) and
/// Phi_f = amp (Z1 sin(2 pi u / |X|) + Z2 cos(2 pi u / |X|)), u = X - origin.
struct MeanScenario {
  MeanFunction mean;
  double noise_sigma = 0.0;
  double process_amp = 0.0;
  std::uint64_t seed = 0;
};

struct VehicleSpec {
  std::size_t entry_row = 0;
  double velocity = 25.0;  // m/s
  double amplitude = 1.0;
  double width_cols = 2.0;
};

/// Column of a vehicle's stripe centre at `row`.
double stripe_center(const VehicleSpec& v, std::size_t row, double row_period, double col_spacing);

/// Noise-free stripe intensity summed over vehicles at (row, col).
double stripe_field(const std::vector<VehicleSpec>& vehicles, std::size_t row, double col,
                    double row_period, double col_spacing);

/// Truth keypoints: rounded stripe centres from the entry row until the
/// stripe leaves the matrix.
TrajectorySet vehicle_truth(const std::vector<VehicleSpec>& vehicles, std::size_t rows, std::size_t cols,
                            double row_period, double col_spacing);

/// Frame number `k` (0-based across the whole stream) of a scenario. Each
/// frame draws from its own (seed, k) generator so frames can be produced
/// independently and in any order.
FrameRecord generate_frame(const MeanScenario& scenario, const StreamConfig& config, std::uint64_t k);

/// As generate_frame, with vehicle stripes of row `k / fps` added to the mean.
FrameRecord generate_traffic_frame(const MeanScenario& scenario, const std::vector<VehicleSpec>& vehicles,
                                   const StreamConfig& config, std::uint64_t k);

MeanCurve true_curve(const MeanFunction& mean, const EvalGrid& grid);

struct StreamSample {
  std::vector<FrameRecord> frames;
  MeanCurve truth;  // on the frames' native coordinates
};

StreamSample generate_stream(const MeanScenario& scenario, const StreamConfig& config, std::size_t frames);

struct WaterfallSample {
  Waterfall waterfall;
  TrajectorySet truth;
};

/// rows x D waterfall (1 s rows, columns at the stream spacing): stripes plus
/// N(0, noise_sigma^2) background, clipped at zero.
WaterfallSample generate_waterfall(const std::vector<VehicleSpec>& vehicles, std::size_t rows,
                                   const StreamConfig& config, double noise_sigma, std::uint64_t seed);

/// Root mean squared difference over points supported in both curves.
double rmse(const MeanCurve& curve, const MeanCurve& truth);

/// Everything a scenario file can describe.
struct Scenario {
  StreamConfig stream;
  MeanScenario mean;
  std::size_t frames = 1;
  std::size_t grid_points = 0;  // 0: one per distance point
  std::size_t ladder = 5;
  std::vector<VehicleSpec> vehicles;
};

/// Parses `key = value` lines; '#' starts a comment. Throws ValidationError
/// naming the offending line.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

}  // namespace dasflow
