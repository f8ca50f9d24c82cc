#pragma once

// Batch local linear regression: kernel, per-frame summary statistics and the
// weighted least-squares solve. Also hosts the rule-of-thumb bandwidth pilot
// shared with the online estimator.

#include <array>
#include <span>
#include <vector>

#include "dasflow/types.hpp"

namespace dasflow {

/// Epanechnikov kernel, 3/4 (1 - u^2) on |u| < 1.
double epanechnikov(double u) noexcept;

/// Scaled kernel (1/h) K((x_i - x_tilde) / h). Throws for h <= 0.
double kernel_weight(double x_i, double x_tilde, double h);

/// Kernel-weighted moments at one evaluation point x:
///   P = sum_d w_d (1, X_d - x)(1, X_d - x)^T,  Q = sum_d w_d (1, X_d - x)^T Y_d.
/// P is stored row-major.
struct GridStatPair {
  std::array<double, 4> p{};
  std::array<double, 2> q{};

  GridStatPair& operator+=(const GridStatPair& other) noexcept {
    for (int i = 0; i < 4; ++i) p[i] += other.p[i];
    q[0] += other.q[0];
    q[1] += other.q[1];
    return *this;
  }
  friend GridStatPair operator+(GridStatPair a, const GridStatPair& b) noexcept { return a += b; }
  bool operator==(const GridStatPair&) const = default;
};

using GridStats = std::vector<GridStatPair>;

/// Per-grid-point statistics of a single frame at bandwidth h. Terms are
/// summed in increasing distance order.
GridStats frame_stats(const FrameRecord& frame, const EvalGrid& grid, double h);

/// Element-wise `acc += stats`.
void accumulate(GridStats& acc, const GridStats& stats);

struct MeanSolve {
  double estimate = 0.0;
  bool ok = false;
};

/// First component of P^{-1} Q. `ok` is false when
/// |det P| <= 1e-12 (1 + trace P)^2.
MeanSolve solve_mean(const GridStatPair& stats) noexcept;

/// Solves every grid point of accumulated statistics into a curve.
MeanCurve solve_curve(const EvalGrid& grid, std::span<const GridStatPair> stats);

/// Full-data local linear estimate at a fixed bandwidth. Statistics are
/// accumulated frame by frame, each frame summed in distance order.
MeanCurve batch_estimate(std::span<const FrameRecord> frames, const EvalGrid& grid, double h);

// Epanechnikov constants R(K) = int K^2 and mu_2(K) = int u^2 K.
inline constexpr double kKernelRoughness = 3.0 / 5.0;
inline constexpr double kKernelSecondMoment = 1.0 / 5.0;
inline constexpr double kRoughnessFloor = 1e-12;

/// Quantities behind the rule-of-thumb bandwidth. Persisted by the online
/// estimator so the bandwidth can be recomputed for any sample size.
struct BandwidthPilot {
  double sigma2_hat = 0.0;
  double roughness_hat = kRoughnessFloor;
  double interval_length = 0.0;
  std::size_t points_per_frame = 0;
  /// Lower clamp: twice the largest gap between sampled distances.
  double h_floor = 0.0;
  /// Number of quartic blocks selected by Mallows' Cp.
  std::size_t blocks = 1;

  /// C in h = C n^{-1/5}.
  double scale() const;
  /// Clamped bandwidth for a total sample size n.
  double bandwidth(double n_total) const;

  bool operator==(const BandwidthPilot&) const = default;
};

/// Fits the pilot from pooled frames: blocked quartic least squares, block
/// count chosen by Mallows' Cp, then sigma^2 = RSS / (n - 5N) and
/// theta_22 = mean(m''(X)^2) * |X| floored at 1e-12.
/// Throws if fewer than 5 distinct coordinates are present.
BandwidthPilot fit_pilot(std::span<const FrameRecord> pilot_frames);

struct RuleOfThumb {
  double h = 0.0;
  BandwidthPilot pilot;
};

/// h = [sigma^2 |X| R(K) / (mu_2(K)^2 theta_22)]^{1/5} n^{-1/5}, clamped to
/// [h_floor, |X|].
RuleOfThumb rot_bandwidth(std::span<const FrameRecord> pilot_frames, double n_total);

}  // namespace dasflow
