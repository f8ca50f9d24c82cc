#include "dasflow/lpr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dasflow {

double epanechnikov(double u) noexcept {
  const double a = std::abs(u);
  return a < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

double kernel_weight(double x_i, double x_tilde, double h) {
  if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
  return epanechnikov((x_i - x_tilde) / h) / h;
}

GridStats frame_stats(const FrameRecord& frame, const EvalGrid& grid, double h) {
  if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
  const auto& xs = frame.coordinates;
  const auto& ys = frame.amplitudes;
  GridStats out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    // Coordinates are sorted, so only [x - h, x + h] can carry weight.
    auto it = std::lower_bound(xs.begin(), xs.end(), x - h);
    GridStatPair& s = out[g];
    for (auto d = static_cast<std::size_t>(it - xs.begin()); d < xs.size() && xs[d] <= x + h; ++d) {
      const double w = epanechnikov((xs[d] - x) / h) / h;
      if (w == 0.0) continue;
      const double dx = xs[d] - x;
      const double wdx = w * dx;
      s.p[0] += w;
      s.p[1] += wdx;
      s.p[3] += wdx * dx;
      s.q[0] += w * ys[d];
      s.q[1] += wdx * ys[d];
    }
    s.p[2] = s.p[1];
  }
  return out;
}

void accumulate(GridStats& acc, const GridStats& stats) {
  if (acc.size() != stats.size()) throw ValidationError("statistic size mismatch");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += stats[i];
}

MeanSolve solve_mean(const GridStatPair& s) noexcept {
  const double det = s.p[0] * s.p[3] - s.p[1] * s.p[2];
  const double trace = s.p[0] + s.p[3];
  const double tol = 1e-12 * (1.0 + trace) * (1.0 + trace);
  if (!std::isfinite(det) || !(std::abs(det) > tol)) return {};
  const double beta0 = (s.p[3] * s.q[0] - s.p[1] * s.q[1]) / det;
  if (!std::isfinite(beta0)) return {};
  return {beta0, true};
}

MeanCurve solve_curve(const EvalGrid& grid, std::span<const GridStatPair> stats) {
  MeanCurve curve;
  curve.grid = grid;
  curve.values.assign(grid.size(), 0.0);
  curve.supported.assign(grid.size(), false);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const MeanSolve r = solve_mean(stats[g]);
    curve.values[g] = r.ok ? r.estimate : std::numeric_limits<double>::quiet_NaN();
    curve.supported[g] = r.ok;
  }
  return curve;
}

MeanCurve batch_estimate(std::span<const FrameRecord> frames, const EvalGrid& grid, double h) {
  if (frames.empty()) throw ValidationError("batch_estimate needs at least one frame");
  GridStats acc(grid.size());
  for (const auto& frame : frames) accumulate(acc, frame_stats(frame, grid, h));
  return solve_curve(grid, acc);
}

double BandwidthPilot::scale() const {
  const double num = sigma2_hat * interval_length * kKernelRoughness;
  const double den = kKernelSecondMoment * kKernelSecondMoment * std::max(roughness_hat, kRoughnessFloor);
  return std::pow(num / den, 0.2);
}

double BandwidthPilot::bandwidth(double n_total) const {
  const double h = scale() * std::pow(n_total, -0.2);
  return std::clamp(h, h_floor, std::max(h_floor, interval_length));
}

namespace {

struct BlockFit {
  double rss = 0.0;
  double mean_sq_curvature = 0.0;
  bool valid = false;
};

// Fits N equal-width quartic blocks over [lo, hi]. Each block is fit in a
// centred, scaled coordinate for conditioning.
BlockFit fit_blocks(const std::vector<double>& xs, const std::vector<double>& ys, double lo,
                    double hi, std::size_t blocks) {
  BlockFit result;
  const double width = (hi - lo) / static_cast<double>(blocks);
  std::vector<std::vector<std::size_t>> members(blocks);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto b = static_cast<std::size_t>((xs[i] - lo) / width);
    members[std::min(b, blocks - 1)].push_back(i);
  }
  double curv_sum = 0.0;
  for (const auto& idx : members) {
    std::vector<double> bx;
    bx.reserve(idx.size());
    for (auto i : idx) bx.push_back(xs[i]);
    std::sort(bx.begin(), bx.end());
    if (std::unique(bx.begin(), bx.end()) - bx.begin() < 5) return result;
    const double mid = 0.5 * (bx.front() + bx.back());
    const double half = 0.5 * (bx.back() - bx.front());

    Eigen::MatrixXd design(static_cast<Eigen::Index>(idx.size()), 5);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double t = (xs[idx[r]] - mid) / half;
      double pw = 1.0;
      for (int k = 0; k < 5; ++k) {
        design(static_cast<Eigen::Index>(r), k) = pw;
        pw *= t;
      }
      rhs(static_cast<Eigen::Index>(r)) = ys[idx[r]];
    }
    const Eigen::VectorXd c = design.colPivHouseholderQr().solve(rhs);
    result.rss += (design * c - rhs).squaredNorm();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double t = (xs[idx[r]] - mid) / half;
      const double m2 = (2.0 * c(2) + 6.0 * c(3) * t + 12.0 * c(4) * t * t) / (half * half);
      curv_sum += m2 * m2;
    }
  }
  result.mean_sq_curvature = curv_sum / static_cast<double>(xs.size());
  result.valid = true;
  return result;
}

}  // namespace

BandwidthPilot fit_pilot(std::span<const FrameRecord> pilot_frames) {
  if (pilot_frames.empty()) throw ValidationError("pilot needs at least one frame");
  std::vector<double> xs, ys;
  double max_gap = 0.0;
  for (const auto& frame : pilot_frames) {
    xs.insert(xs.end(), frame.coordinates.begin(), frame.coordinates.end());
    ys.insert(ys.end(), frame.amplitudes.begin(), frame.amplitudes.end());
    for (std::size_t d = 1; d < frame.coordinates.size(); ++d)
      max_gap = std::max(max_gap, frame.coordinates[d] - frame.coordinates[d - 1]);
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 5)
    throw ValidationError("pilot needs at least 5 distinct coordinates for a quartic fit");

  const double lo = distinct.front();
  const double hi = distinct.back();
  const std::size_t n = xs.size();
  const std::size_t max_blocks = std::max<std::size_t>(1, std::min<std::size_t>(distinct.size() / 20, 5));

  std::vector<BlockFit> fits(max_blocks + 1);
  for (std::size_t b = 1; b <= max_blocks; ++b) fits[b] = fit_blocks(xs, ys, lo, hi, b);

  std::size_t ref = max_blocks;
  while (ref > 1 && (!fits[ref].valid || n <= 5 * ref)) --ref;

  std::size_t chosen = 1;
  if (ref > 1) {
    const double ref_var = fits[ref].rss / static_cast<double>(n - 5 * ref);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b <= ref; ++b) {
      if (!fits[b].valid) continue;
      const double cp = ref_var > 0.0
                            ? fits[b].rss / ref_var - (static_cast<double>(n) - 10.0 * static_cast<double>(b))
                            : static_cast<double>(b);
      if (cp < best) {
        best = cp;
        chosen = b;
      }
    }
  }

  const BlockFit& fit = fits[chosen];
  BandwidthPilot pilot;
  pilot.blocks = chosen;
  const std::size_t dof = n > 5 * chosen ? n - 5 * chosen : 1;
  pilot.sigma2_hat = fit.rss / static_cast<double>(dof);
  pilot.interval_length = hi - lo;
  pilot.roughness_hat = std::max(fit.mean_sq_curvature * pilot.interval_length, kRoughnessFloor);
  pilot.points_per_frame = pilot_frames.front().size();
  pilot.h_floor = 2.0 * max_gap;
  return pilot;
}

RuleOfThumb rot_bandwidth(std::span<const FrameRecord> pilot_frames, double n_total) {
  if (!(n_total >= 1.0)) throw ValidationError("n_total must be >= 1");
  RuleOfThumb r;
  r.pilot = fit_pilot(pilot_frames);
  r.h = r.pilot.bandwidth(n_total);
  return r;
}

}  // namespace dasflow
