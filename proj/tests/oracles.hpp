#pragma once

// Test-only reference computations. Each one takes a different numerical
// route from the library code it checks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dasflow/lpr.hpp"
#include "dasflow/synth.hpp"
#include "dasflow/types.hpp"

namespace oracle {

// Term-by-term double loop over every observation, no windowing.
inline dasflow::GridStatPair brute_stats(const dasflow::FrameRecord& frame, double x, double h) {
  dasflow::GridStatPair s;
  for (std::size_t d = 0; d < frame.size(); ++d) {
    const double u = (frame.coordinates[d] - x) / h;
    const double w = std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) / h : 0.0;
    const double v[2] = {1.0, frame.coordinates[d] - x};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) s.p[2 * r + c] += w * v[r] * v[c];
      s.q[r] += w * v[r] * frame.amplitudes[d];
    }
  }
  return s;
}

struct Wls {
  double beta0 = 0.0;
  bool ok = false;
};

// beta = (Phi^T Omega Phi)^{-1} Phi^T Omega y over pooled observations,
// solved by QR on the sqrt-weighted design.
inline Wls pooled_wls(const std::vector<dasflow::FrameRecord>& frames, double x, double h) {
  std::vector<double> rows_x, rows_y, rows_w;
  for (const auto& f : frames) {
    for (std::size_t d = 0; d < f.size(); ++d) {
      const double u = (f.coordinates[d] - x) / h;
      if (std::abs(u) >= 1.0) continue;
      rows_x.push_back(f.coordinates[d] - x);
      rows_y.push_back(f.amplitudes[d]);
      rows_w.push_back(0.75 * (1.0 - u * u) / h);
    }
  }
  if (rows_x.size() < 2) return {};
  const auto n = static_cast<Eigen::Index>(rows_x.size());
  Eigen::MatrixXd phi(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = std::sqrt(rows_w[static_cast<std::size_t>(i)]);
    phi(i, 0) = sw;
    phi(i, 1) = sw * rows_x[static_cast<std::size_t>(i)];
    y(i) = sw * rows_y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  if (qr.rank() < 2) return {};
  return {qr.solve(y)(0), true};
}

// AMISE-optimal local linear bandwidth from the true sigma^2 and the exact
// integral of (mu'')^2, the latter by composite Simpson quadrature.
inline double amise_bandwidth(const dasflow::MeanFunction& mean, double sigma2, double lo, double hi, double n,
                              double h_floor) {
  const int panels = 20000;
  const double step = (hi - lo) / panels;
  double integral = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double m2 = mean.second_derivative(lo + step * i);
    const double wgt = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += wgt * m2 * m2;
  }
  integral *= step / 3.0;
  const double h = std::pow(sigma2 * (hi - lo) * 0.6 / (0.04 * integral * n), 0.2);
  return std::clamp(h, h_floor, hi - lo);
}

inline dasflow::FrameRecord random_frame(std::mt19937_64& rng, std::size_t D, double spacing, double noise,
                                         bool allow_negative = true) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  dasflow::StreamConfig c;
  c.points_per_frame = D;
  c.point_spacing = spacing;
  c.allow_negative = allow_negative;
  const double a = 1.0 + unif(rng), b = unif(rng) - 0.5, p = 20.0 + 80.0 * unif(rng);
  std::vector<double> amps(D);
  for (std::size_t d = 0; d < D; ++d) {
    const double x = c.coordinate(d);
    amps[d] = a + b * std::sin(2.0 * std::numbers::pi * x / p) + noise * normal(rng);
  }
  return dasflow::make_frame(c, 0, 1, std::move(amps));
}

// Smallest eigenvalue of a symmetric 2x2 matrix.
inline double min_eigen(const dasflow::GridStatPair& s) {
  const double a = s.p[0], b = s.p[1], d = s.p[3];
  const double mid = 0.5 * (a + d);
  const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return mid - rad;
}

}  // namespace oracle
