#include "dasflow/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dasflow {

void KalmanParams::validate() const {
  if (!(measurement_var > 0.0)) throw ValidationError("measurement variance must be positive");
  if (!(process_var >= 0.0)) throw ValidationError("process variance must be non-negative");
  if (!(init_var > 0.0)) throw ValidationError("initial variance must be positive");
}

std::vector<double> kalman_filter_series(std::span<const double> series, const KalmanParams& params) {
  if (series.empty()) throw ValidationError("empty series");
  params.validate();
  std::vector<double> out(series.size());
  double x = series[0];
  double p = params.init_var;
  out[0] = x;
  for (std::size_t k = 1; k < series.size(); ++k) {
    p += params.process_var;
    const double gain = p / (p + params.measurement_var);
    x += gain * (series[k] - x);
    p *= 1.0 - gain;
    out[k] = x;
  }
  return out;
}

KalmanParams estimate_kalman_params(std::span<const double> series) {
  constexpr double kMinVar = 1e-12;
  double r = 1.0;
  if (series.size() >= 3) {
    const std::size_t m = series.size() - 1;
    double mean = 0.0;
    for (std::size_t k = 0; k < m; ++k) mean += series[k + 1] - series[k];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double dev = series[k + 1] - series[k] - mean;
      ss += dev * dev;
    }
    r = 0.5 * ss / static_cast<double>(m - 1);
  } else if (series.size() == 2) {
    const double diff = series[1] - series[0];
    r = 0.5 * diff * diff;
  }
  r = std::max(r, kMinVar);
  return {r / 10.0, r, r};
}

namespace {

void check_common_coordinates(std::span<const FrameRecord> frames) {
  if (frames.empty()) throw ValidationError("need at least one frame");
  for (std::size_t f = 1; f < frames.size(); ++f) {
    if (frames[f].coordinates != frames[0].coordinates)
      throw ValidationError("frame " + std::to_string(f) + " has mismatched coordinates",
                            static_cast<std::ptrdiff_t>(f));
  }
}

MeanCurve native_curve(const FrameRecord& first, std::vector<double> values) {
  MeanCurve curve;
  curve.grid = EvalGrid(first.coordinates);
  curve.values = std::move(values);
  curve.supported.assign(curve.values.size(), true);
  return curve;
}

}  // namespace

MeanCurve kalman_denoise_frames(std::span<const FrameRecord> frames) {
  check_common_coordinates(frames);
  const std::size_t D = frames[0].size();
  std::vector<double> out(D, 0.0);
  std::vector<double> series(frames.size());
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t f = 0; f < frames.size(); ++f) series[f] = frames[f].amplitudes[d];
    const auto filtered = kalman_filter_series(series, estimate_kalman_params(series));
    double sum = 0.0;
    for (double v : filtered) sum += v;
    out[d] = sum / static_cast<double>(frames.size());
  }
  return native_curve(frames[0], std::move(out));
}

std::size_t max_haar_levels(std::size_t length) {
  std::size_t levels = 0;
  while ((std::size_t{2} << levels) <= length) ++levels;
  return levels;
}

HaarPyramid haar_dwt(std::span<const double> series, std::size_t levels) {
  if (levels < 1) throw ValidationError("wavelet levels must be >= 1");
  if (levels > max_haar_levels(series.size()))
    throw ValidationError("levels too deep for series of length " + std::to_string(series.size()));
  const double s = std::numbers::sqrt2 / 2.0;
  HaarPyramid pyr;
  std::vector<double> current(series.begin(), series.end());
  for (std::size_t k = 0; k < levels; ++k) {
    pyr.lengths.push_back(current.size());
    if (current.size() % 2 == 1) current.push_back(current.back());
    const std::size_t half = current.size() / 2;
    std::vector<double> approx(half), detail(half);
    for (std::size_t i = 0; i < half; ++i) {
      approx[i] = (current[2 * i] + current[2 * i + 1]) * s;
      detail[i] = (current[2 * i] - current[2 * i + 1]) * s;
    }
    pyr.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  pyr.approx = std::move(current);
  return pyr;
}

std::vector<double> haar_idwt(const HaarPyramid& pyr) {
  const double s = std::numbers::sqrt2 / 2.0;
  std::vector<double> current = pyr.approx;
  for (std::size_t k = pyr.details.size(); k-- > 0;) {
    const auto& detail = pyr.details[k];
    std::vector<double> up(2 * detail.size());
    for (std::size_t i = 0; i < detail.size(); ++i) {
      up[2 * i] = (current[i] + detail[i]) * s;
      up[2 * i + 1] = (current[i] - detail[i]) * s;
    }
    up.resize(pyr.lengths[k]);
    current = std::move(up);
  }
  return current;
}

double soft_threshold(double value, double lambda) noexcept {
  const double mag = std::abs(value) - lambda;
  if (mag <= 0.0) return 0.0;
  return std::copysign(mag, value);
}

double universal_threshold(const HaarPyramid& pyr, std::size_t n) {
  if (pyr.details.empty() || n < 2) return 0.0;
  std::vector<double> mags;
  for (double v : pyr.details.front()) mags.push_back(std::abs(v));
  const std::size_t mid = mags.size() / 2;
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid), mags.end());
  double median = mags[mid];
  if (mags.size() % 2 == 0) {
    const double lower = *std::max_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  const double sigma = median / 0.6745;
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

std::vector<double> wavelet_denoise_series(std::span<const double> series, const WaveletParams& params) {
  HaarPyramid pyr = haar_dwt(series, params.levels);
  const double lambda = std::holds_alternative<FixedThreshold>(params.threshold)
                            ? std::get<FixedThreshold>(params.threshold).value
                            : universal_threshold(pyr, series.size());
  // A zero threshold is the identity; skip the synthesis round-off.
  if (!(lambda > 0.0)) return {series.begin(), series.end()};
  for (auto& level : pyr.details)
    for (auto& v : level) v = soft_threshold(v, lambda);
  return haar_idwt(pyr);
}

MeanCurve wavelet_denoise_frames(std::span<const FrameRecord> frames, const WaveletParams& params) {
  check_common_coordinates(frames);
  const std::size_t D = frames[0].size();
  std::vector<double> out(D, 0.0);
  for (const auto& frame : frames) {
    const auto den = wavelet_denoise_series(frame.amplitudes, params);
    for (std::size_t d = 0; d < D; ++d) out[d] += den[d];
  }
  for (auto& v : out) v /= static_cast<double>(frames.size());
  return native_curve(frames[0], std::move(out));
}

}  // namespace dasflow
