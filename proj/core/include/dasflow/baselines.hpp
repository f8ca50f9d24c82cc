#pragma once

// Comparison denoisers. Both follow the filter-then-average protocol: each
// method filters along its natural axis, then the frames are averaged.

#include <span>
#include <variant>
#include <vector>

#include "dasflow/types.hpp"

namespace dasflow {

struct KalmanParams {
  double process_var = 0.0;      // q
  double measurement_var = 1.0;  // r
  double init_var = 1.0;         // p0

  void validate() const;
};

/// Scalar random-walk Kalman filter initialised at the first observation.
std::vector<double> kalman_filter_series(std::span<const double> series, const KalmanParams& params);

/// r = var(first differences) / 2, q = r / 10, p0 = r for one series.
KalmanParams estimate_kalman_params(std::span<const double> series);

/// Filters each distance point across frames, then averages the filtered
/// values. Frames must share coordinates.
MeanCurve kalman_denoise_frames(std::span<const FrameRecord> frames);

/// Orthonormal Haar pyramid. `details[0]` is the finest level. Odd-length
/// levels are padded by repeating the last sample; `lengths[k]` records the
/// unpadded input length at level k.
struct HaarPyramid {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;
  std::vector<std::size_t> lengths;
};

std::size_t max_haar_levels(std::size_t length);
HaarPyramid haar_dwt(std::span<const double> series, std::size_t levels);
std::vector<double> haar_idwt(const HaarPyramid& pyramid);

double soft_threshold(double value, double lambda) noexcept;

struct UniversalThreshold {};
struct FixedThreshold {
  double value = 0.0;
};

struct WaveletParams {
  std::size_t levels = 3;
  std::variant<UniversalThreshold, FixedThreshold> threshold = UniversalThreshold{};
};

/// sigma = median(|finest details|) / 0.6745, lambda = sigma sqrt(2 ln n).
double universal_threshold(const HaarPyramid& pyramid, std::size_t n);

/// Haar analysis, soft thresholding of all detail levels, synthesis.
std::vector<double> wavelet_denoise_series(std::span<const double> series, const WaveletParams& params);

/// Denoises each frame along distance, then averages the frames.
MeanCurve wavelet_denoise_frames(std::span<const FrameRecord> frames, const WaveletParams& params);

}  // namespace dasflow
