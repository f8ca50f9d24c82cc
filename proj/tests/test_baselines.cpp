#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dasflow/baselines.hpp"
#include "dasflow/synth.hpp"

using namespace dasflow;

TEST_CASE("kalman filter on a constant series stays on the constant") {
  const std::vector<double> s(20, 3.0);
  const auto out = kalman_filter_series(s, KalmanParams{0.1, 1.0, 1.0});
  for (double v : out) CHECK(v == 3.0);
}

TEST_CASE("kalman filter first steps by hand") {
  const std::vector<double> s{1.0, 3.0, 2.0};
  const KalmanParams p{0.5, 1.0, 2.0};
  const auto out = kalman_filter_series(s, p);
  // x0 = 1, P0 = 2; predict P = 2.5, K = 2.5 / 3.5
  double x = 1.0, P = 2.0;
  CHECK(out[0] == 1.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    P += 0.5;
    const double k = P / (P + 1.0);
    x += k * (s[i] - x);
    P *= 1.0 - k;
    CHECK(out[i] == doctest::Approx(x).epsilon(1e-14));
  }
  CHECK(out[1] == doctest::Approx(1.0 + 2.0 * 2.5 / 3.5).epsilon(1e-14));
}

TEST_CASE("kalman params") {
  const std::vector<double> s{0.0, 2.0, 0.0, 2.0};
  const auto p = estimate_kalman_params(s);
  // r is half the sample variance of the first differences
  std::vector<double> d{2.0, -2.0, 2.0};
  const double m = std::accumulate(d.begin(), d.end(), 0.0) / 3.0;
  double v = 0.0;
  for (double x : d) v += (x - m) * (x - m);
  v /= 2.0;
  CHECK(p.measurement_var == doctest::Approx(v / 2.0));
  CHECK(p.process_var == doctest::Approx(p.measurement_var / 10.0));
  CHECK(p.init_var == p.measurement_var);
  CHECK(estimate_kalman_params(std::vector<double>{5.0}).measurement_var == 1.0);
  CHECK_THROWS_AS((KalmanParams{-1.0, 1.0, 1.0}.validate()), ValidationError);
}

TEST_CASE("haar transform of small vectors") {
  auto pyr = haar_dwt(std::vector<double>{1.0, 1.0, 1.0, 1.0}, 2);
  REQUIRE(pyr.approx.size() == 1);
  CHECK(pyr.approx[0] == doctest::Approx(2.0));
  for (const auto& lvl : pyr.details)
    for (double v : lvl) CHECK(v == doctest::Approx(0.0));

  pyr = haar_dwt(std::vector<double>{1.0, -1.0}, 1);
  CHECK(pyr.approx[0] == doctest::Approx(0.0));
  CHECK(pyr.details[0][0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(max_haar_levels(8) == 3);
  CHECK(max_haar_levels(1) == 0);
}

TEST_CASE("haar round trip including odd lengths") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t len : {2u, 5u, 16u, 33u, 800u}) {
    std::vector<double> s(len);
    for (auto& v : s) v = n(rng);
    const auto levels = max_haar_levels(len);
    const auto back = haar_idwt(haar_dwt(s, levels));
    REQUIRE(back.size() == len);
    for (std::size_t i = 0; i < len; ++i) CHECK(back[i] == doctest::Approx(s[i]).epsilon(1e-12));
  }
}

TEST_CASE("haar preserves energy for power-of-two lengths") {
  std::vector<double> s{3.0, 1.0, -2.0, 5.0, 0.5, 0.25, 7.0, -1.0};
  const auto pyr = haar_dwt(s, 3);
  double e_in = 0.0, e_out = 0.0;
  for (double v : s) e_in += v * v;
  for (double v : pyr.approx) e_out += v * v;
  for (const auto& lvl : pyr.details)
    for (double v : lvl) e_out += v * v;
  CHECK(e_out == doctest::Approx(e_in).epsilon(1e-12));
}

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
}

TEST_CASE("wavelet denoise with a zero threshold is the identity") {
  const std::vector<double> s{1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0};
  WaveletParams p;
  p.levels = 2;
  p.threshold = FixedThreshold{0.0};
  CHECK(wavelet_denoise_series(s, p) == s);
}

TEST_CASE("wavelet denoise reduces noise on a smooth signal") {
  StreamConfig c;
  c.points_per_frame = 512;
  c.point_spacing = 1.0;
  c.allow_negative = true;
  MeanScenario sc;
  sc.mean.terms = {SineTerm{1.0, 256.0, 0.0}};
  sc.noise_sigma = 0.5;
  sc.seed = 2;
  const auto frame = generate_frame(sc, c, 0);
  WaveletParams p;
  p.levels = 4;
  const auto den = wavelet_denoise_series(frame.amplitudes, p);
  double e_raw = 0.0, e_den = 0.0;
  for (std::size_t i = 0; i < den.size(); ++i) {
    const double t = sc.mean(frame.coordinates[i]);
    e_raw += std::pow(frame.amplitudes[i] - t, 2);
    e_den += std::pow(den[i] - t, 2);
  }
  CHECK(e_den < 0.5 * e_raw);
}

TEST_CASE("frame denoisers return curves on native coordinates") {
  StreamConfig c;
  c.points_per_frame = 64;
  c.point_spacing = 2.0;
  c.allow_negative = true;
  MeanScenario sc;
  sc.mean.terms = {ConstantTerm{2.0}};
  sc.noise_sigma = 0.1;
  const auto sample = generate_stream(sc, c, 30);
  const auto k = kalman_denoise_frames(sample.frames);
  const auto w = wavelet_denoise_frames(sample.frames, WaveletParams{});
  CHECK(k.grid.points() == sample.frames[0].coordinates);
  CHECK(w.grid.points() == sample.frames[0].coordinates);
  CHECK(rmse(k, sample.truth) < 0.1);
  CHECK(rmse(w, sample.truth) < 0.1);

  auto mixed = sample.frames;
  mixed[3].coordinates[0] = -1.0;
  CHECK_THROWS_AS(kalman_denoise_frames(mixed), ValidationError);
  CHECK_THROWS_AS(kalman_denoise_frames(std::vector<FrameRecord>{}), ValidationError);
}
