#include <doctest.h>

#include <cmath>
#include <random>

#include "dasflow/synth.hpp"
#include "dasflow/trajectory.hpp"

using namespace dasflow;

namespace {

Track straight(std::size_t entry, std::size_t len, std::size_t step, std::size_t offset = 0) {
  Track t;
  for (std::size_t i = 0; i < len; ++i) t.points.push_back({entry + i, offset + i * step});
  return t;
}

}  // namespace

TEST_CASE("find_peaks") {
  CHECK(find_peaks(std::vector<double>{0, 1, 0, 2, 0}, 0.5) == std::vector<std::size_t>{1, 3});
  CHECK(find_peaks(std::vector<double>{0, 3, 3, 0}, 1.0) == std::vector<std::size_t>{1});
  CHECK(find_peaks(std::vector<double>{0, 1, 0, 2, 0}, 1.5) == std::vector<std::size_t>{3});
  CHECK(find_peaks(std::vector<double>{5, 1, 1, 1, 5}, 0.0).empty());
  CHECK_THROWS_AS(find_peaks(std::vector<double>{1, 2}, 0.0), ValidationError);
}

TEST_CASE("fit_velocity") {
  const Waterfall w(10, 40, 1.0, 0.4);
  const std::vector<Keypoint> pts{{0, 0}, {1, 10}, {2, 20}};
  CHECK(fit_velocity(pts, w, 3) == doctest::Approx(4.0).epsilon(1e-14));
  const std::vector<Keypoint> bent{{0, 0}, {1, 1}, {2, 11}, {3, 21}};
  CHECK(fit_velocity(bent, w, 2) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(fit_velocity(std::vector<Keypoint>{{0, 0}}, w, 2), ValidationError);
}

TEST_CASE("tracking a single clean stripe reproduces its truth") {
  StreamConfig c;
  c.points_per_frame = 400;
  c.point_spacing = 0.4;
  const std::vector<VehicleSpec> v{{10, 20.0, 5.0, 2.0}};
  const auto sample = generate_waterfall(v, 60, c, 0.0, 1);
  TrackerConfig tc;
  tc.peak_threshold = 1.0;
  const auto set = extract_trajectories(sample.waterfall, tc);
  REQUIRE(set.tracks.size() == 1);
  CHECK(set.tracks[0].points == sample.truth.tracks[0].points);
  CHECK(set.tracks[0].velocity_mps == doctest::Approx(20.0).epsilon(0.02));
  check_track_invariants(set);
  const auto m = match_trajectories(set, sample.truth, 0.0);
  CHECK(m.correct == 1);
  CHECK(m.accuracy == 1.0);
}

TEST_CASE("a track stops when the projection leaves the matrix") {
  Waterfall w(20, 30, 1.0, 1.0);
  for (std::size_t r = 0; r < 20; ++r) {
    const std::size_t col = 20 * r;  // 20 m/s at 1 m columns
    if (col < 30) w.at(r, col) = 5.0;
  }
  TrackerConfig tc;
  tc.v_init_min = 15.0;
  tc.v_init_max = 25.0;
  const auto t = track_vehicle(w, 0, tc);
  CHECK(t.points.size() == 2);
  CHECK(t.points.back() == Keypoint{1, 20});
  CHECK(t.short_track);
}

TEST_CASE("argmax ties go to the first column") {
  Waterfall w(3, 20, 1.0, 1.0);
  for (std::size_t c = 0; c < 20; ++c) w.at(1, c) = 1.0;
  TrackerConfig tc;
  tc.v_init_min = 2.0;
  tc.v_init_max = 6.0;
  const auto t = track_vehicle(w, 0, tc);
  CHECK(t.points[1] == Keypoint{1, 2});
}

TEST_CASE("extracted tracks satisfy the invariants on noisy waterfalls") {
  StreamConfig c;
  c.points_per_frame = 300;
  c.point_spacing = 0.4;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> speed(60.0 / 3.6, 120.0 / 3.6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<VehicleSpec> v;
    for (std::size_t k = 0; k < 5; ++k) v.push_back({3 + 12 * k, speed(rng), 4.0, 2.0});
    const auto sample = generate_waterfall(v, 80, c, 1.0, static_cast<std::uint64_t>(trial));
    TrackerConfig tc;
    tc.peak_threshold = 2.0;
    const auto set = extract_trajectories(sample.waterfall, tc);
    CHECK_NOTHROW(check_track_invariants(set));
    for (const auto& t : set.tracks) CHECK(t.points.front().col == 0);
  }
}

TEST_CASE("check_track_invariants rejects bad tracks") {
  TrajectorySet s;
  s.tracks.push_back({{{0, 0}, {2, 3}}, 0.0, false});
  CHECK_THROWS_AS(check_track_invariants(s), ValidationError);
  s.tracks[0].points = {{0, 5}, {1, 3}};
  CHECK_THROWS_AS(check_track_invariants(s), ValidationError);
}

TEST_CASE("matching: 17 of 21 truth tracks recovered") {
  TrajectorySet truth, extracted;
  for (std::size_t k = 0; k < 21; ++k) truth.tracks.push_back(straight(10 * k, 8, 5));
  for (std::size_t k = 0; k < 17; ++k) extracted.tracks.push_back(straight(10 * k, 8, 5, k % 2));
  // one far-off and one duplicate of an already matched truth track
  extracted.tracks.push_back(straight(500, 8, 5));
  extracted.tracks.push_back(straight(0, 8, 5, 1));
  const auto m = match_trajectories(extracted, truth, 5.0);
  CHECK(m.total == 19);
  CHECK(m.correct == 17);
  CHECK(m.missing == 4);
  CHECK(m.wrong == 2);
  CHECK(m.accuracy == doctest::Approx(17.0 / 21.0));
  CHECK(m.accuracy == doctest::Approx(0.8095).epsilon(1e-4));
}

TEST_CASE("matching respects the column tolerance and needs shared rows") {
  TrajectorySet truth, extracted;
  truth.tracks.push_back(straight(0, 5, 4));
  extracted.tracks.push_back(straight(0, 5, 4, 6));
  CHECK(match_trajectories(extracted, truth, 5.0).correct == 0);
  CHECK(match_trajectories(extracted, truth, 6.0).correct == 1);
  extracted.tracks[0] = straight(5, 5, 4);
  CHECK(match_trajectories(extracted, truth, 100.0).correct == 0);
  CHECK(match_trajectories(TrajectorySet{}, TrajectorySet{}, 1.0).accuracy == 1.0);
}

TEST_CASE("two parallel clean stripes are tracked without swapping") {
  StreamConfig c;
  c.points_per_frame = 200;
  c.point_spacing = 1.0;
  // 5 cols/row, second stripe 10 columns behind the first
  const std::vector<VehicleSpec> v{{2, 5.0, 5.0, 1.5}, {4, 5.0, 5.0, 1.5}};
  const auto sample = generate_waterfall(v, 60, c, 0.0, 1);
  TrackerConfig tc;
  tc.peak_threshold = 1.0;
  tc.v_init_min = 4.0;
  tc.v_init_max = 6.0;
  const auto set = extract_trajectories(sample.waterfall, tc);
  REQUIRE(set.tracks.size() == 2);
  // Exhaustive oracle: in every row the window argmax is the stripe the track started on.
  for (std::size_t t = 0; t < 2; ++t) {
    const auto& pts = set.tracks[t].points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double centre = stripe_center(v[t], pts[i].row, 1.0, 1.0);
      CHECK(pts[i].col == static_cast<std::size_t>(std::lround(centre)));
    }
  }
  CHECK(set.tracks[0].points == sample.truth.tracks[0].points);
  CHECK(set.tracks[1].points == sample.truth.tracks[1].points);
}

TEST_CASE("slope-2 clean stripe gives v = 2 col_spacing / row_period") {
  StreamConfig c;
  c.points_per_frame = 100;
  c.point_spacing = 0.5;
  const std::vector<VehicleSpec> v{{0, 1.0, 5.0, 1.0}};
  auto sample = generate_waterfall(v, 40, c, 0.0, 1);
  // find_peaks needs an interior entry row, so pad one quiet row on top
  Waterfall w(41, 100, 1.0, 0.5);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t col = 0; col < 100; ++col) w.at(r + 1, col) = sample.waterfall.at(r, col);
  TrackerConfig tc;
  tc.peak_threshold = 1.0;
  tc.v_init_min = 0.6;
  tc.v_init_max = 1.4;
  const auto set = extract_trajectories(w, tc);
  REQUIRE(set.tracks.size() == 1);
  const auto& pts = set.tracks[0].points;
  CHECK(pts.size() == 40);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i] == Keypoint{i + 1, 2 * i});
  CHECK(set.tracks[0].velocity_mps == doctest::Approx(2.0 * 0.5 / 1.0).epsilon(1e-12));
}
