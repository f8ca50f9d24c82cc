#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dasflow/online_vbs.hpp"
#include "dasflow/synth.hpp"
#include "oracles.hpp"

using namespace dasflow;

namespace {

StreamConfig cfg(std::size_t D = 200, double spacing = 1.6) {
  StreamConfig c;
  c.points_per_frame = D;
  c.point_spacing = spacing;
  c.allow_negative = true;
  return c;
}

MeanScenario sine_scenario(std::uint64_t seed, double sigma = 0.2) {
  MeanScenario s;
  s.mean.terms = {ConstantTerm{3.0}, SineTerm{1.0, 160.0, 0.0}};
  s.noise_sigma = sigma;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("candidate_bandwidths") {
  const auto etas = candidate_bandwidths(1.0, 5);
  const double expected[] = {1.0, 0.956352, 0.902880, 0.832553, 0.724780};
  for (int l = 0; l < 5; ++l) CHECK(etas[l] == doctest::Approx(expected[l]).epsilon(5e-7));
  CHECK(candidate_bandwidths(3.7, 9)[0] == 3.7);
  CHECK(candidate_bandwidths(2.5, 1) == std::vector<double>{2.5});
  for (std::size_t l = 1; l < etas.size(); ++l) CHECK(etas[l] < etas[l - 1]);
}

TEST_CASE("match_centroid") {
  const std::vector<double> c{0.0, 0.5, 1.0};
  // brute-force argmin
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (std::abs(0.6 - c[i]) < std::abs(0.6 - c[best])) best = i;
  CHECK(match_centroid(0.6, c) == best);
  CHECK(match_centroid(0.6, c) == 1);
  CHECK(match_centroid(42.0, std::vector<double>{7.0}) == 0);
  CHECK(match_centroid(0.5, std::vector<double>{0.0, 1.0}) == 0);
  CHECK(match_centroid(0.0, std::vector<double>{0.0, 0.0, 0.0}) == 0);
}

TEST_CASE("init produces a zeroed fixed-shape state") {
  const auto c = cfg();
  const auto grid = regular_grid(c, 100);
  const auto s = OnlineState::init(grid, OnlineConfig{}, generate_frame(sine_scenario(1), c, 0));
  CHECK(s.frame_count() == 0);
  CHECK(s.ladder_size() == 5);
  for (std::size_t l = 0; l < 5; ++l) {
    CHECK(s.centroids()[l] == 0.0);
    REQUIRE(s.layer(l).size() == grid.size());
    for (const auto& st : s.layer(l)) CHECK(st == GridStatPair{});
  }
  CHECK_THROWS_AS(s.query_mean(), ValidationError);
  CHECK_THROWS_AS(s.current_bandwidth(), ValidationError);

  OnlineConfig bad;
  bad.ladder = 0;
  CHECK_THROWS_AS(OnlineState::init(grid, bad, generate_frame(sine_scenario(1), c, 0)), ValidationError);
  bad.ladder = 33;
  CHECK_THROWS_AS(OnlineState::init(grid, bad, generate_frame(sine_scenario(1), c, 0)), ValidationError);
}

TEST_CASE("L = 1 ladder is the current bandwidth") {
  const auto c = cfg();
  OnlineConfig oc;
  oc.ladder = 1;
  auto s = OnlineState::init(regular_grid(c, 50), oc, generate_frame(sine_scenario(2), c, 0));
  s.ingest(generate_frame(sine_scenario(2), c, 0));
  CHECK(s.etas() == std::vector<double>{s.current_bandwidth()});
}

TEST_CASE("first ingest: centroids equal etas and layers equal single-frame statistics") {
  const auto c = cfg();
  const auto grid = regular_grid(c, 100);
  const auto frame = generate_frame(sine_scenario(3), c, 0);
  auto s = OnlineState::init(grid, OnlineConfig{}, frame);
  s.ingest(frame);
  const auto etas = s.etas();
  CHECK(etas[0] == s.current_bandwidth());
  CHECK(s.current_bandwidth() == s.pilot().bandwidth(static_cast<double>(c.points_per_frame)));
  for (std::size_t l = 0; l < etas.size(); ++l) {
    CHECK(s.centroids()[l] == etas[l]);
    CHECK(s.layer(l) == frame_stats(frame, grid, etas[l]));
  }
  const auto online = s.query_mean();
  const auto batch = batch_estimate(std::vector<FrameRecord>{frame}, grid, etas[0]);
  for (std::size_t g = 0; g < grid.size(); ++g) CHECK(std::abs(online.values[g] - batch.values[g]) <= 1e-12);
}

TEST_CASE("two-frame replay oracle") {
  // Materializes every intermediate of two ingests by hand.
  const auto c = cfg(120, 1.0);
  const auto grid = regular_grid(c, 40);
  const auto frame = generate_frame(sine_scenario(4), c, 0);
  const auto pilot = fit_pilot(std::span<const FrameRecord>(&frame, 1));
  const std::size_t L = 4;
  OnlineConfig oc;
  oc.ladder = L;
  auto s = OnlineState::with_pilot(grid, oc, pilot);
  s.ingest(frame);
  s.ingest(frame);

  const double D = static_cast<double>(c.points_per_frame);
  const auto eta1 = candidate_bandwidths(pilot.bandwidth(D), L);
  const auto eta2 = candidate_bandwidths(pilot.bandwidth(2.0 * D), L);
  std::vector<double> phi1 = eta1;  // f = 1: (1 - 1/1) weight vanishes
  std::vector<GridStats> layers1;
  for (std::size_t l = 0; l < L; ++l) layers1.push_back(frame_stats(frame, grid, eta1[l]));

  for (std::size_t l = 0; l < L; ++l) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < L; ++i)
      if (std::abs(eta2[l] - phi1[i]) < std::abs(eta2[l] - phi1[j])) j = i;
    const auto fresh = frame_stats(frame, grid, eta2[l]);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (int k = 0; k < 4; ++k)
        CHECK(s.layer(l)[g].p[k] == doctest::Approx(fresh[g].p[k] + layers1[j][g].p[k]).epsilon(1e-14));
      for (int k = 0; k < 2; ++k)
        CHECK(s.layer(l)[g].q[k] == doctest::Approx(fresh[g].q[k] + layers1[j][g].q[k]).epsilon(1e-14));
    }
    CHECK(s.centroids()[l] == doctest::Approx(0.5 * phi1[j] + 0.5 * eta2[l]).epsilon(1e-15));
  }
}

TEST_CASE("bandwidth follows C (fD)^{-1/5} with refresh disabled") {
  const auto c = cfg(800, 0.4);
  auto sc = sine_scenario(5);
  sc.mean.terms = {SineTerm{1.0, 160.0, 0.0}};
  const auto frame = generate_frame(sc, c, 0);
  auto s = OnlineState::init(regular_grid(c, 20), OnlineConfig{}, frame);
  std::vector<double> h;
  for (int f = 0; f < 40; ++f) {
    s.ingest(frame);
    h.push_back(s.current_bandwidth());
  }
  REQUIRE(h[39] > s.pilot().h_floor);
  CHECK(std::abs(h[39] / h[9] - std::pow(4.0, -0.2)) < 1e-12);
  CHECK(std::pow(4.0, -0.2) == doctest::Approx(0.7579).epsilon(1e-4));
}

TEST_CASE("query_mean is read-only and constant streams give constant curves") {
  const auto c = cfg();
  auto sc = sine_scenario(6, 0.0);
  sc.mean.terms = {ConstantTerm{4.25}};
  const auto grid = regular_grid(c, 64);
  auto s = OnlineState::init(grid, OnlineConfig{}, generate_frame(sc, c, 0));
  for (int f = 0; f < 30; ++f) s.ingest(generate_frame(sc, c, static_cast<std::uint64_t>(f)));
  const auto a = s.query_mean();
  const auto b = s.query_mean();
  CHECK(a.values == b.values);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    REQUIRE(a.supported[g]);
    CHECK(a.values[g] == doctest::Approx(4.25).epsilon(1e-12));
  }
}

TEST_CASE("state_size depends on (L, G) only and matches the serialized blob") {
  const auto c = cfg();
  const auto frame = generate_frame(sine_scenario(7), c, 0);
  auto make = [&](std::size_t L, std::size_t G) {
    OnlineConfig oc;
    oc.ladder = L;
    return OnlineState::init(regular_grid(c, G), oc, frame);
  };
  auto s = make(5, 100);
  const auto size0 = s.state_size();
  for (int f = 0; f < 10; ++f) s.ingest(frame);
  CHECK(s.state_size() == size0);
  CHECK(s.serialize().size() == s.state_size());
  const auto g100 = make(5, 100).state_size(), g200 = make(5, 200).state_size(), g300 = make(5, 300).state_size();
  CHECK(g300 - g200 == g200 - g100);
  const auto l2 = make(2, 100).state_size(), l4 = make(4, 100).state_size(), l6 = make(6, 100).state_size();
  CHECK(l6 - l4 == l4 - l2);
}

TEST_CASE("checkpoint round trip preserves the state exactly") {
  const auto c = cfg();
  OnlineConfig oc;
  oc.refresh_period = 4;
  auto s = OnlineState::init(regular_grid(c, 50), oc, generate_frame(sine_scenario(8), c, 0));
  for (int f = 0; f < 9; ++f) s.ingest(generate_frame(sine_scenario(8), c, static_cast<std::uint64_t>(f)));
  const auto bytes = s.serialize();
  const auto back = OnlineState::deserialize(bytes);
  CHECK(back == s);
  CHECK(back.serialize() == bytes);

  auto corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS_WITH_AS(OnlineState::deserialize(corrupt), "bad magic", ValidationError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(OnlineState::deserialize(truncated), ValidationError);
}

TEST_CASE("ingest rejects frames that do not cover the grid") {
  const auto c = cfg(100, 1.0);
  const auto frame = generate_frame(sine_scenario(9), c, 0);
  auto s = OnlineState::init(EvalGrid({-5.0, 50.0}), OnlineConfig{}, frame);
  CHECK_THROWS_AS(s.ingest(frame), ValidationError);
  auto t = OnlineState::init(regular_grid(c, 10), OnlineConfig{}, frame);
  CHECK_THROWS_AS(t.ingest(generate_frame(sine_scenario(9), cfg(50, 1.0), 0)), ValidationError);
}

TEST_CASE("refresh re-estimates the noise variance") {
  const auto c = cfg(800, 0.4);
  auto sc = sine_scenario(10, 0.2);
  sc.mean.terms = {SineTerm{1.0, 160.0, 0.0}};
  OnlineConfig oc;
  oc.refresh_period = 10;
  auto s = OnlineState::init(regular_grid(c, 100), oc, generate_frame(sc, c, 0));
  const double before = s.pilot().sigma2_hat;
  for (std::uint64_t f = 0; f < 11; ++f) s.ingest(generate_frame(sc, c, f));
  CHECK(s.pilot().sigma2_hat != before);
  // One-step-ahead residuals include estimation error, so they sit a little above sigma^2.
  CHECK(s.pilot().sigma2_hat == doctest::Approx(0.04).epsilon(0.25));
}
