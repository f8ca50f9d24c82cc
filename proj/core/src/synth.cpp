#include "dasflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace dasflow {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::mt19937_64 frame_rng(std::uint64_t seed, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

double MeanFunction::operator()(double x) const {
  double y = 0.0;
  for (const auto& term : terms) {
    y += std::visit(Overloaded{
                        [](const ConstantTerm& t) { return t.value; },
                        [x](const LinearTerm& t) { return t.intercept + t.slope * x; },
                        [x](const SineTerm& t) {
                          return t.amplitude * std::sin(2.0 * std::numbers::pi * x / t.period + t.phase);
                        },
                        [x](const BumpTerm& t) {
                          const double z = (x - t.center) / t.width;
                          return t.height * std::exp(-0.5 * z * z);
                        },
                    },
                    term);
  }
  return y;
}

double MeanFunction::second_derivative(double x) const {
  double y = 0.0;
  for (const auto& term : terms) {
    y += std::visit(Overloaded{
                        [](const ConstantTerm&) { return 0.0; },
                        [](const LinearTerm&) { return 0.0; },
                        [x](const SineTerm& t) {
                          const double w = 2.0 * std::numbers::pi / t.period;
                          return -t.amplitude * w * w * std::sin(w * x + t.phase);
                        },
                        [x](const BumpTerm& t) {
                          const double z = (x - t.center) / t.width;
                          return t.height * (z * z - 1.0) / (t.width * t.width) * std::exp(-0.5 * z * z);
                        },
                    },
                    term);
  }
  return y;
}

double stripe_center(const VehicleSpec& v, std::size_t row, double row_period, double col_spacing) {
  return (static_cast<double>(row) - static_cast<double>(v.entry_row)) * v.velocity * row_period / col_spacing;
}

double stripe_field(const std::vector<VehicleSpec>& vehicles, std::size_t row, double col, double row_period,
                    double col_spacing) {
  double sum = 0.0;
  for (const auto& v : vehicles) {
    if (row < v.entry_row) continue;
    const double z = (col - stripe_center(v, row, row_period, col_spacing)) / v.width_cols;
    sum += v.amplitude * std::exp(-0.5 * z * z);
  }
  return sum;
}

TrajectorySet vehicle_truth(const std::vector<VehicleSpec>& vehicles, std::size_t rows, std::size_t cols,
                            double row_period, double col_spacing) {
  TrajectorySet set;
  for (const auto& v : vehicles) {
    if (!(v.velocity > 0.0) || !(v.amplitude > 0.0))
      throw ValidationError("vehicle velocity and amplitude must be positive");
    Track track;
    track.velocity_mps = v.velocity;
    for (std::size_t r = v.entry_row; r < rows; ++r) {
      const double c = std::round(stripe_center(v, r, row_period, col_spacing));
      if (c > static_cast<double>(cols) - 1.0) break;
      track.points.push_back({r, static_cast<std::size_t>(c)});
    }
    if (!track.points.empty()) set.tracks.push_back(std::move(track));
  }
  return set;
}

namespace {

FrameRecord draw_frame(const MeanScenario& scenario, const StreamConfig& config, std::uint64_t k,
                       const std::vector<VehicleSpec>* vehicles) {
  if (!(scenario.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be non-negative");
  auto rng = frame_rng(scenario.seed, k);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double z1 = normal(rng);
  const double z2 = normal(rng);
  const double span = config.interval_length();
  const auto second = static_cast<std::uint32_t>(k / config.fps);
  const auto index = static_cast<std::uint32_t>(k % config.fps + 1);

  std::vector<double> amps(config.points_per_frame);
  for (std::size_t d = 0; d < amps.size(); ++d) {
    const double x = config.coordinate(d);
    const double u = 2.0 * std::numbers::pi * (x - config.distance_origin) / span;
    double y = scenario.mean(x);
    if (vehicles != nullptr) y += stripe_field(*vehicles, second, static_cast<double>(d), 1.0, config.point_spacing);
    y += scenario.process_amp * (z1 * std::sin(u) + z2 * std::cos(u));
    y += scenario.noise_sigma * normal(rng);
    amps[d] = y;
  }
  return make_frame(config, second, index, std::move(amps));
}

}  // namespace

FrameRecord generate_frame(const MeanScenario& scenario, const StreamConfig& config, std::uint64_t k) {
  return draw_frame(scenario, config, k, nullptr);
}

FrameRecord generate_traffic_frame(const MeanScenario& scenario, const std::vector<VehicleSpec>& vehicles,
                                   const StreamConfig& config, std::uint64_t k) {
  return draw_frame(scenario, config, k, &vehicles);
}

MeanCurve true_curve(const MeanFunction& mean, const EvalGrid& grid) {
  MeanCurve curve;
  curve.grid = grid;
  curve.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) curve.values[i] = mean(grid[i]);
  curve.supported.assign(grid.size(), true);
  return curve;
}

StreamSample generate_stream(const MeanScenario& scenario, const StreamConfig& config, std::size_t frames) {
  if (frames < 1) throw ValidationError("need at least one frame");
  config.validate();
  StreamSample sample;
  sample.frames.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) sample.frames.push_back(generate_frame(scenario, config, k));
  sample.truth = true_curve(scenario.mean, EvalGrid(config.coordinates()));
  return sample;
}

WaterfallSample generate_waterfall(const std::vector<VehicleSpec>& vehicles, std::size_t rows,
                                   const StreamConfig& config, double noise_sigma, std::uint64_t seed) {
  if (rows < 2) throw ValidationError("waterfall needs at least 2 rows");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be non-negative");
  config.validate();
  const std::size_t cols = config.points_per_frame;
  const double period = 1.0;
  Waterfall w(rows, cols, period, config.point_spacing);
  for (std::size_t r = 0; r < rows; ++r) {
    auto rng = frame_rng(seed, r);
    std::normal_distribution<double> normal(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
    for (std::size_t c = 0; c < cols; ++c) {
      double v = stripe_field(vehicles, r, static_cast<double>(c), period, config.point_spacing);
      if (noise_sigma > 0.0) v += normal(rng);
      w.at(r, c) = std::max(v, 0.0);
    }
  }
  return {std::move(w), vehicle_truth(vehicles, rows, cols, period, config.point_spacing)};
}

double rmse(const MeanCurve& curve, const MeanCurve& truth) {
  if (curve.size() != truth.size() || !(curve.grid == truth.grid))
    throw ValidationError("rmse needs curves on the same grid");
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!curve.supported[i] || !truth.supported[i]) continue;
    const double d = curve.values[i] - truth.values[i];
    ss += d * d;
    ++n;
  }
  if (n == 0) throw ValidationError("rmse has no supported points");
  return std::sqrt(ss / static_cast<double>(n));
}

namespace {

std::vector<double> numbers(std::istringstream& in, std::size_t want, std::size_t line) {
  std::vector<double> out;
  double v = 0.0;
  while (in >> v) out.push_back(v);
  if (!in.eof() || out.size() != want) {
    throw ValidationError("line " + std::to_string(line) + ": expected " + std::to_string(want) +
                          " number(s)");
  }
  return out;
}

bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("line " + std::to_string(line) + ": expected a boolean");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::istringstream vs(value);
    auto one = [&] { return numbers(vs, 1, line_no)[0]; };
    auto count = [&] {
      const double v = one();
      if (v < 0 || v != std::floor(v))
        throw ValidationError("line " + std::to_string(line_no) + ": expected a non-negative integer");
      return static_cast<std::size_t>(v);
    };

    if (key == "points_per_frame") sc.stream.points_per_frame = count();
    else if (key == "point_spacing") sc.stream.point_spacing = one();
    else if (key == "fps") sc.stream.fps = static_cast<std::uint32_t>(count());
    else if (key == "distance_origin") sc.stream.distance_origin = one();
    else if (key == "allow_negative") sc.stream.allow_negative = parse_bool(value, line_no);
    else if (key == "frames") sc.frames = count();
    else if (key == "grid_points") sc.grid_points = count();
    else if (key == "ladder") sc.ladder = count();
    else if (key == "noise_sigma") sc.mean.noise_sigma = one();
    else if (key == "process_amp") sc.mean.process_amp = one();
    else if (key == "seed") sc.mean.seed = count();
    else if (key == "mean.constant") sc.mean.mean.terms.push_back(ConstantTerm{one()});
    else if (key == "mean.linear") {
      const auto v = numbers(vs, 2, line_no);
      sc.mean.mean.terms.push_back(LinearTerm{v[0], v[1]});
    } else if (key == "mean.sine") {
      const auto v = numbers(vs, 3, line_no);
      sc.mean.mean.terms.push_back(SineTerm{v[0], v[1], v[2]});
    } else if (key == "mean.bump") {
      const auto v = numbers(vs, 3, line_no);
      sc.mean.mean.terms.push_back(BumpTerm{v[0], v[1], v[2]});
    } else if (key == "vehicle") {
      const auto v = numbers(vs, 4, line_no);
      if (v[0] < 0 || v[0] != std::floor(v[0]))
        throw ValidationError("line " + std::to_string(line_no) + ": entry row must be a non-negative integer");
      sc.vehicles.push_back({static_cast<std::size_t>(v[0]), v[1], v[2], v[3]});
    } else {
      throw ValidationError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  sc.stream.validate();
  if (!(sc.mean.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be non-negative");
  if (sc.frames < 1) throw ValidationError("frames must be >= 1");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  return parse_scenario(in);
}

}  // namespace dasflow
