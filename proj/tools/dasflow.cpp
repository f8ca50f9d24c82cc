// dasflow: generate -> estimate/denoise -> waterfall -> extract -> evaluate, plus bench.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dasflow/baselines.hpp"
#include "dasflow/bench.hpp"
#include "dasflow/io.hpp"
#include "dasflow/lpr.hpp"
#include "dasflow/online_vbs.hpp"
#include "dasflow/synth.hpp"
#include "dasflow/trajectory.hpp"

namespace {

using namespace dasflow;

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

io::Format pick_format(const std::string& flag, const std::string& path) {
  return flag.empty() ? io::format_for_path(path) : io::parse_format(flag);
}

// ---- generate --------------------------------------------------------------

struct GenerateOpts {
  std::string scenario;
  std::string out;
  std::string truth;
  std::string truth_mean;
  std::string format;
  std::optional<std::uint64_t> seed;
};

int run_generate(const GenerateOpts& o) {
  Scenario sc = load_scenario(o.scenario);
  if (o.seed) sc.mean.seed = *o.seed;
  const io::Format fmt = pick_format(o.format, o.out);
  auto out = open_output(o.out, fmt == io::Format::Binary);
  io::FrameStreamWriter writer(out, sc.stream, sc.frames, fmt);

  std::unique_ptr<std::ofstream> mean_out;
  std::unique_ptr<io::CurveCsvWriter> mean_writer;
  const EvalGrid native(sc.stream.coordinates());
  if (!o.truth_mean.empty()) {
    mean_out = std::make_unique<std::ofstream>(open_output(o.truth_mean));
    mean_writer = std::make_unique<io::CurveCsvWriter>(*mean_out, native);
  }

  for (std::uint64_t k = 0; k < sc.frames; ++k) {
    const FrameRecord frame = sc.vehicles.empty() ? generate_frame(sc.mean, sc.stream, k)
                                                  : generate_traffic_frame(sc.mean, sc.vehicles, sc.stream, k);
    writer.write(frame);
    const bool last_of_second = frame.frame_index == sc.stream.fps || k + 1 == sc.frames;
    if (mean_writer && last_of_second) {
      MeanCurve truth = true_curve(sc.mean.mean, native);
      for (std::size_t d = 0; d < native.size(); ++d)
        truth.values[d] += stripe_field(sc.vehicles, frame.second, static_cast<double>(d), 1.0, sc.stream.point_spacing);
      mean_writer->write(frame.second, truth);
    }
  }
  if (!o.truth.empty()) {
    const std::size_t rows = (sc.frames + sc.stream.fps - 1) / sc.stream.fps;
    auto tout = open_output(o.truth);
    io::write_trajectories(tout, vehicle_truth(sc.vehicles, rows, sc.stream.points_per_frame, 1.0,
                                               sc.stream.point_spacing));
  }
  std::cerr << "generated " << writer.written() << " frames (D=" << sc.stream.points_per_frame << ")\n";
  return 0;
}

// ---- estimate / denoise ----------------------------------------------------

struct StreamOpts {
  std::string input;
  std::string out;
  std::string format;
  double spacing = 0.4;
  std::uint32_t fps = 3;
  std::size_t skip_frames = 0;
  std::size_t max_frames = 0;
};

struct EstimateOpts : StreamOpts {
  std::string mode = "online";
  std::string accumulate = "second";
  std::size_t grid_points = 0;
  std::size_t ladder = 5;
  std::uint32_t refresh = 0;
  std::string checkpoint;
  std::string resume;
};

// Feeds frames one at a time after applying --skip-frames / --max-frames.
class FrameSource {
 public:
  explicit FrameSource(const StreamOpts& o)
      : format_(pick_format(o.format, o.input)),
        in_(open_input(o.input, format_ == io::Format::Binary)),
        reader_(in_, format_, csv_geometry(o)),
        remaining_(o.max_frames) {
    for (std::size_t i = 0; i < o.skip_frames; ++i) {
      if (!reader_.next()) throw std::runtime_error("stream shorter than --skip-frames");
    }
  }

  const StreamConfig& config() const { return reader_.config(); }

  std::optional<FrameRecord> next() {
    if (limited_ && remaining_ == 0) return std::nullopt;
    auto f = reader_.next();
    if (f && limited_) --remaining_;
    return f;
  }

  bool limited() const { return limited_; }

 private:
  static StreamConfig csv_geometry(const StreamOpts& o) {
    StreamConfig c;
    c.point_spacing = o.spacing;
    c.fps = o.fps;
    return c;
  }

  io::Format format_;
  std::ifstream in_;
  io::FrameStreamReader reader_;
  std::size_t remaining_;
  bool limited_ = remaining_ > 0;
};

int run_estimate(EstimateOpts o) {
  if (o.mode != "online" && o.mode != "batch") throw ValidationError("--mode must be online or batch");
  if (o.accumulate != "second" && o.accumulate != "stream")
    throw ValidationError("--accumulate must be second or stream");
  FrameSource source(o);
  const StreamConfig& config = source.config();
  const bool per_second = o.accumulate == "second";
  const std::size_t G = o.grid_points == 0 ? config.points_per_frame : o.grid_points;
  const EvalGrid grid = regular_grid(config, G);
  auto out = open_output(o.out);
  io::CurveCsvWriter writer(out, grid);

  if (o.mode == "batch") {
    if (!o.checkpoint.empty() || !o.resume.empty())
      throw ValidationError("checkpoints apply to --mode online only");
    // Batch holds the frames it pools: one second, or the whole stream so far.
    std::vector<FrameRecord> held;
    auto emit = [&] {
      const auto rot = rot_bandwidth(std::span<const FrameRecord>(held.data(), 1),
                                     static_cast<double>(held.size() * config.points_per_frame));
      writer.write(held.back().second, batch_estimate(held, grid, rot.h));
    };
    bool pending = false;
    while (auto f = source.next()) {
      if (per_second && !held.empty() && f->second != held.back().second) {
        if (pending) emit();
        held.clear();
      }
      held.push_back(std::move(*f));
      pending = true;
      if (held.back().frame_index == config.fps) {
        emit();
        pending = false;
      }
    }
    if (pending) emit();
    return 0;
  }

  OnlineConfig oc;
  oc.ladder = o.ladder;
  oc.refresh_period = o.refresh;
  std::optional<OnlineState> state;
  if (!o.resume.empty()) {
    state = io::load_checkpoint(o.resume);
    if (!(state->grid() == grid)) throw ValidationError("checkpoint grid does not match --grid-points");
  }
  bool pending = false;
  std::uint32_t second = 0;
  std::size_t ingested = 0;
  while (auto f = source.next()) {
    // A new second starts a fresh estimate when accumulating per second.
    if (!state || (per_second && f->frame_index == 1)) state = OnlineState::init(grid, oc, *f);
    state->ingest(*f);
    ++ingested;
    second = f->second;
    pending = true;
    if (f->frame_index == config.fps) {
      writer.write(second, state->query_mean());
      pending = false;
    }
  }
  // A resumable run leaves an incomplete second to the next run.
  if (pending && o.checkpoint.empty()) writer.write(second, state->query_mean());
  if (!o.checkpoint.empty()) {
    if (!state) throw ValidationError("no frames ingested; nothing to checkpoint");
    io::save_checkpoint(o.checkpoint, *state);
  }
  std::cerr << "ingested " << ingested << " frames; state " << (state ? state->state_size() : 0) << " bytes\n";
  return 0;
}

struct DenoiseOpts : StreamOpts {
  std::string method = "kalman";
  std::size_t levels = 3;
};

int run_denoise(const DenoiseOpts& o) {
  if (o.method != "kalman" && o.method != "wavelet") throw ValidationError("--method must be kalman or wavelet");
  FrameSource source(o);
  const StreamConfig& config = source.config();
  auto out = open_output(o.out);
  io::CurveCsvWriter writer(out, EvalGrid(config.coordinates()));
  WaveletParams wp;
  wp.levels = o.levels;
  std::vector<FrameRecord> held;
  auto flush = [&] {
    if (held.empty()) return;
    writer.write(held.back().second,
                 o.method == "kalman" ? kalman_denoise_frames(held) : wavelet_denoise_frames(held, wp));
    held.clear();
  };
  while (auto f = source.next()) {
    if (!held.empty() && f->second != held.back().second) flush();
    held.push_back(std::move(*f));
  }
  flush();
  return 0;
}

// ---- waterfall / extract / evaluate ------------------------------------------

int run_waterfall(const std::string& input, const std::string& output, double row_period) {
  const auto table = io::read_curves(input);
  auto out = open_output(output);
  io::write_waterfall(out, io::curves_to_waterfall(table, row_period));
  return 0;
}

int run_extract(const std::string& input, const std::string& output, const TrackerConfig& config) {
  auto in = open_input(input);
  const Waterfall w = io::read_waterfall(in);
  const TrajectorySet set = extract_trajectories(w, config);
  auto out = open_output(output);
  io::write_trajectories(out, set);
  std::cerr << "extracted " << set.tracks.size() << " trajectories\n";
  return 0;
}

struct EvaluateOpts {
  std::string extracted;
  std::string truth;
  double tol_cols = 5.0;
  std::string out;
  std::string json;
};

int run_evaluate(const EvaluateOpts& o) {
  auto ein = open_input(o.extracted);
  auto tin = open_input(o.truth);
  const MatchStats stats = match_trajectories(io::read_trajectories(ein), io::read_trajectories(tin), o.tol_cols);
  if (o.out.empty()) {
    io::write_metrics_csv(std::cout, stats);
  } else {
    auto out = open_output(o.out);
    io::write_metrics_csv(out, stats);
  }
  if (!o.json.empty()) {
    auto out = open_output(o.json);
    out << io::metrics_json(stats) << '\n';
  }
  return 0;
}

int run_bench_cmd(const std::string& scenario, const std::string& out_path, const std::string& json_path,
                  std::optional<std::uint64_t> seed, std::size_t frames) {
  Scenario sc = load_scenario(scenario);
  if (seed) sc.mean.seed = *seed;
  if (frames > 0) sc.frames = frames;
  const BenchReport report = run_bench(sc);
  if (out_path.empty()) {
    write_bench_csv(std::cout, report);
  } else {
    auto out = open_output(out_path);
    write_bench_csv(out, report);
  }
  if (!json_path.empty()) {
    auto out = open_output(json_path);
    out << bench_json(report) << '\n';
  }
  return 0;
}

void add_stream_flags(CLI::App* cmd, StreamOpts& o) {
  cmd->add_option("-i,--input", o.input, "Frame stream file")->required();
  cmd->add_option("-o,--out", o.out, "Per-second curve CSV")->required();
  cmd->add_option("--format", o.format, "Input format (csv|bin); default from extension")
      ->check(CLI::IsMember({"csv", "bin"}));
  cmd->add_option("--spacing", o.spacing, "Point spacing in meters for CSV input");
  cmd->add_option("--fps", o.fps, "Frames per second for CSV input");
  cmd->add_option("--skip-frames", o.skip_frames, "Skip this many frames before processing");
  cmd->add_option("--max-frames", o.max_frames, "Process at most this many frames (0 = all)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming mean estimation and trajectory extraction for DAS frame streams"};
  app.require_subcommand(1);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Synthesize a frame stream and its ground truth from a scenario file");
  g->add_option("-s,--scenario", gen.scenario, "Scenario file")->required();
  g->add_option("-o,--out", gen.out, "Output frame stream")->required();
  g->add_option("--truth", gen.truth, "Truth trajectories CSV");
  g->add_option("--truth-mean", gen.truth_mean, "Truth per-second mean curves CSV");
  g->add_option("--format", gen.format, "Output format (csv|bin)")->check(CLI::IsMember({"csv", "bin"}));
  g->add_option("--seed", gen.seed, "Override the scenario seed");

  EstimateOpts est;
  auto* e = app.add_subcommand("estimate", "Estimate per-second mean curves with the online or batch estimator");
  add_stream_flags(e, est);
  e->add_option("--mode", est.mode, "online|batch")->check(CLI::IsMember({"online", "batch"}));
  e->add_option("--accumulate", est.accumulate, "Restart each second, or pool the whole stream")
      ->check(CLI::IsMember({"second", "stream"}));
  e->add_option("--grid-points", est.grid_points, "Evaluation grid size (0 = one per distance point)");
  e->add_option("--ladder", est.ladder, "Candidate bandwidth ladder size L")->check(CLI::Range(1, 32));
  e->add_option("--refresh", est.refresh, "Re-estimate the noise variance every R frames (0 = off)");
  e->add_option("--checkpoint", est.checkpoint, "Write the final online state here");
  e->add_option("--resume", est.resume, "Resume from an online state checkpoint");

  DenoiseOpts den;
  auto* dn = app.add_subcommand("denoise", "Per-second baseline denoising (filter, then average frames)");
  add_stream_flags(dn, den);
  dn->add_option("--method", den.method, "kalman|wavelet")->check(CLI::IsMember({"kalman", "wavelet"}));
  dn->add_option("--levels", den.levels, "Haar decomposition depth");

  std::string wf_in, wf_out;
  double row_period = 1.0;
  auto* wf = app.add_subcommand("waterfall", "Stack per-second curves into a waterfall matrix");
  wf->add_option("-i,--input", wf_in, "Curve CSV")->required();
  wf->add_option("-o,--out", wf_out, "Waterfall CSV")->required();
  wf->add_option("--row-period", row_period, "Seconds per row");

  std::string ex_in, ex_out;
  TrackerConfig tracker;
  tracker.peak_threshold = 1.0;
  double v_min_kmh = 60.0, v_max_kmh = 120.0;
  auto* ex = app.add_subcommand("extract", "Detect vehicle entries and track trajectories");
  ex->add_option("-i,--input", ex_in, "Waterfall CSV")->required();
  ex->add_option("-o,--out", ex_out, "Trajectory CSV")->required();
  ex->add_option("--peak-threshold", tracker.peak_threshold, "Entry peak threshold (amplitude units)");
  ex->add_option("--cof", tracker.cof, "Velocity confidence fraction")->check(CLI::Range(0.0, 1.0));
  ex->add_option("--v-min-kmh", v_min_kmh, "Initial velocity interval lower bound");
  ex->add_option("--v-max-kmh", v_max_kmh, "Initial velocity interval upper bound");
  ex->add_option("--fit-window", tracker.fit_window, "Keypoints used in the velocity fit");
  ex->add_option("--min-track-len", tracker.min_track_len, "Drop tracks shorter than this");
  ex->add_option("--min-score", tracker.min_track_score, "Drop tracks with lower mean amplitude (<0 disables)");

  EvaluateOpts ev;
  auto* evc = app.add_subcommand("evaluate", "Score extracted trajectories against truth");
  evc->add_option("--extracted", ev.extracted, "Extracted trajectory CSV")->required();
  evc->add_option("--truth", ev.truth, "Truth trajectory CSV")->required();
  evc->add_option("--tol-cols", ev.tol_cols, "Mean column error tolerance");
  evc->add_option("-o,--out", ev.out, "Metrics CSV (default stdout)");
  evc->add_option("--json", ev.json, "Metrics JSON");

  std::string bench_scenario, bench_out, bench_json_path;
  std::optional<std::uint64_t> bench_seed;
  std::size_t bench_frames = 0;
  auto* b = app.add_subcommand("bench", "RMSE, state size and timing table for all four methods");
  b->add_option("-s,--scenario", bench_scenario, "Scenario file")->required();
  b->add_option("-o,--out", bench_out, "Table CSV (default stdout)");
  b->add_option("--json", bench_json_path, "Table JSON");
  b->add_option("--seed", bench_seed, "Override the scenario seed");
  b->add_option("--frames", bench_frames, "Override the scenario frame count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) return run_generate(gen);
    if (*e) return run_estimate(est);
    if (*dn) return run_denoise(den);
    if (*wf) return run_waterfall(wf_in, wf_out, row_period);
    if (*ex) {
      tracker.v_init_min = v_min_kmh / 3.6;
      tracker.v_init_max = v_max_kmh / 3.6;
      return run_extract(ex_in, ex_out, tracker);
    }
    if (*evc) return run_evaluate(ev);
    if (*b) return run_bench_cmd(bench_scenario, bench_out, bench_json_path, bench_seed, bench_frames);
  } catch (const std::exception& ex_err) {
    std::cerr << "dasflow: error: " << ex_err.what() << '\n';
    return 1;
  }
  return 1;
}
