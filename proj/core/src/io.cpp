#include "dasflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "byte_io.hpp"

namespace dasflow::io {

namespace {

constexpr char kStreamMagic[4] = {'D', 'A', 'S', '1'};
constexpr std::uint32_t kStreamVersion = 1;
constexpr std::size_t kStreamHeaderBytes = 4 + 4 + 4 + 8 + 4 + 8;

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ValidationError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

std::uint64_t parse_index(const std::string& s, std::size_t line) {
  const double v = parse_number(s, line);
  if (!(v >= 0.0) || v != std::floor(v))
    throw ValidationError("line " + std::to_string(line) + ": expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

Format format_for_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0 ? Format::Csv : Format::Binary;
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "bin") return Format::Binary;
  throw ValidationError("unknown format '" + name + "' (expected csv or bin)");
}

FrameStreamWriter::FrameStreamWriter(std::ostream& out, const StreamConfig& config, std::uint64_t frame_count,
                                     Format format)
    : out_(out), config_(config), format_(format) {
  config_.validate();
  if (format_ == Format::Binary) {
    std::vector<std::uint8_t> buf;
    detail::ByteWriter w(buf);
    w.bytes(kStreamMagic, 4);
    w.u32(kStreamVersion);
    w.u32(static_cast<std::uint32_t>(config_.points_per_frame));
    w.f64(config_.point_spacing);
    w.u32(config_.fps);
    w.u64(frame_count);
    out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    out_ << "second,frame";
    for (std::size_t d = 0; d < config_.points_per_frame; ++d) out_ << ",a_" << d;
    out_ << '\n';
  }
}

void FrameStreamWriter::write(const FrameRecord& frame) {
  if (frame.size() != config_.points_per_frame)
    throw ValidationError("frame has " + std::to_string(frame.size()) + " points, stream declares " +
                          std::to_string(config_.points_per_frame));
  if (format_ == Format::Binary) {
    std::vector<std::uint8_t> buf;
    buf.reserve(8 + 4 * frame.size());
    detail::ByteWriter w(buf);
    w.u32(frame.second);
    w.u32(frame.frame_index);
    for (double a : frame.amplitudes) w.f32(static_cast<float>(a));
    out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    out_ << frame.second << ',' << frame.frame_index;
    for (double a : frame.amplitudes) out_ << ',' << fmt_float(static_cast<float>(a));
    out_ << '\n';
  }
  if (!out_) throw std::runtime_error("write failed");
  ++written_;
}

FrameStreamReader::FrameStreamReader(std::istream& in, Format format, const StreamConfig& csv_geometry)
    : in_(in), format_(format), config_(csv_geometry) {
  if (format_ == Format::Binary) {
    std::vector<std::uint8_t> buf(kStreamHeaderBytes);
    in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    buf.resize(static_cast<std::size_t>(in_.gcount()));
    if (buf.size() < 4 || !std::equal(buf.begin(), buf.begin() + 4, kStreamMagic))
      throw ValidationError("bad magic");
    detail::ByteReader r(buf);
    r.bytes(4);
    if (r.u32() != kStreamVersion) throw ValidationError("unsupported stream version");
    config_.points_per_frame = r.u32();
    config_.point_spacing = r.f64();
    config_.fps = r.u32();
    declared_ = r.u64();
    config_.distance_origin = 0.0;
  } else {
    std::string header;
    if (!std::getline(in_, header)) throw ValidationError("empty CSV stream");
    const auto cells = split_csv(header);
    if (cells.size() < 4 || cells[0] != "second" || cells[1] != "frame")
      throw ValidationError("CSV header must start with second,frame");
    for (std::size_t d = 2; d < cells.size(); ++d) {
      if (cells[d] != "a_" + std::to_string(d - 2))
        throw ValidationError("CSV header column " + std::to_string(d) + " should be a_" + std::to_string(d - 2));
    }
    config_.points_per_frame = cells.size() - 2;
  }
  config_.validate();
}

std::optional<FrameRecord> FrameStreamReader::next() {
  if (format_ == Format::Binary) {
    if (declared_ != 0 && read_ == declared_) return std::nullopt;
    const std::size_t D = config_.points_per_frame;
    std::vector<std::uint8_t> buf(8 + 4 * D);
    in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got == 0 && declared_ == 0) return std::nullopt;
    if (got != buf.size()) throw ValidationError("truncated payload at frame " + std::to_string(read_));
    detail::ByteReader r(buf);
    const std::uint32_t second = r.u32();
    const std::uint32_t index = r.u32();
    std::vector<double> amps(D);
    for (auto& a : amps) a = static_cast<double>(r.f32());
    ++read_;
    auto frame = make_frame(config_, second, index, std::move(amps));
    validate_frame(frame, config_);
    return frame;
  }
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != config_.points_per_frame + 2)
      throw ValidationError("line " + std::to_string(line_) + ": D mismatch (" + std::to_string(cells.size() - 2) +
                            " amplitudes, header declares " + std::to_string(config_.points_per_frame) + ")");
    const auto second = static_cast<std::uint32_t>(parse_index(cells[0], line_));
    const auto index = static_cast<std::uint32_t>(parse_index(cells[1], line_));
    std::vector<double> amps(config_.points_per_frame);
    for (std::size_t d = 0; d < amps.size(); ++d)
      amps[d] = static_cast<double>(static_cast<float>(parse_number(cells[d + 2], line_)));
    ++read_;
    auto frame = make_frame(config_, second, index, std::move(amps));
    validate_frame(frame, config_);
    return frame;
  }
  return std::nullopt;
}

void write_frame_stream(const std::string& path, const StreamConfig& config, const std::vector<FrameRecord>& frames,
                        std::optional<Format> format) {
  const Format fmt = format.value_or(format_for_path(path));
  auto out = open_out(path, fmt == Format::Binary ? std::ios::out | std::ios::binary : std::ios::out);
  FrameStreamWriter writer(out, config, frames.size(), fmt);
  for (const auto& f : frames) writer.write(f);
}

FrameStream read_frame_stream(const std::string& path, std::optional<Format> format,
                              const StreamConfig& csv_geometry) {
  const Format fmt = format.value_or(format_for_path(path));
  auto in = open_in(path, fmt == Format::Binary ? std::ios::in | std::ios::binary : std::ios::in);
  FrameStreamReader reader(in, fmt, csv_geometry);
  FrameStream out;
  out.config = reader.config();
  while (auto f = reader.next()) out.frames.push_back(std::move(*f));
  return out;
}

CurveCsvWriter::CurveCsvWriter(std::ostream& out, const EvalGrid& grid) : out_(out), grid_(grid) {
  out_ << "second";
  for (double x : grid_.points()) out_ << ',' << fmt_double(x);
  out_ << '\n';
}

void CurveCsvWriter::write(std::uint32_t second, const MeanCurve& curve) {
  if (curve.size() != grid_.size()) throw ValidationError("curve does not match the table grid");
  out_ << second;
  for (std::size_t i = 0; i < curve.size(); ++i)
    out_ << ',' << (curve.supported[i] ? fmt_double(curve.values[i]) : std::string("nan"));
  out_ << '\n';
}

CurveTable read_curves(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty curve file");
  auto cells = split_csv(line);
  if (cells.size() < 3 || cells[0] != "second") throw ValidationError("curve header must start with second");
  std::vector<double> xs;
  for (std::size_t i = 1; i < cells.size(); ++i) xs.push_back(parse_number(cells[i], 1));
  CurveTable table;
  table.grid = EvalGrid(std::move(xs));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    cells = split_csv(line);
    if (cells.size() != table.grid.size() + 1)
      throw ValidationError("line " + std::to_string(line_no) + ": wrong number of columns");
    MeanCurve curve;
    curve.grid = table.grid;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const double v = parse_number(cells[i], line_no);
      curve.values.push_back(v);
      curve.supported.push_back(std::isfinite(v));
    }
    table.seconds.push_back(static_cast<std::uint32_t>(parse_index(cells[0], line_no)));
    table.curves.push_back(std::move(curve));
  }
  return table;
}

CurveTable read_curves(const std::string& path) {
  auto in = open_in(path);
  return read_curves(in);
}

Waterfall curves_to_waterfall(const CurveTable& table, double row_period) {
  if (table.curves.size() < 2) throw ValidationError("waterfall needs at least 2 seconds of curves");
  const std::size_t cols = table.grid.size();
  const double spacing = (table.grid.back() - table.grid.front()) / static_cast<double>(cols - 1);
  std::vector<double> values;
  values.reserve(table.curves.size() * cols);
  for (const auto& curve : table.curves) {
    if (curve.supported_count() == 0) {
      values.insert(values.end(), cols, 0.0);
      continue;
    }
    for (double v : curve.dense_values()) values.push_back(std::max(v, 0.0));
  }
  return Waterfall(table.curves.size(), cols, row_period, spacing, std::move(values));
}

void write_waterfall(std::ostream& out, const Waterfall& w) {
  out << "# waterfall row_period_s=" << fmt_double(w.row_period()) << " col_spacing_m=" << fmt_double(w.col_spacing())
      << '\n';
  out << "row";
  for (std::size_t c = 0; c < w.cols(); ++c) out << ",c_" << c;
  out << '\n';
  for (std::size_t r = 0; r < w.rows(); ++r) {
    out << r;
    for (double v : w.row(r)) out << ',' << fmt_double(v);
    out << '\n';
  }
}

Waterfall read_waterfall(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# waterfall", 0) != 0)
    throw ValidationError("missing '# waterfall' metadata line");
  double period = 0.0, spacing = 0.0;
  {
    std::istringstream meta(line.substr(11));
    std::string kv;
    while (meta >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      const double v = parse_number(kv.substr(eq + 1), 1);
      if (key == "row_period_s") period = v;
      else if (key == "col_spacing_m") spacing = v;
    }
  }
  if (!std::getline(in, line)) throw ValidationError("missing waterfall header");
  const std::size_t cols = split_csv(line).size() - 1;
  std::vector<double> values;
  std::size_t rows = 0, line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != cols + 1) throw ValidationError("line " + std::to_string(line_no) + ": wrong number of columns");
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_number(cells[c], line_no));
    ++rows;
  }
  Waterfall w(rows, cols, period, spacing, std::move(values));
  w.validate();
  return w;
}

void write_trajectories(std::ostream& out, const TrajectorySet& set) {
  out << "vehicle_id,row,col,velocity_mps\n";
  for (std::size_t t = 0; t < set.tracks.size(); ++t) {
    const auto& track = set.tracks[t];
    for (const auto& p : track.points)
      out << t << ',' << p.row << ',' << p.col << ',' << fmt_double(track.velocity_mps) << '\n';
  }
}

TrajectorySet read_trajectories(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty trajectory file");
  if (line.rfind("vehicle_id,row,col,velocity_mps", 0) != 0)
    throw ValidationError("trajectory header must be vehicle_id,row,col,velocity_mps");
  std::map<std::uint64_t, Track> by_id;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw ValidationError("line " + std::to_string(line_no) + ": expected 4 columns");
    auto& track = by_id[parse_index(cells[0], line_no)];
    track.points.push_back({parse_index(cells[1], line_no), parse_index(cells[2], line_no)});
    track.velocity_mps = parse_number(cells[3], line_no);
  }
  TrajectorySet set;
  for (auto& [id, track] : by_id) set.tracks.push_back(std::move(track));
  return set;
}

void write_metrics_csv(std::ostream& out, const MatchStats& s) {
  out << "total,correct,missing,wrong,accuracy\n"
      << s.total << ',' << s.correct << ',' << s.missing << ',' << s.wrong << ',' << fmt_double(s.accuracy) << '\n';
}

std::string metrics_json(const MatchStats& s) {
  const nlohmann::json j = {{"total", s.total},
                            {"correct", s.correct},
                            {"missing", s.missing},
                            {"wrong", s.wrong},
                            {"accuracy", s.accuracy}};
  return j.dump(2);
}

void save_checkpoint(const std::string& path, const OnlineState& state) {
  const auto bytes = state.serialize();
  auto out = open_out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
}

OnlineState load_checkpoint(const std::string& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return OnlineState::deserialize(bytes);
}

}  // namespace dasflow::io
