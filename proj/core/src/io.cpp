#include "courtphase/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <system_error>

namespace courtphase {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter = ',') {
  std::vector<std::string> out;
  std::string_view rest(line);
  while (true) {
    const std::size_t next = rest.find(delimiter);
    std::string_view field = rest.substr(0, next);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    out.emplace_back(field);
    if (next == std::string_view::npos) break;
    rest.remove_prefix(next + 1);
  }
  return out;
}

template <typename T>
T parse_field(const std::string& s, const char* what, std::size_t line_no) {
  T value{};
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw ParseError(std::string("line ") + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return value;
}

bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

// Parses "p<id>_x" / "d_<a>_<b>" style identifiers.
PlayerId parse_id(std::string_view s, std::size_t line_no) {
  PlayerId id = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), id);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad player id in header '" +
                     std::string(s) + "'");
  }
  return id;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (result.ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buffer, result.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

AtomicFileWriter::AtomicFileWriter(std::filesystem::path path) : path_(std::move(path)) {
  tmp_ = path_;
  tmp_ += ".tmp";
  out_ = std::make_unique<std::ofstream>(tmp_, std::ios::binary | std::ios::trunc);
  if (!*out_) throw Error("cannot open " + tmp_.string() + " for writing");
}

AtomicFileWriter::~AtomicFileWriter() {
  if (committed_) return;
  out_.reset();
  std::error_code ec;
  std::filesystem::remove(tmp_, ec);
}

std::ostream& AtomicFileWriter::stream() { return *out_; }

void AtomicFileWriter::commit() {
  out_->flush();
  if (!*out_) throw Error("failed writing " + tmp_.string());
  out_->close();
  std::error_code ec;
  std::filesystem::rename(tmp_, path_, ec);
  if (ec) throw Error("cannot rename " + tmp_.string() + " to " + path_.string() + ": " + ec.message());
  committed_ = true;
}

void write_frames_header(std::ostream& out, std::span<const PlayerId> players) {
  out << "t_ms";
  for (PlayerId id : players) out << ",p" << id << "_x,p" << id << "_y";
  out << '\n';
}

void write_frame_row(std::ostream& out, TimestampMs t, std::span<const Point> positions) {
  std::string line = std::to_string(t);
  for (const Point& p : positions) {
    line += ',';
    line += format_double(p.x);
    line += ',';
    line += format_double(p.y);
  }
  line += '\n';
  out << line;
}

void write_frames_csv(std::ostream& out, std::span<const FrameSeries> segments) {
  if (segments.empty()) throw InputError("write_frames_csv: no segments");
  write_frames_header(out, segments.front().players);
  for (const FrameSeries& f : segments) {
    for (std::size_t i = 0; i < f.frame_count(); ++i) write_frame_row(out, f.time_at(i), f.frame(i));
  }
}

FrameCsvReader::FrameCsvReader(std::istream& in) : in_(in) {
  if (!next_data_line(in_, line_, line_no_)) throw ParseError("frames file is empty");
  const auto header = split_line(line_);
  if (header.empty() || header[0] != "t_ms" || header.size() % 2 != 1) {
    throw ParseError("frames header must be t_ms followed by p<id>_x,p<id>_y pairs");
  }
  for (std::size_t c = 1; c < header.size(); c += 2) {
    const std::string& hx = header[c];
    const std::string& hy = header[c + 1];
    if (hx.size() < 4 || hx.front() != 'p' || hx.substr(hx.size() - 2) != "_x") {
      throw ParseError("bad frames header column '" + hx + "'");
    }
    const PlayerId id = parse_id(std::string_view(hx).substr(1, hx.size() - 3), line_no_);
    if (hy != "p" + std::to_string(id) + "_y") throw ParseError("bad frames header column '" + hy + "'");
    players_.push_back(id);
  }
}

bool FrameCsvReader::next(TimestampMs& t, std::vector<Point>& positions) {
  if (!next_data_line(in_, line_, line_no_)) return false;
  const auto fields = split_line(line_);
  if (fields.size() != 1 + 2 * players_.size()) {
    throw ParseError("line " + std::to_string(line_no_) + ": expected " +
                     std::to_string(1 + 2 * players_.size()) + " fields");
  }
  t = parse_field<TimestampMs>(fields[0], "timestamp", line_no_);
  positions.resize(players_.size());
  for (std::size_t p = 0; p < players_.size(); ++p) {
    positions[p].x = parse_field<double>(fields[1 + 2 * p], "coordinate", line_no_);
    positions[p].y = parse_field<double>(fields[2 + 2 * p], "coordinate", line_no_);
  }
  return true;
}

SegmentTracker::SegmentTracker(TimestampMs grid_step, const MatchTimeline* timeline)
    : step_(grid_step), timeline_(timeline) {
  if (grid_step < 1) throw ConfigError("grid step must be >= 1");
}

bool SegmentTracker::starts_segment(TimestampMs t) {
  const Period* period = timeline_ ? timeline_->find(t) : nullptr;
  bool fresh = first_;
  if (!first_) {
    if (t <= previous_) {
      throw ParseError("timestamps must increase (" + std::to_string(t) + " after " +
                       std::to_string(previous_) + ")");
    }
    fresh = t != previous_ + step_ || period != period_;
  }
  first_ = false;
  previous_ = t;
  period_ = period;
  return fresh;
}

std::vector<FrameSeries> read_frames_csv(std::istream& in, TimestampMs grid_step,
                                         const MatchTimeline* timeline) {
  FrameCsvReader reader(in);
  SegmentTracker tracker(grid_step, timeline);
  std::vector<FrameSeries> segments;
  TimestampMs t = 0;
  std::vector<Point> row;
  while (reader.next(t, row)) {
    if (tracker.starts_segment(t)) {
      segments.emplace_back();
      segments.back().grid_step = grid_step;
      segments.back().start_ms = t;
      segments.back().players = reader.players();
    }
    FrameSeries& current = segments.back();
    current.positions.insert(current.positions.end(), row.begin(), row.end());
    current.imputed.insert(current.imputed.end(), row.size(), 0);
  }
  return segments;
}

void write_features_header(std::ostream& out, std::span<const PlayerPair> pairs) {
  out << "t_ms";
  for (const PlayerPair& p : pairs) out << ",d_" << p.first << '_' << p.second;
  out << '\n';
}

void write_feature_row(std::ostream& out, TimestampMs t, std::span<const double> values) {
  std::string line = std::to_string(t);
  for (double v : values) {
    line += ',';
    line += format_double(v);
  }
  line += '\n';
  out << line;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& features) {
  write_features_header(out, features.pairs);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    write_feature_row(out, features.timestamps[i], features.row(i));
  }
}

FeatureMatrix read_features_csv(std::istream& in, TimestampMs grid_step,
                                const MatchTimeline* timeline) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_data_line(in, line, line_no)) throw ParseError("features file is empty");
  const auto header = split_line(line);
  if (header.empty() || header[0] != "t_ms") throw ParseError("features header must start with t_ms");

  std::vector<PlayerPair> pairs;
  std::vector<PlayerId> players;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& h = header[c];
    const std::size_t sep = h.find('_', 2);
    if (h.rfind("d_", 0) != 0 || sep == std::string::npos) {
      throw ParseError("bad features header column '" + h + "'");
    }
    const PlayerPair pair{parse_id(std::string_view(h).substr(2, sep - 2), line_no),
                          parse_id(std::string_view(h).substr(sep + 1), line_no)};
    pairs.push_back(pair);
    for (PlayerId id : {pair.first, pair.second}) {
      if (std::find(players.begin(), players.end(), id) == players.end()) players.push_back(id);
    }
  }
  if (pair_labels(players) != pairs) {
    throw ParseError("features header pairs are not in lexicographic roster order");
  }

  FeatureMatrix m;
  m.players = players;
  m.pairs = pairs;
  SegmentTracker tracker(grid_step, timeline);
  while (next_data_line(in, line, line_no)) {
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields");
    }
    const auto t = parse_field<TimestampMs>(fields[0], "timestamp", line_no);
    if (tracker.starts_segment(t)) m.segment_starts.push_back(m.rows());
    m.timestamps.push_back(t);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      m.values.push_back(parse_field<double>(fields[c], "distance", line_no));
    }
  }
  return m;
}

void write_labels_csv(std::ostream& out, std::span<const TimestampMs> timestamps,
                      std::span<const ClusterId> labels) {
  if (timestamps.size() != labels.size()) throw InputError("write_labels_csv: length mismatch");
  out << "t_ms,cluster\n";
  std::string line;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    line = std::to_string(timestamps[i]);
    line += ',';
    line += std::to_string(labels[i]);
    line += '\n';
    out << line;
  }
}

std::vector<ClusterId> read_labels_csv(std::istream& in, std::vector<TimestampMs>* timestamps) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_data_line(in, line, line_no) || line != "t_ms,cluster") {
    throw ParseError("labels file must start with header t_ms,cluster");
  }
  std::vector<ClusterId> labels;
  while (next_data_line(in, line, line_no)) {
    const auto fields = split_line(line);
    if (fields.size() != 2) throw ParseError("line " + std::to_string(line_no) + ": expected 2 fields");
    if (timestamps) timestamps->push_back(parse_field<TimestampMs>(fields[0], "timestamp", line_no));
    labels.push_back(parse_field<ClusterId>(fields[1], "cluster", line_no));
  }
  return labels;
}

void write_model(std::ostream& out, const ClusterModel& model, std::span<const PlayerPair> pairs) {
  out << "# courtphase k-means model\n";
  out << "k " << model.k << '\n';
  out << "dim " << model.dim << '\n';
  out << "seed " << model.seed << '\n';
  out << "restarts " << model.restarts << '\n';
  out << "best_restart " << model.best_restart << '\n';
  out << "iterations " << model.iterations << '\n';
  out << "within_deviance " << format_double(model.deviance.within) << '\n';
  out << "between_deviance " << format_double(model.deviance.between) << '\n';
  out << "total_deviance " << format_double(model.deviance.total) << '\n';
  out << "pairs";
  for (const PlayerPair& p : pairs) out << ' ' << p.first << '-' << p.second;
  out << '\n';
  for (std::size_t j = 0; j < model.k; ++j) {
    out << "centroid " << j;
    for (double v : model.centroid(j)) out << ' ' << format_double(v);
    out << '\n';
  }
}

LoadedModel read_model(std::istream& in) {
  LoadedModel loaded;
  ClusterModel& m = loaded.model;
  std::string line;
  std::size_t line_no = 0;
  std::vector<bool> seen_centroid;
  while (next_data_line(in, line, line_no)) {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    auto next = [&]() {
      std::string token;
      if (!(fields >> token)) throw ParseError("line " + std::to_string(line_no) + ": missing value for " + key);
      return token;
    };
    if (key == "k") {
      m.k = parse_field<std::size_t>(next(), "k", line_no);
      m.centroids.assign(m.k * m.dim, 0.0);
      seen_centroid.assign(m.k, false);
    } else if (key == "dim") {
      m.dim = parse_field<std::size_t>(next(), "dim", line_no);
      m.centroids.assign(m.k * m.dim, 0.0);
    } else if (key == "seed") {
      m.seed = parse_field<std::uint64_t>(next(), "seed", line_no);
    } else if (key == "restarts") {
      m.restarts = parse_field<std::size_t>(next(), "restarts", line_no);
    } else if (key == "best_restart") {
      m.best_restart = parse_field<std::size_t>(next(), "best_restart", line_no);
    } else if (key == "iterations") {
      m.iterations = parse_field<std::size_t>(next(), "iterations", line_no);
    } else if (key == "within_deviance") {
      m.deviance.within = parse_field<double>(next(), "deviance", line_no);
    } else if (key == "between_deviance") {
      m.deviance.between = parse_field<double>(next(), "deviance", line_no);
    } else if (key == "total_deviance") {
      m.deviance.total = parse_field<double>(next(), "deviance", line_no);
    } else if (key == "pairs") {
      std::string token;
      while (fields >> token) {
        const std::size_t dash = token.find('-');
        if (dash == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": bad pair");
        loaded.pairs.push_back({parse_id(std::string_view(token).substr(0, dash), line_no),
                                parse_id(std::string_view(token).substr(dash + 1), line_no)});
      }
    } else if (key == "centroid") {
      const auto j = parse_field<std::size_t>(next(), "centroid index", line_no);
      if (j >= m.k || m.dim == 0) throw ParseError("line " + std::to_string(line_no) + ": centroid index out of range");
      for (std::size_t c = 0; c < m.dim; ++c) m.centroids[j * m.dim + c] = parse_field<double>(next(), "centroid value", line_no);
      seen_centroid[j] = true;
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown model key '" + key + "'");
    }
  }
  if (m.k == 0 || m.dim == 0) throw ParseError("model file lacks k or dim");
  for (std::size_t j = 0; j < m.k; ++j) {
    if (!seen_centroid[j]) throw ParseError("model file lacks centroid " + std::to_string(j));
  }
  if (!loaded.pairs.empty() && loaded.pairs.size() != m.dim) {
    throw ParseError("model pair labels do not match dim");
  }
  return loaded;
}

void write_selection_csv(std::ostream& out, const KSelection& selection) {
  out << "k,bd_td_ratio,chosen,fallback\n";
  for (const KCandidate& c : selection.candidates) {
    out << c.k << ',' << format_double(c.ratio) << ',' << (c.k == selection.chosen_k ? 1 : 0) << ','
        << (selection.fallback ? 1 : 0) << '\n';
  }
}

SelectionTable read_selection_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_data_line(in, line, line_no) || line != "k,bd_td_ratio,chosen,fallback") {
    throw ParseError("selection file must start with header k,bd_td_ratio,chosen,fallback");
  }
  SelectionTable table;
  while (next_data_line(in, line, line_no)) {
    const auto f = split_line(line);
    if (f.size() != 4) throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields");
    KCandidate c{parse_field<std::size_t>(f[0], "k", line_no), parse_field<double>(f[1], "ratio", line_no)};
    if (f[2] == "1") table.chosen_k = c.k;
    table.fallback = f[3] == "1";
    table.candidates.push_back(c);
  }
  return table;
}

void write_session_csv(std::ostream& out, const RawSession& session) {
  out << "timestamp_ms,player_id,x,y,z\n";
  std::string line;
  for (const PositionSample& s : session.samples) {
    line = std::to_string(s.timestamp);
    line += ',';
    line += std::to_string(s.player);
    for (double v : {s.x, s.y, s.z}) {
      line += ',';
      line += format_double(v);
    }
    line += '\n';
    out << line;
  }
}

void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
  out << "t_ms,formation,offense\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << truth.start_ms + static_cast<TimestampMs>(i) * truth.grid_step << ',' << truth.formation[i]
        << ',' << (truth.offense[i] == Side::Offensive ? 1 : 0) << '\n';
  }
}

void write_summaries_csv(std::ostream& out, const PhaseReport& report) {
  out << "cluster,count,share,offense_share";
  for (const PlayerPair& p : report.pairs) out << ",d_" << p.first << '_' << p.second;
  for (const PlayerPair& p : report.pairs) out << ",dev_" << p.first << '_' << p.second;
  out << '\n';
  for (std::size_t j = 0; j < report.summaries.size(); ++j) {
    const ClusterSummary& s = report.summaries[j];
    out << s.cluster << ',' << s.count << ',' << format_double(s.share) << ','
        << (s.offense_share ? format_double(*s.offense_share) : std::string());
    for (double v : s.mean_distances) out << ',' << format_double(v);
    for (double v : report.profiles[j]) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_transitions_csv(std::ostream& out, const TransitionMatrix& tm) {
  out << "from,to,count,probability\n";
  for (std::size_t a = 0; a < tm.k; ++a) {
    for (std::size_t b = 0; b < tm.k; ++b) {
      out << a << ',' << b << ',' << tm.count(a, b) << ',' << format_double(tm.probability(a, b)) << '\n';
    }
  }
}

void write_mds_csv(std::ostream& out, const MdsEmbedding& embedding, std::span<const PlayerId> players) {
  out << "player";
  for (std::size_t a = 0; a < embedding.dim; ++a) out << ",dim" << (a + 1);
  out << '\n';
  for (std::size_t i = 0; i < embedding.points; ++i) {
    out << (i < players.size() ? players[i] : static_cast<PlayerId>(i));
    for (std::size_t a = 0; a < embedding.dim; ++a) {
      out << ',' << format_double(embedding.coordinates[i * embedding.dim + a]);
    }
    out << '\n';
  }
}

}  // namespace courtphase
