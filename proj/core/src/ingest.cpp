#include "courtphase/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <set>
#include <string_view>
#include <unordered_map>

namespace courtphase {

namespace {

constexpr std::size_t kMaxRejectMessages = 20;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

void split(std::string_view line, char delimiter, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(delimiter, pos);
    if (next == std::string_view::npos) {
      out.push_back(trim(line.substr(pos)));
      return;
    }
    out.push_back(trim(line.substr(pos, next - pos)));
    pos = next + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto result = std::from_chars(s.data(), end, value);
  return result.ec == std::errc() && result.ptr == end;
}

std::optional<std::size_t> as_index(const std::string& column) {
  std::size_t index = 0;
  if (parse_number(std::string_view(column), index)) return index;
  return std::nullopt;
}

std::string describe_player_list(const std::vector<PlayerId>& players) {
  std::string out;
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(players[i]);
  }
  return out;
}

}  // namespace

MatchTimeline::MatchTimeline(std::vector<Period> periods) : periods_(std::move(periods)) {
  for (std::size_t i = 0; i < periods_.size(); ++i) {
    const Period& p = periods_[i];
    if (p.start_ms >= p.end_ms) {
      throw ConfigError("timeline period " + std::to_string(i) + " has start_ms >= end_ms");
    }
    if (i > 0 && p.start_ms < periods_[i - 1].end_ms) {
      throw ConfigError("timeline periods must be sorted and non-overlapping (period " +
                        std::to_string(i) + ")");
    }
  }
}

const Period* MatchTimeline::find(TimestampMs t) const {
  auto it = std::upper_bound(periods_.begin(), periods_.end(), t,
                             [](TimestampMs value, const Period& p) { return value < p.start_ms; });
  if (it == periods_.begin()) return nullptr;
  --it;
  return it->contains(t) ? &*it : nullptr;
}

MatchTimeline MatchTimeline::flipped() const {
  std::vector<Period> out = periods_;
  for (Period& p : out) {
    p.attack = p.attack == AttackDirection::PositiveX ? AttackDirection::NegativeX
                                                      : AttackDirection::PositiveX;
  }
  return MatchTimeline(std::move(out));
}

std::size_t RawSession::normalize() {
  std::stable_sort(samples.begin(), samples.end(),
                   [](const PositionSample& a, const PositionSample& b) {
                     return a.timestamp < b.timestamp;
                   });
  // Keep the last-read sample of each (player, timestamp) run.
  std::size_t dropped = 0;
  std::vector<PositionSample> kept;
  kept.reserve(samples.size());
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j].timestamp == samples[i].timestamp) ++j;
    // [i, j) share a timestamp; emit one per player in first-appearance order, last value wins.
    for (std::size_t a = i; a < j; ++a) {
      bool later = false;
      for (std::size_t b = a + 1; b < j; ++b) {
        if (samples[b].player == samples[a].player) {
          later = true;
          break;
        }
      }
      if (later) {
        ++dropped;
        continue;
      }
      kept.push_back(samples[a]);
    }
    i = j;
  }
  samples = std::move(kept);

  std::set<PlayerId> ids;
  for (const auto& s : samples) ids.insert(s.player);
  roster.assign(ids.begin(), ids.end());
  return dropped;
}

RawSession make_session(std::vector<PositionSample> samples, Court court) {
  RawSession session;
  session.samples = std::move(samples);
  session.court = court;
  session.normalize();
  return session;
}

RawSession parse_records(std::istream& source, const RecordFormat& format,
                         ParseDiagnostics& diagnostics) {
  if (!(format.scale > 0.0) || !std::isfinite(format.scale)) {
    throw ConfigError("record format scale must be a positive finite number");
  }
  diagnostics = ParseDiagnostics{};

  std::array<std::optional<std::size_t>, 5> index;
  bool needs_names = false;
  for (std::size_t c = 0; c < 5; ++c) {
    index[c] = as_index(format.columns[c]);
    if (!index[c]) needs_names = true;
  }
  if (needs_names && format.header == HeaderMode::Absent) {
    throw ConfigError("columns selected by name require a header line");
  }

  std::vector<PositionSample> samples;
  std::vector<std::string_view> fields;
  std::string line;
  bool first_line = true;
  std::size_t line_no = 0;
  TimestampMs previous = 0;
  bool have_previous = false;

  auto reject = [&](const std::string& why) {
    ++diagnostics.rejected;
    if (diagnostics.reject_messages.size() < kMaxRejectMessages) {
      diagnostics.reject_messages.push_back("line " + std::to_string(line_no) + ": " + why);
    }
    if (diagnostics.rejected > format.max_rejects) {
      throw ParseError("too many malformed records (" + std::to_string(diagnostics.rejected) +
                       " > " + std::to_string(format.max_rejects) + "); last: line " +
                       std::to_string(line_no) + ": " + why);
    }
  };

  while (std::getline(source, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (first_line && view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF &&
        static_cast<unsigned char>(view[1]) == 0xBB && static_cast<unsigned char>(view[2]) == 0xBF) {
      view.remove_prefix(3);
    }
    if (view.empty()) continue;
    split(view, format.delimiter, fields);

    if (first_line) {
      first_line = false;
      bool is_header = format.header == HeaderMode::Present;
      if (format.header == HeaderMode::Auto) {
        if (needs_names) {
          is_header = true;
        } else {
          TimestampMs probe = 0;
          is_header = !(*index[0] < fields.size() && parse_number(fields[*index[0]], probe));
        }
      }
      if (is_header) {
        for (std::size_t c = 0; c < 5; ++c) {
          if (index[c]) continue;
          const auto it = std::find(fields.begin(), fields.end(), format.columns[c]);
          if (it == fields.end()) {
            throw ConfigError("column '" + format.columns[c] + "' not found in header");
          }
          index[c] = static_cast<std::size_t>(it - fields.begin());
        }
        continue;
      }
    }

    ++diagnostics.lines;
    PositionSample s;
    double coords[3] = {0.0, 0.0, 0.0};
    bool ok = true;
    std::string why;
    for (std::size_t c = 0; c < 5 && ok; ++c) {
      if (*index[c] >= fields.size()) {
        ok = false;
        why = "missing column " + std::to_string(*index[c]);
        break;
      }
      const std::string_view f = fields[*index[c]];
      if (c == 0) {
        ok = parse_number(f, s.timestamp) && s.timestamp >= 0;
        if (!ok) why = "bad timestamp '" + std::string(f) + "'";
      } else if (c == 1) {
        ok = parse_number(f, s.player);
        if (!ok) why = "bad player id '" + std::string(f) + "'";
      } else {
        ok = parse_number(f, coords[c - 2]) && std::isfinite(coords[c - 2]);
        if (!ok) why = "bad coordinate '" + std::string(f) + "'";
      }
    }
    if (!ok) {
      reject(why);
      continue;
    }
    s.x = coords[0] * format.scale;
    s.y = coords[1] * format.scale;
    s.z = coords[2] * format.scale;
    if (have_previous && s.timestamp < previous) ++diagnostics.out_of_order;
    previous = s.timestamp;
    have_previous = true;
    samples.push_back(s);
    ++diagnostics.parsed;
  }

  RawSession session;
  session.samples = std::move(samples);
  diagnostics.duplicates = session.normalize();
  return session;
}

RawSession parse_records(std::istream& source, const RecordFormat& format) {
  ParseDiagnostics diagnostics;
  return parse_records(source, format, diagnostics);
}

RawSession clip_to_play(const RawSession& session, const MatchTimeline& timeline) {
  if (timeline.empty()) throw ConfigError("clip_to_play: timeline has no periods");
  RawSession out;
  out.court = session.court;
  for (const auto& s : session.samples) {
    if (timeline.find(s.timestamp) != nullptr) out.samples.push_back(s);
  }
  if (out.samples.empty()) {
    throw InputError("clip_to_play: no samples fall inside the timeline periods "
                     "(timeline and session clocks do not match?)");
  }
  std::set<PlayerId> ids;
  for (const auto& s : out.samples) ids.insert(s.player);
  out.roster.assign(ids.begin(), ids.end());
  return out;
}

RawSession select_roster(const RawSession& session, std::span<const PlayerId> active) {
  std::set<PlayerId> wanted(active.begin(), active.end());
  if (active.size() != kTeamSize || wanted.size() != kTeamSize) {
    throw ConfigError("active roster must list exactly " + std::to_string(kTeamSize) +
                      " distinct players (got " + std::to_string(wanted.size()) + ")");
  }
  for (PlayerId id : wanted) {
    if (!std::binary_search(session.roster.begin(), session.roster.end(), id)) {
      throw ConfigError("active player " + std::to_string(id) + " not present in session roster");
    }
  }
  RawSession out;
  out.court = session.court;
  out.roster.assign(wanted.begin(), wanted.end());
  for (const auto& s : session.samples) {
    if (wanted.count(s.player)) out.samples.push_back(s);
  }
  return out;
}

GridLayout plan_grid(const RawSession& session, const GridOptions& options) {
  if (options.step < 1) throw ConfigError("grid step must be >= 1 ms");
  if (session.samples.empty() || session.roster.empty()) {
    throw InputError("regularize: session has no samples");
  }
  GridLayout layout;
  layout.step = options.step;
  layout.players = session.roster;

  std::unordered_map<PlayerId, TimestampMs> first_seen;
  for (const auto& s : session.samples) first_seen.try_emplace(s.player, s.timestamp);

  TimestampMs full_roster_ms = session.samples.front().timestamp;
  for (PlayerId id : layout.players) {
    const auto it = first_seen.find(id);
    if (it == first_seen.end()) {
      throw InputError("regularize: player " + std::to_string(id) + " has no samples");
    }
    full_roster_ms = std::max(full_roster_ms, it->second);
  }
  layout.start_ms = options.start_ms.value_or(full_roster_ms);
  for (PlayerId id : layout.players) {
    if (first_seen[id] > layout.start_ms) {
      throw InputError("regularize: player " + std::to_string(id) +
                       " has no sample at or before the first grid instant " +
                       std::to_string(layout.start_ms) + " ms (leading gap cannot be forward-filled)");
    }
  }
  const TimestampMs end = options.end_ms.value_or(session.samples.back().timestamp);
  if (end < layout.start_ms) {
    throw InputError("regularize: grid end " + std::to_string(end) + " precedes start " +
                     std::to_string(layout.start_ms));
  }
  layout.frame_count = static_cast<std::size_t>((end - layout.start_ms) / layout.step) + 1;
  return layout;
}

GridLayout stream_frames(const RawSession& session, const GridOptions& options,
                         const FrameCallback& on_frame) {
  GridLayout layout = plan_grid(session, options);
  const std::size_t n_players = layout.players.size();
  std::unordered_map<PlayerId, std::size_t> slot;
  for (std::size_t p = 0; p < n_players; ++p) slot[layout.players[p]] = p;

  std::vector<Point> current(n_players);
  std::vector<TimestampMs> seen_at(n_players, -1);
  std::vector<std::uint8_t> imputed(n_players, 0);
  std::size_t cursor = 0;
  const auto& samples = session.samples;

  for (std::size_t i = 0; i < layout.frame_count; ++i) {
    const TimestampMs t = layout.start_ms + static_cast<TimestampMs>(i) * layout.step;
    while (cursor < samples.size() && samples[cursor].timestamp <= t) {
      const auto& s = samples[cursor++];
      const auto it = slot.find(s.player);
      if (it == slot.end()) continue;
      current[it->second] = Point{s.x, s.y};
      seen_at[it->second] = s.timestamp;
    }
    for (std::size_t p = 0; p < n_players; ++p) imputed[p] = seen_at[p] == t ? 0 : 1;
    on_frame(t, current, imputed);
  }
  return layout;
}

FrameSeries regularize(const RawSession& session, const GridOptions& options) {
  FrameSeries out;
  const GridLayout layout = plan_grid(session, options);
  out.grid_step = layout.step;
  out.start_ms = layout.start_ms;
  out.players = layout.players;
  out.positions.reserve(layout.frame_count * layout.players.size());
  out.imputed.reserve(layout.frame_count * layout.players.size());
  stream_frames(session, options,
                [&out](TimestampMs, std::span<const Point> pos, std::span<const std::uint8_t> imp) {
                  out.positions.insert(out.positions.end(), pos.begin(), pos.end());
                  out.imputed.insert(out.imputed.end(), imp.begin(), imp.end());
                });
  return out;
}

namespace {

RawSession period_subset(const RawSession& session, const Period& period, std::size_t index) {
  RawSession sub;
  sub.court = session.court;
  sub.roster = session.roster;
  const auto begin = std::lower_bound(
      session.samples.begin(), session.samples.end(), period.start_ms,
      [](const PositionSample& s, TimestampMs t) { return s.timestamp < t; });
  const auto end = std::lower_bound(
      begin, session.samples.end(), period.end_ms,
      [](const PositionSample& s, TimestampMs t) { return s.timestamp < t; });
  sub.samples.assign(begin, end);
  std::set<PlayerId> present;
  for (const auto& s : sub.samples) present.insert(s.player);
  std::vector<PlayerId> missing;
  for (PlayerId id : sub.roster) {
    if (!present.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    throw InputError("period " + std::to_string(index) + " [" + std::to_string(period.start_ms) +
                     ", " + std::to_string(period.end_ms) + ") has no samples for player(s) " +
                     describe_player_list(missing));
  }
  return sub;
}

}  // namespace

void stream_periods(const RawSession& session, const MatchTimeline& timeline, TimestampMs step,
                    const std::function<void(const GridLayout&)>& on_segment,
                    const FrameCallback& on_frame) {
  if (timeline.empty()) throw ConfigError("timeline has no periods");
  for (std::size_t i = 0; i < timeline.periods().size(); ++i) {
    const RawSession sub = period_subset(session, timeline.periods()[i], i);
    GridOptions options;
    options.step = step;
    on_segment(plan_grid(sub, options));
    stream_frames(sub, options, on_frame);
  }
}

std::vector<FrameSeries> regularize_periods(const RawSession& session,
                                            const MatchTimeline& timeline, TimestampMs step) {
  if (timeline.empty()) throw ConfigError("timeline has no periods");
  std::vector<FrameSeries> out;
  for (std::size_t i = 0; i < timeline.periods().size(); ++i) {
    GridOptions options;
    options.step = step;
    out.push_back(regularize(period_subset(session, timeline.periods()[i], i), options));
  }
  return out;
}

RawSession frames_to_session(const FrameSeries& frames, Court court) {
  std::vector<PositionSample> samples;
  samples.reserve(frames.positions.size());
  for (std::size_t i = 0; i < frames.frame_count(); ++i) {
    const auto frame = frames.frame(i);
    for (std::size_t p = 0; p < frames.player_count(); ++p) {
      samples.push_back({frames.time_at(i), frames.players[p], frame[p].x, frame[p].y, 0.0});
    }
  }
  return make_session(std::move(samples), court);
}

SessionStats session_stats(const RawSession& session) {
  if (session.samples.size() < 2) {
    throw InputError("session_stats: need at least 2 samples");
  }
  SessionStats stats;
  stats.total_samples = session.samples.size();
  stats.first_ms = session.samples.front().timestamp;
  stats.last_ms = session.samples.back().timestamp;
  const TimestampMs span = stats.last_ms - stats.first_ms;
  if (span <= 0) throw InputError("session_stats: all samples share one timestamp");
  stats.overall_rate_hz = static_cast<double>(stats.total_samples) * 1000.0 / static_cast<double>(span);

  std::map<PlayerId, std::pair<TimestampMs, TimestampMs>> bounds;
  for (const auto& s : session.samples) {
    auto [it, inserted] = bounds.try_emplace(s.player, s.timestamp, s.timestamp);
    if (!inserted) it->second.second = s.timestamp;
    ++stats.samples_per_player[s.player];
  }
  double sum = 0.0;
  for (const auto& [player, range] : bounds) {
    const std::size_t count = stats.samples_per_player[player];
    if (count < 2) continue;
    // Mean of consecutive gaps telescopes to span / (count - 1).
    const double mean = static_cast<double>(range.second - range.first) / static_cast<double>(count - 1);
    stats.mean_interval_ms[player] = mean;
    sum += mean;
  }
  if (!stats.mean_interval_ms.empty()) {
    stats.mean_player_interval_ms = sum / static_cast<double>(stats.mean_interval_ms.size());
  }
  return stats;
}

}  // namespace courtphase
