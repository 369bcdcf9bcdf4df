#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtphase/common.hpp"

namespace courtphase {

/// One raw sensor reading. Coordinates are meters.
struct PositionSample {
  TimestampMs timestamp = 0;
  PlayerId player = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const PositionSample&, const PositionSample&) = default;
};

enum class AttackDirection { PositiveX, NegativeX };

/// An in-play interval [start_ms, end_ms) and the half the tracked team attacks during it.
struct Period {
  TimestampMs start_ms = 0;
  TimestampMs end_ms = 0;
  AttackDirection attack = AttackDirection::PositiveX;

  bool contains(TimestampMs t) const { return t >= start_ms && t < end_ms; }
  friend bool operator==(const Period&, const Period&) = default;
};

/// Sorted, non-overlapping in-play periods.
class MatchTimeline {
 public:
  MatchTimeline() = default;
  /// Throws ConfigError when periods are empty-width, unsorted or overlapping.
  explicit MatchTimeline(std::vector<Period> periods);

  const std::vector<Period>& periods() const { return periods_; }
  bool empty() const { return periods_.empty(); }

  /// Period containing t, or nullptr.
  const Period* find(TimestampMs t) const;

  /// Same periods with every attack direction reversed.
  MatchTimeline flipped() const;

 private:
  std::vector<Period> periods_;
};

/// Time-ordered samples plus the set of players seen and court metadata.
struct RawSession {
  std::vector<PositionSample> samples;
  std::vector<PlayerId> roster;  // sorted, unique
  Court court;

  /// Sorts samples (stable), keeps the last-read sample for duplicate (player, timestamp),
  /// and rebuilds the roster. Returns the number of duplicates dropped.
  std::size_t normalize();
};

/// Builds a normalized session from arbitrary-order samples.
RawSession make_session(std::vector<PositionSample> samples, Court court = {});

enum class HeaderMode { Auto, Present, Absent };

/// How to read delimited sensor records.
///
/// Each entry of `columns` selects the source column for timestamp, player, x, y, z, either
/// by zero-based index ("0") or by header name ("timestamp_ms"). Coordinates are multiplied
/// by `scale` to obtain meters.
struct RecordFormat {
  char delimiter = ',';
  HeaderMode header = HeaderMode::Auto;
  std::array<std::string, 5> columns{"0", "1", "2", "3", "4"};
  double scale = 1.0;
  std::size_t max_rejects = 1000;
};

struct ParseDiagnostics {
  std::size_t lines = 0;      // non-blank data lines seen
  std::size_t parsed = 0;
  std::size_t rejected = 0;
  std::size_t out_of_order = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> reject_messages;  // first few only
};

/// Parses timestamp/player/x/y/z records. Malformed lines are skipped and counted; once more
/// than `format.max_rejects` lines are rejected a ParseError is thrown.
RawSession parse_records(std::istream& source, const RecordFormat& format,
                         ParseDiagnostics& diagnostics);
RawSession parse_records(std::istream& source, const RecordFormat& format = {});

/// Keeps samples lying inside some timeline period. Order is preserved.
RawSession clip_to_play(const RawSession& session, const MatchTimeline& timeline);

/// Keeps only the samples of the five active players.
RawSession select_roster(const RawSession& session, std::span<const PlayerId> active);

/// Regular grid of complete frames: one (x, y) per active player per instant.
///
/// Frame i is at start_ms + i * grid_step. Storage is frame-major.
struct FrameSeries {
  TimestampMs grid_step = 1;
  TimestampMs start_ms = 0;
  std::vector<PlayerId> players;
  std::vector<Point> positions;
  std::vector<std::uint8_t> imputed;  // 1 where the value was forward-filled
  bool filtered = false;

  std::size_t player_count() const { return players.size(); }
  std::size_t frame_count() const {
    return players.empty() ? 0 : positions.size() / players.size();
  }
  TimestampMs time_at(std::size_t frame) const {
    return start_ms + static_cast<TimestampMs>(frame) * grid_step;
  }
  std::span<const Point> frame(std::size_t i) const {
    return std::span<const Point>(positions).subspan(i * players.size(), players.size());
  }
  std::span<Point> frame(std::size_t i) {
    return std::span<Point>(positions).subspan(i * players.size(), players.size());
  }
  std::span<const std::uint8_t> imputed_frame(std::size_t i) const {
    return std::span<const std::uint8_t>(imputed).subspan(i * players.size(), players.size());
  }
  TimestampMs end_ms() const {
    return frame_count() == 0 ? start_ms : time_at(frame_count() - 1);
  }
};

struct GridOptions {
  TimestampMs step = 1;
  /// Defaults to the earliest instant at which every player has been observed.
  std::optional<TimestampMs> start_ms;
  /// Defaults to the last sample timestamp.
  std::optional<TimestampMs> end_ms;
};

struct GridLayout {
  TimestampMs start_ms = 0;
  TimestampMs step = 1;
  std::size_t frame_count = 0;
  std::vector<PlayerId> players;
};

using FrameCallback = std::function<void(TimestampMs t, std::span<const Point> positions,
                                         std::span<const std::uint8_t> imputed)>;

/// Resolves the grid for a session without materializing frames.
GridLayout plan_grid(const RawSession& session, const GridOptions& options);

/// Streams last-observation-carried-forward frames to `on_frame`, one call per grid instant.
/// Memory is bounded by one sample per player. Returns the layout used.
GridLayout stream_frames(const RawSession& session, const GridOptions& options,
                         const FrameCallback& on_frame);

/// Materializing form of stream_frames.
FrameSeries regularize(const RawSession& session, const GridOptions& options);

/// One regular grid per timeline period, each seeded only from that period's samples.
/// Throws InputError naming the period and player when a player is absent from a period.
std::vector<FrameSeries> regularize_periods(const RawSession& session,
                                            const MatchTimeline& timeline, TimestampMs step);

/// Streaming form of regularize_periods; `on_segment` is called before each period's frames.
void stream_periods(const RawSession& session, const MatchTimeline& timeline, TimestampMs step,
                    const std::function<void(const GridLayout&)>& on_segment,
                    const FrameCallback& on_frame);

/// Flattens a frame series back into samples (one per player per instant).
RawSession frames_to_session(const FrameSeries& frames, Court court = {});

struct SessionStats {
  std::size_t total_samples = 0;
  TimestampMs first_ms = 0;
  TimestampMs last_ms = 0;
  double overall_rate_hz = 0.0;                    // samples per second over the session span
  std::map<PlayerId, double> mean_interval_ms;     // players with >= 2 samples
  std::map<PlayerId, std::size_t> samples_per_player;
  double mean_player_interval_ms = 0.0;            // average of the per-player means
};

/// Throws InputError with fewer than two samples or a zero-length span.
SessionStats session_stats(const RawSession& session);

}  // namespace courtphase
