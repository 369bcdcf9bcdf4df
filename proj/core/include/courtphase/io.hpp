#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "courtphase/analysis.hpp"
#include "courtphase/clustering.hpp"
#include "courtphase/features.hpp"
#include "courtphase/ingest.hpp"
#include "courtphase/synth.hpp"

namespace courtphase {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Writes `contents` through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Streaming write-then-rename: output goes to "<path>.tmp" until commit(). An uncommitted
/// writer removes its temporary file on destruction.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(std::filesystem::path path);
  ~AtomicFileWriter();
  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  std::ostream& stream();
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::unique_ptr<std::ofstream> out_;
  bool committed_ = false;
};

// --- frames.csv: t_ms,p<id>_x,p<id>_y,... in roster order ---

void write_frames_header(std::ostream& out, std::span<const PlayerId> players);
void write_frame_row(std::ostream& out, TimestampMs t, std::span<const Point> positions);
void write_frames_csv(std::ostream& out, std::span<const FrameSeries> segments);

/// Incremental frames.csv reader; holds one row at a time.
class FrameCsvReader {
 public:
  explicit FrameCsvReader(std::istream& in);
  const std::vector<PlayerId>& players() const { return players_; }
  /// Reads the next row; returns false at end of input.
  bool next(TimestampMs& t, std::vector<Point>& positions);

 private:
  std::istream& in_;
  std::vector<PlayerId> players_;
  std::size_t line_no_ = 0;
  std::string line_;
};

/// Tracks contiguous grid segments: a new segment starts when the step from the previous
/// instant is not exactly `grid_step`, or (with a timeline) when the timeline period changes.
class SegmentTracker {
 public:
  SegmentTracker(TimestampMs grid_step, const MatchTimeline* timeline);
  /// True when `t` opens a new segment. Throws ParseError on non-increasing time.
  bool starts_segment(TimestampMs t);

 private:
  TimestampMs step_;
  const MatchTimeline* timeline_;
  bool first_ = true;
  TimestampMs previous_ = 0;
  const Period* period_ = nullptr;
};

/// Reads frames.csv into contiguous segments (see SegmentTracker).
std::vector<FrameSeries> read_frames_csv(std::istream& in, TimestampMs grid_step,
                                         const MatchTimeline* timeline = nullptr);

// --- features.csv: t_ms,d_<i>_<j>,... ---

void write_features_header(std::ostream& out, std::span<const PlayerPair> pairs);
void write_feature_row(std::ostream& out, TimestampMs t, std::span<const double> values);
void write_features_csv(std::ostream& out, const FeatureMatrix& features);
FeatureMatrix read_features_csv(std::istream& in, TimestampMs grid_step,
                                const MatchTimeline* timeline = nullptr);

// --- labels.csv: t_ms,cluster ---

void write_labels_csv(std::ostream& out, std::span<const TimestampMs> timestamps,
                      std::span<const ClusterId> labels);
std::vector<ClusterId> read_labels_csv(std::istream& in, std::vector<TimestampMs>* timestamps = nullptr);

// --- model.txt: key/value header followed by one centroid per line ---

void write_model(std::ostream& out, const ClusterModel& model, std::span<const PlayerPair> pairs);

struct LoadedModel {
  ClusterModel model;  // labels empty; iterations and deviances as stored
  std::vector<PlayerPair> pairs;
};
LoadedModel read_model(std::istream& in);

// --- selection.csv: k,bd_td_ratio,chosen ---

void write_selection_csv(std::ostream& out, const KSelection& selection);
struct SelectionTable {
  std::vector<KCandidate> candidates;
  std::size_t chosen_k = 0;
  bool fallback = false;
};
SelectionTable read_selection_csv(std::istream& in);

// --- raw sensor records in the default ingest layout ---

void write_session_csv(std::ostream& out, const RawSession& session);
void write_truth_csv(std::ostream& out, const GroundTruth& truth);

// --- analysis tables ---

void write_summaries_csv(std::ostream& out, const PhaseReport& report);
void write_transitions_csv(std::ostream& out, const TransitionMatrix& transitions);
void write_mds_csv(std::ostream& out, const MdsEmbedding& embedding, std::span<const PlayerId> players);

}  // namespace courtphase
