#pragma once

#include <array>
#include <span>
#include <vector>

#include "courtphase/common.hpp"
#include "courtphase/ingest.hpp"

namespace courtphase {

/// The 10 pairwise distances of one instant, in lexicographic (i < j) roster order.
using FeatureVector = std::array<double, kPairCount>;

struct PlayerPair {
  PlayerId first = 0;
  PlayerId second = 0;
  friend bool operator==(const PlayerPair&, const PlayerPair&) = default;
};

/// (players[0],players[1]), (players[0],players[2]), ..., (players[3],players[4]).
std::vector<PlayerPair> pair_labels(std::span<const PlayerId> players);

/// Index of roster slots (i, j), i < j, within a FeatureVector.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t players = kTeamSize);

/// Throws InputError unless given exactly five finite points.
FeatureVector pairwise_distances(std::span<const Point> frame);

/// One FeatureVector per instant, row-major.
struct FeatureMatrix {
  std::vector<PlayerId> players;
  std::vector<PlayerPair> pairs;
  std::vector<TimestampMs> timestamps;
  std::vector<double> values;
  /// Row indices at which a new contiguous grid segment begins (always starts with 0).
  std::vector<std::size_t> segment_starts;

  std::size_t rows() const { return timestamps.size(); }
  std::size_t cols() const { return pairs.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * cols(), cols());
  }
  DataView view() const { return DataView(values, rows(), cols()); }

  void append(TimestampMs t, const FeatureVector& v);
};

/// Empty matrix with roster and pair labels set.
FeatureMatrix make_feature_matrix(std::span<const PlayerId> players);

FeatureMatrix build_feature_matrix(const FrameSeries& frames);
/// Concatenates several segments; segment_starts records the boundaries.
FeatureMatrix build_feature_matrix(std::span<const FrameSeries> segments);

/// Rescales each column to zero mean and unit variance (constant columns are only centered).
void standardize_columns(FeatureMatrix& features);

struct CentroidSeries {
  std::vector<TimestampMs> timestamps;
  std::vector<Point> centroids;
};

Point frame_centroid(std::span<const Point> frame);
CentroidSeries centroid_series(const FrameSeries& frames);
CentroidSeries centroid_series(std::span<const FrameSeries> segments);

}  // namespace courtphase
