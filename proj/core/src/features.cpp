#include "courtphase/features.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace courtphase {

std::vector<PlayerPair> pair_labels(std::span<const PlayerId> players) {
  std::vector<PlayerPair> out;
  for (std::size_t i = 0; i < players.size(); ++i) {
    for (std::size_t j = i + 1; j < players.size(); ++j) out.push_back({players[i], players[j]});
  }
  return out;
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t players) {
  if (i > j) std::swap(i, j);
  // Pairs before row i: sum_{r<i} (players - 1 - r).
  return i * (2 * players - i - 1) / 2 + (j - i - 1);
}

FeatureVector pairwise_distances(std::span<const Point> frame) {
  if (frame.size() != kTeamSize) {
    throw InputError("pairwise_distances: expected " + std::to_string(kTeamSize) +
                     " points, got " + std::to_string(frame.size()));
  }
  for (std::size_t i = 0; i < kTeamSize; ++i) {
    if (!std::isfinite(frame[i].x) || !std::isfinite(frame[i].y)) {
      throw InputError("pairwise_distances: non-finite coordinate for player slot " +
                       std::to_string(i));
    }
  }
  FeatureVector out{};
  std::size_t k = 0;
  for (std::size_t i = 0; i < kTeamSize; ++i) {
    for (std::size_t j = i + 1; j < kTeamSize; ++j) {
      const double dx = frame[i].x - frame[j].x;
      const double dy = frame[i].y - frame[j].y;
      out[k++] = std::sqrt(dx * dx + dy * dy);
    }
  }
  return out;
}

void FeatureMatrix::append(TimestampMs t, const FeatureVector& v) {
  timestamps.push_back(t);
  values.insert(values.end(), v.begin(), v.end());
}

FeatureMatrix make_feature_matrix(std::span<const PlayerId> players) {
  if (players.size() != kTeamSize) {
    throw InputError("feature matrix needs exactly " + std::to_string(kTeamSize) +
                     " players, got " + std::to_string(players.size()));
  }
  FeatureMatrix m;
  m.players.assign(players.begin(), players.end());
  m.pairs = pair_labels(players);
  return m;
}

FeatureMatrix build_feature_matrix(const FrameSeries& frames) {
  return build_feature_matrix(std::span<const FrameSeries>(&frames, 1));
}

FeatureMatrix build_feature_matrix(std::span<const FrameSeries> segments) {
  if (segments.empty()) throw InputError("build_feature_matrix: no frames");
  FeatureMatrix m = make_feature_matrix(segments.front().players);
  for (const FrameSeries& frames : segments) {
    if (frames.players != m.players) {
      throw InputError("build_feature_matrix: segments disagree on the roster");
    }
    m.segment_starts.push_back(m.rows());
    const std::size_t n = frames.frame_count();
    m.timestamps.reserve(m.rows() + n);
    m.values.reserve(m.values.size() + n * kPairCount);
    for (std::size_t i = 0; i < n; ++i) m.append(frames.time_at(i), pairwise_distances(frames.frame(i)));
  }
  return m;
}

void standardize_columns(FeatureMatrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n == 0) return;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += features.values[i * d + c];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = features.values[i * d + c] - mean;
      var += e * e;
    }
    var /= static_cast<double>(n);
    const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = features.values[i * d + c];
      v = (v - mean) * scale;
    }
  }
}

Point frame_centroid(std::span<const Point> frame) {
  if (frame.empty()) throw InputError("frame_centroid: empty frame");
  double sx = 0.0;
  double sy = 0.0;
  for (const Point& p : frame) {
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(frame.size());
  return {sx / n, sy / n};
}

CentroidSeries centroid_series(const FrameSeries& frames) {
  return centroid_series(std::span<const FrameSeries>(&frames, 1));
}

CentroidSeries centroid_series(std::span<const FrameSeries> segments) {
  CentroidSeries out;
  for (const FrameSeries& frames : segments) {
    if (frames.player_count() == 0) throw InputError("centroid_series: frames have no players");
    for (std::size_t i = 0; i < frames.frame_count(); ++i) {
      out.timestamps.push_back(frames.time_at(i));
      out.centroids.push_back(frame_centroid(frames.frame(i)));
    }
  }
  return out;
}

}  // namespace courtphase
