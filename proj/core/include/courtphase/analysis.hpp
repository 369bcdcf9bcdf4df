#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "courtphase/clustering.hpp"
#include "courtphase/common.hpp"
#include "courtphase/features.hpp"
#include "courtphase/ingest.hpp"

namespace courtphase {

struct ClusterSummary {
  ClusterId cluster = 0;
  std::size_t count = 0;
  double share = 0.0;
  std::vector<double> mean_distances;        // one per pair, meters
  std::vector<double> mean_distance_matrix;  // players x players, symmetric, zero diagonal
  std::optional<double> offense_share;
};

/// Per-cluster shares and mean pairwise distances. Throws InputError on an empty cluster.
std::vector<ClusterSummary> summarize_clusters(const FeatureMatrix& features,
                                               std::span<const ClusterId> labels, std::size_t k);

/// Column means over all instants.
std::vector<double> global_mean_distances(const FeatureMatrix& features);

/// Expands a pair vector into a symmetric players x players matrix with zero diagonal.
std::vector<double> pair_vector_to_matrix(std::span<const double> pairs, std::size_t players);

struct MdsEmbedding {
  std::size_t points = 0;
  std::size_t dim = 0;
  std::vector<double> coordinates;  // points x dim, row-major
  std::vector<double> eigenvalues;  // retained, descending (before clamping)
  double stress_abs = 0.0;          // max |embedded distance - input distance|
  bool non_euclidean = false;       // a negative eigenvalue below -1e-6 * trace(B)
};

/// Torgerson scaling of an n x n distance matrix (row-major). Each output axis is the
/// eigenvector of the double-centered Gram matrix scaled by the square root of its
/// (non-negative clamped) eigenvalue, signed so its largest-magnitude entry is positive.
MdsEmbedding classical_mds(std::span<const double> distances, std::size_t n, std::size_t dim = 2);

/// cluster mean - global mean per pair. Negative entries mean the pair is tighter than usual.
std::vector<double> profile_deviations(const ClusterSummary& summary,
                                       std::span<const double> global_means);

enum class Side : std::uint8_t { Defensive = 0, Offensive = 1 };

/// Offensive iff the team centroid is strictly inside the attacking half for its period.
Side classify_side(const Point& centroid, AttackDirection attack, const Court& court);

/// Throws InputError for an instant outside every timeline period.
std::vector<Side> label_offense(const CentroidSeries& centroids, const MatchTimeline& timeline,
                                const Court& court);

/// Fraction of each cluster's instants flagged Offensive.
std::vector<double> offense_share(std::span<const ClusterId> labels, std::span<const Side> sides,
                                  std::size_t k);

/// Counts of cluster switches between consecutive instants (diagonal always zero).
struct TransitionMatrix {
  std::size_t k = 0;
  std::vector<std::uint64_t> counts;     // k x k
  std::vector<double> probabilities;     // row-normalized; all-zero rows stay zero
  std::vector<std::uint8_t> row_active;  // 1 where the row has at least one switch
  std::uint64_t total = 0;

  std::uint64_t count(std::size_t from, std::size_t to) const { return counts[from * k + to]; }
  double probability(std::size_t from, std::size_t to) const { return probabilities[from * k + to]; }
};

/// Pairs (t, t+1) with different labels are counted. Pairs that straddle a segment start in
/// `segment_starts` are skipped.
TransitionMatrix transition_matrix(std::span<const ClusterId> labels, std::size_t k,
                                   std::span<const std::size_t> segment_starts = {});

struct PhaseReport {
  std::vector<PlayerId> players;
  std::vector<PlayerPair> pairs;
  std::vector<ClusterSummary> summaries;
  std::vector<MdsEmbedding> embeddings;
  std::vector<std::vector<double>> profiles;
  TransitionMatrix transitions;
  std::vector<double> global_mean_distances;
  std::size_t instants = 0;
};

/// Builds the full per-cluster characterization. When `sides` is non-empty it must have one
/// entry per feature row and offense shares are filled in.
PhaseReport build_phase_report(const FeatureMatrix& features, std::span<const ClusterId> labels,
                               std::size_t k, std::span<const Side> sides = {});

}  // namespace courtphase
