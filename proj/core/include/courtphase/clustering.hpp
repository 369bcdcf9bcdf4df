#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "courtphase/common.hpp"

namespace courtphase {

struct KMeansOptions {
  std::size_t k = 8;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  /// Converged once the largest centroid shift (Euclidean) drops below tol.
  double tol = 1e-8;
};

/// Within (WD), between (BD) and total (TD) deviance, in squared feature units.
struct Deviances {
  double within = 0.0;
  double between = 0.0;
  double total = 0.0;

  /// BD / TD, or 0 when TD is 0.
  double ratio() const { return total > 0.0 ? between / total : 0.0; }
};

struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k x dim, row-major
  std::vector<ClusterId> labels;
  Deviances deviance;
  std::size_t iterations = 0;     // Lloyd iterations of the winning restart
  std::size_t best_restart = 0;
  std::uint64_t seed = 0;
  std::size_t restarts = 0;
  /// WD (with mean centroids) after each iteration of the winning restart.
  std::vector<double> within_trace;

  std::span<const double> centroid(std::size_t j) const {
    return std::span<const double>(centroids).subspan(j * dim, dim);
  }
};

/// Lloyd's k-means with k-means++ seeding. Restart r draws from a generator seeded with
/// seed + r; the restart with the smallest WD wins (earliest on ties). Empty clusters are
/// reseeded with the point farthest from its assigned centroid.
ClusterModel kmeans(DataView data, const KMeansOptions& options);

/// Deviance decomposition for a labeling and arbitrary centroids. Throws InputError when a
/// cluster has no members or labels are out of range.
Deviances deviances(DataView data, std::span<const ClusterId> labels,
                    std::span<const double> centroids, std::size_t k);

/// Per-cluster means of a labeling (k x cols). Throws InputError on empty clusters.
std::vector<double> cluster_means(DataView data, std::span<const ClusterId> labels, std::size_t k);

/// Nearest centroid by squared Euclidean distance; ties go to the lowest index.
std::vector<ClusterId> assign(const ClusterModel& model, DataView data);
std::vector<ClusterId> assign(std::span<const double> centroids, std::size_t k, DataView data);

struct KCandidate {
  std::size_t k = 0;
  double ratio = 0.0;
};

struct KSelectionOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  double min_ratio = 0.5;
  double min_gain = 0.03;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-8;
};

struct KSelection {
  std::vector<KCandidate> candidates;  // ascending k
  std::size_t chosen_k = 0;
  double min_ratio = 0.0;
  double min_gain = 0.0;
  bool fallback = false;  // no k met the rule; chosen_k is the largest-gain k
  ClusterModel model;     // fit for chosen_k
};

/// Elbow rule: smallest k with ratio(k) >= min_ratio and ratio(k+1) - ratio(k) < min_gain
/// (the gain clause is vacuous at k_max).
KSelection select_k(DataView data, const KSelectionOptions& options);

/// Applies the elbow rule to precomputed candidates. Returns (chosen_k, fallback).
std::pair<std::size_t, bool> choose_k(std::span<const KCandidate> candidates, double min_ratio,
                                      double min_gain);

}  // namespace courtphase
