#include "courtphase/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace courtphase {

std::vector<double> pair_vector_to_matrix(std::span<const double> pairs, std::size_t players) {
  if (pairs.size() != players * (players - 1) / 2) {
    throw InputError("pair vector length does not match player count");
  }
  std::vector<double> m(players * players, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < players; ++i) {
    for (std::size_t j = i + 1; j < players; ++j) {
      m[i * players + j] = pairs[k];
      m[j * players + i] = pairs[k];
      ++k;
    }
  }
  return m;
}

std::vector<double> global_mean_distances(const FeatureMatrix& features) {
  if (features.rows() == 0) throw InputError("global_mean_distances: no rows");
  std::vector<double> means(features.cols(), 0.0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto row = features.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) means[c] += row[c];
  }
  for (double& m : means) m /= static_cast<double>(features.rows());
  return means;
}

std::vector<ClusterSummary> summarize_clusters(const FeatureMatrix& features,
                                               std::span<const ClusterId> labels, std::size_t k) {
  if (features.rows() == 0) throw InputError("summarize_clusters: no rows");
  const std::vector<double> means = cluster_means(features.view(), labels, k);
  std::vector<std::size_t> counts(k, 0);
  for (ClusterId l : labels) ++counts[l];

  std::vector<ClusterSummary> out(k);
  const std::size_t d = features.cols();
  for (std::size_t j = 0; j < k; ++j) {
    ClusterSummary& s = out[j];
    s.cluster = static_cast<ClusterId>(j);
    s.count = counts[j];
    s.share = static_cast<double>(counts[j]) / static_cast<double>(features.rows());
    s.mean_distances.assign(means.begin() + static_cast<std::ptrdiff_t>(j * d),
                            means.begin() + static_cast<std::ptrdiff_t>((j + 1) * d));
    s.mean_distance_matrix = pair_vector_to_matrix(s.mean_distances, features.players.size());
  }
  return out;
}

MdsEmbedding classical_mds(std::span<const double> distances, std::size_t n, std::size_t dim) {
  if (n < 2) throw InputError("classical_mds: need at least 2 points");
  if (dim < 1 || dim > n) throw ConfigError("classical_mds: dimension must be in [1, n]");
  if (distances.size() != n * n) throw InputError("classical_mds: matrix must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if (distances[i * n + i] != 0.0) throw InputError("classical_mds: non-zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = distances[i * n + j];
      if (!std::isfinite(v) || v < 0.0) throw InputError("classical_mds: invalid distance");
      if (v != distances[j * n + i]) throw InputError("classical_mds: matrix is not symmetric");
    }
  }

  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd squared(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      const double v = distances[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
      squared(i, j) = v * v;
    }
  }
  // B = -1/2 J D2 J, J = I - 11'/n.
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(nn, nn) - Eigen::MatrixXd::Constant(nn, nn, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd gram = -0.5 * centering * squared * centering;
  gram = 0.5 * (gram + gram.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw Error("classical_mds: eigendecomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  MdsEmbedding out;
  out.points = n;
  out.dim = dim;
  out.coordinates.assign(n * dim, 0.0);
  const double trace = std::max(gram.trace(), 0.0);
  for (Eigen::Index i = 0; i < nn; ++i) {
    if (values(i) < -1e-6 * trace && values(i) < -1e-12) out.non_euclidean = true;
  }
  for (std::size_t a = 0; a < dim; ++a) {
    const Eigen::Index col = nn - 1 - static_cast<Eigen::Index>(a);
    const double lambda = values(col);
    out.eigenvalues.push_back(lambda);
    const double scale = std::sqrt(std::max(lambda, 0.0));

    std::size_t anchor = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(vectors(static_cast<Eigen::Index>(i), col)) >
          std::abs(vectors(static_cast<Eigen::Index>(anchor), col))) {
        anchor = i;
      }
    }
    const double sign = vectors(static_cast<Eigen::Index>(anchor), col) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      out.coordinates[i * dim + a] = sign * scale * vectors(static_cast<Eigen::Index>(i), col);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        const double e = out.coordinates[i * dim + a] - out.coordinates[j * dim + a];
        s += e * e;
      }
      out.stress_abs = std::max(out.stress_abs, std::abs(std::sqrt(s) - distances[i * n + j]));
    }
  }
  return out;
}

std::vector<double> profile_deviations(const ClusterSummary& summary,
                                       std::span<const double> global_means) {
  if (summary.mean_distances.size() != global_means.size()) {
    throw InputError("profile_deviations: pair count mismatch");
  }
  std::vector<double> out(global_means.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = summary.mean_distances[i] - global_means[i];
  return out;
}

Side classify_side(const Point& centroid, AttackDirection attack, const Court& court) {
  const double half = court.length / 2.0;
  const bool attacking = attack == AttackDirection::PositiveX ? centroid.x > half : centroid.x < half;
  return attacking ? Side::Offensive : Side::Defensive;
}

std::vector<Side> label_offense(const CentroidSeries& centroids, const MatchTimeline& timeline,
                                const Court& court) {
  if (centroids.timestamps.size() != centroids.centroids.size()) {
    throw InputError("label_offense: centroid series is inconsistent");
  }
  std::vector<Side> out;
  out.reserve(centroids.centroids.size());
  for (std::size_t i = 0; i < centroids.centroids.size(); ++i) {
    const Period* period = timeline.find(centroids.timestamps[i]);
    if (period == nullptr) {
      throw InputError("label_offense: instant " + std::to_string(centroids.timestamps[i]) +
                       " ms lies outside every timeline period");
    }
    out.push_back(classify_side(centroids.centroids[i], period->attack, court));
  }
  return out;
}

std::vector<double> offense_share(std::span<const ClusterId> labels, std::span<const Side> sides,
                                  std::size_t k) {
  if (labels.size() != sides.size()) throw InputError("offense_share: length mismatch");
  std::vector<std::size_t> total(k, 0);
  std::vector<std::size_t> offensive(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw InputError("offense_share: label out of range");
    ++total[labels[i]];
    if (sides[i] == Side::Offensive) ++offensive[labels[i]];
  }
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (total[j] == 0) throw InputError("offense_share: cluster " + std::to_string(j) + " is empty");
    out[j] = static_cast<double>(offensive[j]) / static_cast<double>(total[j]);
  }
  return out;
}

TransitionMatrix transition_matrix(std::span<const ClusterId> labels, std::size_t k,
                                   std::span<const std::size_t> segment_starts) {
  if (labels.size() < 2) throw InputError("transition_matrix: need at least 2 instants");
  if (k == 0) throw InputError("transition_matrix: k must be >= 1");
  TransitionMatrix tm;
  tm.k = k;
  tm.counts.assign(k * k, 0);
  tm.probabilities.assign(k * k, 0.0);
  tm.row_active.assign(k, 0);

  std::vector<std::uint8_t> boundary(labels.size(), 0);
  for (std::size_t s : segment_starts) {
    if (s < labels.size()) boundary[s] = 1;
  }
  for (std::size_t t = 0; t + 1 < labels.size(); ++t) {
    const ClusterId a = labels[t];
    const ClusterId b = labels[t + 1];
    if (a >= k || b >= k) throw InputError("transition_matrix: label out of range");
    if (a == b || boundary[t + 1]) continue;
    ++tm.counts[a * k + b];
    ++tm.total;
  }
  for (std::size_t a = 0; a < k; ++a) {
    std::uint64_t row = 0;
    for (std::size_t b = 0; b < k; ++b) row += tm.counts[a * k + b];
    if (row == 0) continue;
    tm.row_active[a] = 1;
    for (std::size_t b = 0; b < k; ++b) {
      tm.probabilities[a * k + b] = static_cast<double>(tm.counts[a * k + b]) / static_cast<double>(row);
    }
  }
  return tm;
}

PhaseReport build_phase_report(const FeatureMatrix& features, std::span<const ClusterId> labels,
                               std::size_t k, std::span<const Side> sides) {
  PhaseReport report;
  report.players = features.players;
  report.pairs = features.pairs;
  report.instants = features.rows();
  report.summaries = summarize_clusters(features, labels, k);
  report.global_mean_distances = global_mean_distances(features);
  if (!sides.empty()) {
    const std::vector<double> shares = offense_share(labels, sides, k);
    for (std::size_t j = 0; j < k; ++j) report.summaries[j].offense_share = shares[j];
  }
  for (const ClusterSummary& s : report.summaries) {
    report.embeddings.push_back(classical_mds(s.mean_distance_matrix, features.players.size(), 2));
    report.profiles.push_back(profile_deviations(s, report.global_mean_distances));
  }
  if (labels.size() >= 2) {
    report.transitions = transition_matrix(labels, k, features.segment_starts);
  } else {
    report.transitions.k = k;
    report.transitions.counts.assign(k * k, 0);
    report.transitions.probabilities.assign(k * k, 0.0);
    report.transitions.row_active.assign(k, 0);
  }
  return report;
}

}  // namespace courtphase
