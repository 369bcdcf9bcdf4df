#include "courtphase/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <tuple>

namespace courtphase {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double e = a[c] - b[c];
    s += e * e;
  }
  return s;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementations so seeds reproduce across toolchains.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

// Greedy k-means++: each new centre is the best of a few D^2-weighted candidates, judged by the
// potential it leaves behind.
std::vector<double> seed_plus_plus(DataView data, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<double> centroids;
  centroids.reserve(k * d);

  std::size_t pick = uniform_index(rng, n);
  centroids.insert(centroids.end(), data.row(pick).begin(), data.row(pick).end());
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(data.row(i), data.row(pick));

  std::vector<double> candidate(n), best_nearest(n);
  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : nearest) total += v;
    if (total <= 0.0) {
      pick = uniform_index(rng, n);
      for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(data.row(i), data.row(pick)));
      centroids.insert(centroids.end(), data.row(pick).begin(), data.row(pick).end());
      continue;
    }
    double best_potential = std::numeric_limits<double>::infinity();
    std::size_t best = n - 1;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const double target = unit_uniform(rng) * total;
      double running = 0.0;
      std::size_t c = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        running += nearest[i];
        if (running > target && nearest[i] > 0.0) {
          c = i;
          break;
        }
      }
      double potential = 0.0;
      const auto row = data.row(c);
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] = std::min(nearest[i], squared_distance(data.row(i), row));
        potential += candidate[i];
      }
      if (potential < best_potential) {
        best_potential = potential;
        best = c;
        best_nearest.swap(candidate);
      }
    }
    nearest.swap(best_nearest);
    centroids.insert(centroids.end(), data.row(best).begin(), data.row(best).end());
  }
  return centroids;
}

struct LloydRun {
  std::vector<double> centroids;
  std::vector<ClusterId> labels;
  double within = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

// Nearest-centroid labels; returns squared distances through `dist2`.
void assign_into(std::span<const double> centroids, std::size_t k, DataView data,
                 std::vector<ClusterId>& labels, std::vector<double>& dist2) {
  const std::size_t d = data.cols();
  labels.resize(data.rows());
  dist2.resize(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.row(i);
    double best = std::numeric_limits<double>::infinity();
    ClusterId arg = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double dd = squared_distance(row, centroids.subspan(j * d, d));
      if (dd < best) {
        best = dd;
        arg = static_cast<ClusterId>(j);
      }
    }
    labels[i] = arg;
    dist2[i] = best;
  }
}

LloydRun lloyd(DataView data, std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::mt19937_64 rng(seed);
  LloydRun run;
  run.centroids = seed_plus_plus(data, k, rng);

  std::vector<double> dist2;
  std::vector<std::size_t> counts(k);
  std::vector<double> sums(k * d);
  for (std::size_t it = 1; it <= std::max<std::size_t>(max_iter, 1); ++it) {
    assign_into(run.centroids, k, data, run.labels, dist2);

    std::fill(counts.begin(), counts.end(), 0);
    for (ClusterId l : run.labels) ++counts[l];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      // Move the worst-fit point of a multi-member cluster into the empty one.
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[run.labels[i]] > 1 && dist2[i] > far_d) {
          far_d = dist2[i];
          far = i;
        }
      }
      --counts[run.labels[far]];
      run.labels[far] = static_cast<ClusterId>(j);
      counts[j] = 1;
      dist2[far] = 0.0;
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = data.row(i);
      double* s = &sums[run.labels[i] * d];
      for (std::size_t c = 0; c < d; ++c) s[c] += row[c];
    }
    double shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double move = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double updated = sums[j * d + c] / static_cast<double>(counts[j]);
        const double e = updated - run.centroids[j * d + c];
        move += e * e;
        run.centroids[j * d + c] = updated;
      }
      shift = std::max(shift, std::sqrt(move));
    }

    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      within += squared_distance(data.row(i),
                                 std::span<const double>(run.centroids).subspan(run.labels[i] * d, d));
    }
    run.trace.push_back(within);
    run.within = within;
    run.iterations = it;
    if (shift < tol) break;
  }
  return run;
}

}  // namespace

ClusterModel kmeans(DataView data, const KMeansOptions& options) {
  if (options.k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (options.restarts < 1) throw ConfigError("kmeans: restarts must be >= 1");
  if (data.cols() == 0) throw InputError("kmeans: data has no columns");
  if (data.rows() < options.k) {
    throw InputError("kmeans: " + std::to_string(data.rows()) + " rows is fewer than k = " +
                     std::to_string(options.k));
  }
  for (double v : data.values()) {
    if (!std::isfinite(v)) throw InputError("kmeans: non-finite feature value");
  }

  LloydRun best;
  std::size_t best_restart = 0;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    LloydRun run = lloyd(data, options.k, options.seed + r, options.max_iter, options.tol);
    if (r == 0 || run.within < best.within) {
      best = std::move(run);
      best_restart = r;
    }
  }

  ClusterModel model;
  model.k = options.k;
  model.dim = data.cols();
  model.seed = options.seed;
  model.restarts = options.restarts;
  model.best_restart = best_restart;
  model.iterations = best.iterations;
  model.within_trace = std::move(best.trace);
  model.centroids = std::move(best.centroids);
  model.labels = std::move(best.labels);
  model.deviance = deviances(data, model.labels, model.centroids, model.k);
  return model;
}

std::vector<double> cluster_means(DataView data, std::span<const ClusterId> labels, std::size_t k) {
  if (labels.size() != data.rows()) throw InputError("labels length does not match row count");
  const std::size_t d = data.cols();
  std::vector<double> means(k * d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (labels[i] >= k) throw InputError("label " + std::to_string(labels[i]) + " out of range");
    ++counts[labels[i]];
    const auto row = data.row(i);
    for (std::size_t c = 0; c < d; ++c) means[labels[i] * d + c] += row[c];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) throw InputError("cluster " + std::to_string(j) + " is empty");
    for (std::size_t c = 0; c < d; ++c) means[j * d + c] /= static_cast<double>(counts[j]);
  }
  return means;
}

Deviances deviances(DataView data, std::span<const ClusterId> labels,
                    std::span<const double> centroids, std::size_t k) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (labels.size() != n) throw InputError("deviances: labels length does not match row count");
  if (centroids.size() != k * d) throw InputError("deviances: centroid buffer has wrong size");
  if (n == 0) throw InputError("deviances: no rows");

  std::vector<double> grand(d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= k) throw InputError("deviances: label out of range");
    ++counts[labels[i]];
    const auto row = data.row(i);
    for (std::size_t c = 0; c < d; ++c) grand[c] += row[c];
  }
  for (double& g : grand) g /= static_cast<double>(n);
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) throw InputError("deviances: cluster " + std::to_string(j) + " is empty");
  }

  Deviances out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    out.total += squared_distance(row, grand);
    out.within += squared_distance(row, centroids.subspan(labels[i] * d, d));
  }
  for (std::size_t j = 0; j < k; ++j) {
    out.between += static_cast<double>(counts[j]) * squared_distance(centroids.subspan(j * d, d), grand);
  }
  return out;
}

std::vector<ClusterId> assign(std::span<const double> centroids, std::size_t k, DataView data) {
  if (k == 0 || centroids.size() != k * data.cols()) {
    throw InputError("assign: feature dimension " + std::to_string(data.cols()) +
                     " does not match centroid dimension");
  }
  std::vector<ClusterId> labels;
  std::vector<double> dist2;
  assign_into(centroids, k, data, labels, dist2);
  return labels;
}

std::vector<ClusterId> assign(const ClusterModel& model, DataView data) {
  if (model.dim != data.cols()) {
    throw InputError("assign: feature dimension " + std::to_string(data.cols()) +
                     " does not match centroid dimension " + std::to_string(model.dim));
  }
  return assign(model.centroids, model.k, data);
}

std::pair<std::size_t, bool> choose_k(std::span<const KCandidate> candidates, double min_ratio,
                                      double min_gain) {
  if (candidates.empty()) throw InputError("choose_k: no candidates");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const bool enough = candidates[i].ratio >= min_ratio;
    const bool flat = i + 1 == candidates.size() ||
                      candidates[i + 1].ratio - candidates[i].ratio < min_gain;
    if (enough && flat) return {candidates[i].k, false};
  }
  std::size_t best = 0;
  double best_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double gain = candidates[i].ratio - candidates[i - 1].ratio;
    if (gain > best_gain) {
      best_gain = gain;
      best = i;
    }
  }
  return {candidates[best].k, true};
}

KSelection select_k(DataView data, const KSelectionOptions& options) {
  if (options.k_min < 1 || options.k_min >= options.k_max) {
    throw ConfigError("select_k: need 1 <= k_min < k_max");
  }
  if (options.k_max > data.rows()) {
    throw InputError("select_k: k_max exceeds the number of rows");
  }
  KSelection out;
  out.min_ratio = options.min_ratio;
  out.min_gain = options.min_gain;
  std::vector<ClusterModel> models;
  for (std::size_t k = options.k_min; k <= options.k_max; ++k) {
    KMeansOptions km;
    km.k = k;
    km.seed = options.seed;
    km.restarts = options.restarts;
    km.max_iter = options.max_iter;
    km.tol = options.tol;
    models.push_back(kmeans(data, km));
    out.candidates.push_back({k, models.back().deviance.ratio()});
  }
  std::tie(out.chosen_k, out.fallback) = choose_k(out.candidates, options.min_ratio, options.min_gain);
  out.model = std::move(models[out.chosen_k - options.k_min]);
  return out;
}

}  // namespace courtphase
