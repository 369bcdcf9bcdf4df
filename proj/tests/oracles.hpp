#pragma once
// Brute-force reference implementations used to check the library. Deliberately naive and
// written without calling the code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "courtphase/common.hpp"
#include "courtphase/ingest.hpp"

namespace oracle {

using courtphase::ClusterId;
using courtphase::PlayerId;
using courtphase::Point;
using courtphase::PositionSample;
using courtphase::TimestampMs;

// Scan-back LOCF: for every instant and player, search all samples for the latest one at or
// before the instant (later input rows win on equal timestamps).
inline std::vector<Point> locf(const std::vector<PositionSample>& samples, const std::vector<PlayerId>& players,
                               TimestampMs start, TimestampMs step, std::size_t frames) {
  std::vector<Point> out;
  for (std::size_t f = 0; f < frames; ++f) {
    const TimestampMs t = start + static_cast<TimestampMs>(f) * step;
    for (PlayerId p : players) {
      std::optional<PositionSample> best;
      for (const PositionSample& s : samples) {
        if (s.player != p || s.timestamp > t) continue;
        if (!best || s.timestamp >= best->timestamp) best = s;
      }
      out.push_back(best ? Point{best->x, best->y} : Point{std::nan(""), std::nan("")});
    }
  }
  return out;
}

inline double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Double loop over i < j.
inline std::vector<double> pair_distances(const std::vector<Point>& frame) {
  std::vector<double> out;
  for (std::size_t i = 0; i < frame.size(); ++i)
    for (std::size_t j = i + 1; j < frame.size(); ++j) out.push_back(dist(frame[i], frame[j]));
  return out;
}

struct Dev {
  double wd = 0, bd = 0, td = 0;
};

// Direct summation: TD around the grand mean, WD around group means, BD weighted by group size.
inline Dev deviances(const std::vector<std::vector<double>>& rows, const std::vector<ClusterId>& labels) {
  const std::size_t d = rows.front().size();
  std::vector<double> grand(d, 0.0);
  std::map<ClusterId, std::vector<double>> sums;
  std::map<ClusterId, double> counts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& s = sums[labels[i]];
    s.resize(d, 0.0);
    counts[labels[i]] += 1;
    for (std::size_t c = 0; c < d; ++c) {
      grand[c] += rows[i][c];
      s[c] += rows[i][c];
    }
  }
  for (double& g : grand) g /= static_cast<double>(rows.size());
  for (auto& [k, s] : sums)
    for (double& v : s) v /= counts[k];
  Dev out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      out.td += (rows[i][c] - grand[c]) * (rows[i][c] - grand[c]);
      const double m = sums[labels[i]][c];
      out.wd += (rows[i][c] - m) * (rows[i][c] - m);
    }
  }
  for (auto& [k, s] : sums)
    for (std::size_t c = 0; c < d; ++c) out.bd += counts[k] * (s[c] - grand[c]) * (s[c] - grand[c]);
  return out;
}

// Recursive enumeration: each point joins an existing block or opens a new one.
inline double optimal_wd(const std::vector<std::vector<double>>& rows, std::size_t k) {
  std::vector<ClusterId> labels(rows.size());
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == rows.size()) {
      best = std::min(best, deviances(rows, labels).wd);
      return;
    }
    for (std::size_t b = 0; b < used; ++b) {
      labels[i] = static_cast<ClusterId>(b);
      rec(i + 1, used);
    }
    if (used < k) {
      labels[i] = static_cast<ClusterId>(used);
      rec(i + 1, used + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Adjacent-pair counting over a map.
inline std::map<std::pair<ClusterId, ClusterId>, std::uint64_t> switches(const std::vector<ClusterId>& labels) {
  std::map<std::pair<ClusterId, ClusterId>, std::uint64_t> out;
  for (std::size_t i = 0; i + 1 < labels.size(); ++i)
    if (labels[i] != labels[i + 1]) ++out[{labels[i], labels[i + 1]}];
  return out;
}

// Pair-counting ARI, O(n^2).
inline double ari(const std::vector<ClusterId>& a, const std::vector<ClusterId>& b) {
  double both = 0, only_a = 0, only_b = 0, neither = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) both += 1;
      else if (sa) only_a += 1;
      else if (sb) only_b += 1;
      else neither += 1;
    }
  }
  const double n = both + only_a + only_b + neither;
  const double expected = (both + only_a) * (both + only_b) / n;
  const double max_index = 0.5 * ((both + only_a) + (both + only_b));
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

// Textbook Kalman step with explicit 2x2 arithmetic and the simple (I - KH) P update.
struct Kalman2 {
  double q, r, v0, dt;
  double x = 0, v = 0, p00 = 0, p01 = 0, p10 = 0, p11 = 0;
  bool started = false;

  double step(double z) {
    if (!started) {
      started = true;
      x = z;
      v = 0;
      p00 = r;
      p01 = p10 = 0;
      p11 = v0;
      return x;
    }
    // F = [[1, dt], [0, 1]]
    const double xp = x + dt * v;
    const double a00 = p00 + dt * p10, a01 = p01 + dt * p11;
    const double a10 = p10, a11 = p11;
    double m00 = a00 + a01 * dt, m01 = a01, m10 = a10 + a11 * dt, m11 = a11;
    m00 += q * dt * dt * dt * dt / 4;
    m01 += q * dt * dt * dt / 2;
    m10 += q * dt * dt * dt / 2;
    m11 += q * dt * dt;
    const double s = m00 + r;
    const double k0 = m00 / s, k1 = m10 / s;
    const double y = z - xp;
    x = xp + k0 * y;
    v = v + k1 * y;
    p00 = (1 - k0) * m00;
    p01 = (1 - k0) * m01;
    p10 = m10 - k1 * m00;
    p11 = m11 - k1 * m01;
    return x;
  }
};

// Closed-form 2-D orthogonal Procrustes (rotation or reflection) after centering both sets.
// Returns the root of the summed squared residual.
inline double procrustes_2d(const std::vector<Point>& from, const std::vector<Point>& to) {
  auto centered = [](std::vector<Point> p) {
    double mx = 0, my = 0;
    for (auto& q : p) mx += q.x, my += q.y;
    mx /= static_cast<double>(p.size());
    my /= static_cast<double>(p.size());
    for (auto& q : p) q.x -= mx, q.y -= my;
    return p;
  };
  const auto a = centered(from), b = centered(to);
  double best = std::numeric_limits<double>::infinity();
  for (int reflect = 0; reflect < 2; ++reflect) {
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double ax = a[i].x, ay = reflect ? -a[i].y : a[i].y;
      sxx += ax * b[i].x + ay * b[i].y;
      sxy += ax * b[i].y - ay * b[i].x;
    }
    const double th = std::atan2(sxy, sxx);
    const double c = std::cos(th), s = std::sin(th);
    double res = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double ax = a[i].x, ay = reflect ? -a[i].y : a[i].y;
      const double rx = c * ax - s * ay, ry = s * ax + c * ay;
      res += (rx - b[i].x) * (rx - b[i].x) + (ry - b[i].y) * (ry - b[i].y);
    }
    best = std::min(best, std::sqrt(res));
  }
  return best;
}

// Random sparse session: each player gets a handful of samples at random times.
inline std::vector<PositionSample> sparse_samples(std::mt19937_64& rng, const std::vector<PlayerId>& players,
                                                  TimestampMs span, std::size_t max_per_player) {
  std::uniform_int_distribution<TimestampMs> t(0, span);
  std::uniform_int_distribution<std::size_t> count(1, max_per_player);
  std::uniform_real_distribution<double> pos(0.0, 28.0);
  std::vector<PositionSample> out;
  for (PlayerId p : players) {
    out.push_back({0, p, pos(rng), pos(rng), 0.0});
    const std::size_t c = count(rng);
    for (std::size_t i = 0; i < c; ++i) out.push_back({t(rng), p, pos(rng), pos(rng), 0.0});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace oracle
