#include "courtphase/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

namespace courtphase {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Hand-rolled variates so a seed yields the same session with any standard library.
class Variates {
 public:
  explicit Variates(std::uint64_t seed) : rng_(splitmix64(seed)) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct ScheduleIndex {
  std::vector<TimestampMs> starts;  // segment start times
  const Scenario* scenario = nullptr;

  explicit ScheduleIndex(const Scenario& s) : scenario(&s) {
    TimestampMs t = 0;
    for (const auto& seg : s.schedule) {
      starts.push_back(t);
      t += seg.duration_ms;
    }
  }

  std::size_t segment_at(TimestampMs t) const {
    const auto it = std::upper_bound(starts.begin(), starts.end(), t);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - starts.begin() - 1, 0));
  }

  // Noise-free position of a roster slot at t, moving linearly for transition_ms after a switch.
  Point anchor(std::size_t slot, TimestampMs t) const {
    const std::size_t seg = segment_at(t);
    const Point target = scenario->formations[scenario->schedule[seg].formation].anchors[slot];
    const TimestampMs since = t - starts[seg];
    if (seg == 0 || scenario->transition_ms <= 0 || since >= scenario->transition_ms) return target;
    const Point from = scenario->formations[scenario->schedule[seg - 1].formation].anchors[slot];
    const double w = static_cast<double>(since) / static_cast<double>(scenario->transition_ms);
    return {from.x + w * (target.x - from.x), from.y + w * (target.y - from.y)};
  }
};

}  // namespace

TimestampMs Scenario::duration_ms() const {
  TimestampMs total = 0;
  for (const auto& seg : schedule) total += seg.duration_ms;
  return total;
}

void Scenario::validate() const {
  if (formations.empty()) throw ConfigError("scenario: no formations");
  if (schedule.empty()) throw ConfigError("scenario: empty schedule");
  if (!(jitter_std >= 0.0)) throw ConfigError("scenario: jitter_std must be >= 0");
  if (!(sampling_mean_ms > 0.0)) throw ConfigError("scenario: sampling_mean_ms must be > 0");
  if (grid_step < 1) throw ConfigError("scenario: grid step must be >= 1 ms");
  if (transition_ms < 0) throw ConfigError("scenario: transition_ms must be >= 0");
  for (const auto& seg : schedule) {
    if (seg.duration_ms <= 0) throw ConfigError("scenario: segment durations must be > 0");
    if (seg.formation >= formations.size()) {
      throw ConfigError("scenario: schedule references unknown formation " +
                        std::to_string(seg.formation));
    }
  }
  for (const auto& f : formations) {
    for (const Point& p : f.anchors) {
      if (!(p.x >= 0.0 && p.x <= court.length && p.y >= 0.0 && p.y <= court.width)) {
        throw ConfigError("scenario: formation '" + f.name + "' has an anchor outside the court");
      }
    }
  }
  std::vector<PlayerId> ids(players.begin(), players.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ConfigError("scenario: player ids must be distinct");
  }
}

MatchTimeline Scenario::effective_timeline() const {
  if (!timeline.empty()) return timeline;
  return MatchTimeline({Period{0, duration_ms(), AttackDirection::PositiveX}});
}

ClusterId GroundTruth::formation_at(TimestampMs t) const {
  if (formation.empty() || t < start_ms) throw InputError("ground truth: instant before start");
  const auto i = std::min(formation.size() - 1, static_cast<std::size_t>((t - start_ms) / grid_step));
  return formation[i];
}

Side GroundTruth::offense_at(TimestampMs t) const {
  if (offense.empty() || t < start_ms) throw InputError("ground truth: instant before start");
  const auto i = std::min(offense.size() - 1, static_cast<std::size_t>((t - start_ms) / grid_step));
  return offense[i];
}

SyntheticSession generate_session(const Scenario& scenario) {
  scenario.validate();
  const ScheduleIndex index(scenario);
  const TimestampMs total = scenario.duration_ms();

  SyntheticSession out;
  out.timeline = scenario.effective_timeline();

  std::vector<PositionSample> samples;
  for (std::size_t slot = 0; slot < kTeamSize; ++slot) {
    Variates v(scenario.seed * 0x100000001B3ull + slot);
    TimestampMs t = 0;
    while (t < total) {
      const Point a = index.anchor(slot, t);
      PositionSample s;
      s.timestamp = t;
      s.player = scenario.players[slot];
      s.x = a.x + scenario.jitter_std * v.normal();
      s.y = a.y + scenario.jitter_std * v.normal();
      samples.push_back(s);
      const double gap = std::round(v.exponential(scenario.sampling_mean_ms));
      t += std::max<TimestampMs>(1, static_cast<TimestampMs>(gap));
    }
  }
  out.session = make_session(std::move(samples), scenario.court);

  GroundTruth& truth = out.truth;
  truth.start_ms = 0;
  truth.grid_step = scenario.grid_step;
  for (TimestampMs t = 0; t < total; t += scenario.grid_step) {
    const std::size_t seg = index.segment_at(t);
    truth.formation.push_back(static_cast<ClusterId>(scenario.schedule[seg].formation));
    std::array<Point, kTeamSize> anchors{};
    for (std::size_t slot = 0; slot < kTeamSize; ++slot) anchors[slot] = index.anchor(slot, t);
    const Point centroid = frame_centroid(anchors);
    const Period* period = out.timeline.find(t);
    truth.offense.push_back(period ? classify_side(centroid, period->attack, scenario.court)
                                   : Side::Defensive);
  }
  return out;
}

std::vector<Formation> formation_library() {
  return {
      {"spread", {{{15, 2}, {15, 13}, {21, 7.5}, {26, 2}, {26, 13}}}},
      {"three_tight_a", {{{22, 7}, {16, 2}, {16, 13}, {23, 8.5}, {21.5, 8.8}}}},
      {"arc", {{{19, 1}, {17, 5}, {17, 10}, {19, 14}, {24, 7.5}}}},
      {"three_tight_b", {{{22, 6}, {23, 7.5}, {16, 12}, {26, 13}, {21.5, 7.8}}}},
      {"line", {{{15, 7.5}, {18, 7.5}, {21, 7.5}, {24, 7.5}, {27, 7.5}}}},
      {"compact_spread", {{{5, 7.5}, {7.4, 9.3}, {6.5, 11.5}, {3.5, 11.5}, {2.6, 9.3}}}},
      {"zone", {{{8, 5}, {8, 10}, {3, 3}, {3, 7.5}, {3, 12}}}},
      {"three_tight_c", {{{12, 2}, {6, 7}, {5, 8.5}, {6.5, 8.8}, {12, 13}}}},
  };
}

std::vector<ScheduleSegment> random_schedule(std::size_t formations, TimestampMs total_ms,
                                             TimestampMs min_ms, TimestampMs max_ms,
                                             std::uint64_t seed) {
  if (formations == 0 || total_ms <= 0 || min_ms <= 0 || max_ms < min_ms) {
    throw ConfigError("random_schedule: invalid arguments");
  }
  Variates v(seed ^ 0x5CED0u);
  std::vector<ScheduleSegment> out;
  std::vector<std::size_t> round(formations);
  TimestampMs t = 0;
  std::size_t previous = formations;
  while (t < total_ms) {
    std::iota(round.begin(), round.end(), 0);
    for (std::size_t i = formations; i > 1; --i) std::swap(round[i - 1], round[v.index(i)]);
    if (formations > 1 && round.front() == previous) std::swap(round.front(), round.back());
    for (std::size_t f : round) {
      if (t >= total_ms) break;
      TimestampMs d = min_ms + static_cast<TimestampMs>(v.index(static_cast<std::size_t>(max_ms - min_ms + 1)));
      d = std::min(d, total_ms - t);
      out.push_back({f, d});
      t += d;
      previous = f;
    }
  }
  return out;
}

Scenario eight_formation_scenario(TimestampMs total_ms, double jitter_std, std::uint64_t seed) {
  Scenario s;
  s.formations = formation_library();
  s.schedule = random_schedule(s.formations.size(), total_ms, 4'000, 12'000, seed);
  s.jitter_std = jitter_std;
  s.seed = seed;
  return s;
}

OptimalPartition enumerate_optimal_partition(DataView points, std::size_t k) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n > 12) throw InputError("enumerate_optimal_partition: refusing more than 12 points");
  if (k < 1) throw ConfigError("enumerate_optimal_partition: k must be >= 1");
  OptimalPartition best;
  best.within = std::numeric_limits<double>::infinity();
  if (n == 0) {
    best.within = 0.0;
    return best;
  }

  std::vector<ClusterId> labels(n, 0);
  std::vector<std::size_t> counts(k, 0);
  std::vector<double> sums(k * d, 0.0);
  std::vector<double> sumsq(k, 0.0);

  auto score = [&](std::size_t blocks) {
    double wd = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      double norm = 0.0;
      for (std::size_t c = 0; c < d; ++c) norm += sums[b * d + c] * sums[b * d + c];
      wd += sumsq[b] - norm / static_cast<double>(counts[b]);
    }
    return wd;
  };

  // Restricted-growth strings: point i joins an existing block or opens block `blocks`.
  auto recurse = [&](auto&& self, std::size_t i, std::size_t blocks) -> void {
    if (i == n) {
      ++best.partitions_visited;
      const double wd = score(blocks);
      if (wd < best.within) {
        best.within = wd;
        best.labels = labels;
      }
      return;
    }
    const auto row = points.row(i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const std::size_t limit = std::min(blocks + 1, k);
    for (std::size_t b = 0; b < limit; ++b) {
      labels[i] = static_cast<ClusterId>(b);
      ++counts[b];
      sumsq[b] += sq;
      for (std::size_t c = 0; c < d; ++c) sums[b * d + c] += row[c];
      self(self, i + 1, std::max(blocks, b + 1));
      --counts[b];
      sumsq[b] -= sq;
      for (std::size_t c = 0; c < d; ++c) sums[b * d + c] -= row[c];
    }
  };
  recurse(recurse, 0, 0);

  // Report WD by direct summation around the block means.
  const std::size_t used = *std::max_element(best.labels.begin(), best.labels.end()) + 1;
  std::vector<double> means(used * d, 0.0);
  std::vector<std::size_t> sizes(used, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++sizes[best.labels[i]];
    for (std::size_t c = 0; c < d; ++c) means[best.labels[i] * d + c] += points(i, c);
  }
  for (std::size_t b = 0; b < used; ++b) {
    for (std::size_t c = 0; c < d; ++c) means[b * d + c] /= static_cast<double>(sizes[b]);
  }
  double wd = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const double e = points(i, c) - means[best.labels[i] * d + c];
      wd += e * e;
    }
  }
  best.within = wd;
  return best;
}

double adjusted_rand_index(std::span<const ClusterId> a, std::span<const ClusterId> b) {
  if (a.size() != b.size()) throw InputError("adjusted_rand_index: length mismatch");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<ClusterId, ClusterId>, double> joint;
  std::map<ClusterId, double> rows;
  std::map<ClusterId, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [key, c] : joint) index += choose2(c);
  double sum_a = 0.0;
  for (const auto& [key, c] : rows) sum_a += choose2(c);
  double sum_b = 0.0;
  for (const auto& [key, c] : cols) sum_b += choose2(c);
  const double expected = sum_a * sum_b / choose2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace courtphase
