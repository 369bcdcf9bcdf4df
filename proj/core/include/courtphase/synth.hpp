#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "courtphase/analysis.hpp"
#include "courtphase/common.hpp"
#include "courtphase/ingest.hpp"

namespace courtphase {

/// Five anchor positions (meters), one per roster slot.
struct Formation {
  std::string name;
  std::array<Point, kTeamSize> anchors{};
};

struct ScheduleSegment {
  std::size_t formation = 0;
  TimestampMs duration_ms = 0;
};

/// Synthetic match description: players hold formation anchors (with Gaussian jitter) and
/// the schedule switches formations; each player is sampled with exponential gaps.
struct Scenario {
  std::vector<Formation> formations;
  std::vector<ScheduleSegment> schedule;
  double jitter_std = 0.3;          // meters
  double sampling_mean_ms = 162.0;  // per player
  TimestampMs transition_ms = 0;    // linear move between consecutive formations
  TimestampMs grid_step = 20;       // grid used for the ground truth
  std::uint64_t seed = 1;
  std::array<PlayerId, kTeamSize> players{1, 2, 4, 5, 6};
  Court court;
  /// Empty means one PositiveX period spanning the whole schedule.
  MatchTimeline timeline;

  TimestampMs duration_ms() const;
  /// Throws ConfigError on invalid fields.
  void validate() const;
  /// The timeline actually used for generation and offense truth.
  MatchTimeline effective_timeline() const;
};

struct GroundTruth {
  TimestampMs start_ms = 0;
  TimestampMs grid_step = 1;
  std::vector<ClusterId> formation;  // per grid instant
  std::vector<Side> offense;         // per grid instant

  std::size_t size() const { return formation.size(); }
  /// Truth at an arbitrary instant inside the generated span (grid instant at or before t).
  ClusterId formation_at(TimestampMs t) const;
  Side offense_at(TimestampMs t) const;
};

struct SyntheticSession {
  RawSession session;
  GroundTruth truth;
  MatchTimeline timeline;
};

SyntheticSession generate_session(const Scenario& scenario);

/// Formation templates covering the regimes seen in real play: evenly spread, compact but
/// evenly spaced, a tight trio, and so on. Five are in the attacking half for PositiveX.
std::vector<Formation> formation_library();

/// Random schedule over all formations: segments of [min_ms, max_ms], no immediate repeats,
/// each round visiting every formation once in random order.
std::vector<ScheduleSegment> random_schedule(std::size_t formations, TimestampMs total_ms,
                                             TimestampMs min_ms, TimestampMs max_ms,
                                             std::uint64_t seed);

/// Eight-formation scenario spanning `total_ms`.
Scenario eight_formation_scenario(TimestampMs total_ms = 600'000, double jitter_std = 0.3,
                                  std::uint64_t seed = 1);

struct OptimalPartition {
  std::vector<ClusterId> labels;
  double within = 0.0;
  std::uint64_t partitions_visited = 0;
};

/// Exhaustive minimum-WD partition into at most k non-empty groups (mean centroids).
/// Refuses more than 12 points.
OptimalPartition enumerate_optimal_partition(DataView points, std::size_t k);

/// Adjusted Rand index of two labelings of the same items.
double adjusted_rand_index(std::span<const ClusterId> a, std::span<const ClusterId> b);

}  // namespace courtphase
