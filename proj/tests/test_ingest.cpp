#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "courtphase/ingest.hpp"
#include "oracles.hpp"

using namespace courtphase;

namespace {

RawSession session_of(std::vector<PositionSample> s) { return make_session(std::move(s)); }

const std::vector<PlayerId> kFive{1, 2, 4, 5, 6};

}  // namespace

TEST_CASE("parse_records maps fields directly") {
  std::istringstream in("5,2,3.0,4.0,0.1\n");
  const RawSession s = parse_records(in);
  REQUIRE(s.samples.size() == 1);
  CHECK(s.samples[0] == PositionSample{5, 2, 3.0, 4.0, 0.1});
  CHECK(s.roster == std::vector<PlayerId>{2});
}

TEST_CASE("parse_records on an empty stream") {
  std::istringstream in("");
  const RawSession s = parse_records(in);
  CHECK(s.samples.empty());
  CHECK(s.roster.empty());
}

TEST_CASE("parse_records keeps every well-formed line of a full session") {
  // 133,662 lines spread over six players, as in the recorded match.
  constexpr std::size_t kLines = 133'662;
  std::ostringstream text;
  for (std::size_t i = 0; i < kLines; ++i) {
    text << (i / 6) * 27 << ',' << (i % 6) + 1 << ',' << (i % 28) << ".5," << (i % 15) << ".25,0\n";
  }
  std::istringstream in(text.str());
  ParseDiagnostics diag;
  const RawSession s = parse_records(in, RecordFormat{}, diag);
  CHECK(s.samples.size() == kLines);
  CHECK(s.roster.size() == 6);
  CHECK(diag.parsed == kLines);
  CHECK(diag.rejected == 0);
}

TEST_CASE("parse_records header, names, scale and rejects") {
  std::istringstream in(
      "ts;pid;px;py;pz\n"
      "10;1;100;200;0\n"
      "oops;1;1;1;1\n"
      "0;2;50;50;0\n"
      "20;1;nan;1;0\n");
  RecordFormat f;
  f.delimiter = ';';
  f.columns = {"ts", "pid", "px", "py", "pz"};
  f.scale = 0.01;
  ParseDiagnostics diag;
  const RawSession s = parse_records(in, f, diag);
  REQUIRE(s.samples.size() == 2);
  CHECK(s.samples[0].timestamp == 0);  // sorted
  CHECK(s.samples[1].x == doctest::Approx(1.0));
  CHECK(diag.rejected == 2);
  CHECK(diag.out_of_order == 1);

  std::istringstream bad("x\ny\nz\n");
  RecordFormat strict;
  strict.header = HeaderMode::Absent;
  strict.max_rejects = 2;
  CHECK_THROWS_AS(parse_records(bad, strict), ParseError);
}

TEST_CASE("duplicate (player, timestamp) keeps the last record") {
  std::istringstream in("0,1,1,1,0\n0,1,2,2,0\n0,2,3,3,0\n");
  ParseDiagnostics diag;
  const RawSession s = parse_records(in, RecordFormat{}, diag);
  REQUIRE(s.samples.size() == 2);
  CHECK(s.samples[0].x == 2.0);
  CHECK(diag.duplicates == 1);
}

TEST_CASE("clip_to_play interval membership") {
  const RawSession s = session_of({{10, 1, 0, 0, 0}, {50, 1, 1, 1, 0}, {90, 1, 2, 2, 0}});
  const MatchTimeline tl({{40, 80, AttackDirection::PositiveX}});
  const RawSession c = clip_to_play(s, tl);
  REQUIRE(c.samples.size() == 1);
  CHECK(c.samples[0].timestamp == 50);

  const MatchTimeline all({{0, 1000, AttackDirection::PositiveX}});
  CHECK(clip_to_play(s, all).samples == s.samples);
}

TEST_CASE("clip_to_play equals a membership filter") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<TimestampMs> t(0, 10'000);
  std::vector<PositionSample> raw;
  for (int i = 0; i < 1000; ++i) raw.push_back({t(rng), 1 + i % 5, 0.5 * i, 1.0, 0.0});
  const RawSession s = session_of(raw);
  std::vector<TimestampMs> cuts{t(rng), t(rng), t(rng), t(rng), t(rng), t(rng)};
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Period> periods;
  for (std::size_t i = 0; i + 1 < cuts.size() && periods.size() < 3; i += 2) {
    periods.push_back({cuts[i], cuts[i + 1], AttackDirection::PositiveX});
  }
  REQUIRE(!periods.empty());
  const MatchTimeline tl(periods);
  std::vector<PositionSample> expected;
  for (const auto& p : s.samples) {
    for (const auto& per : periods) {
      if (p.timestamp >= per.start_ms && p.timestamp < per.end_ms) {
        expected.push_back(p);
        break;
      }
    }
  }
  if (expected.empty()) {
    CHECK_THROWS_AS(clip_to_play(s, tl), InputError);
  } else {
    CHECK(clip_to_play(s, tl).samples == expected);
  }
}

TEST_CASE("timeline validation") {
  CHECK_THROWS(MatchTimeline({{0, 10, AttackDirection::PositiveX}, {5, 20, AttackDirection::NegativeX}}));
  CHECK_THROWS(MatchTimeline({{10, 10, AttackDirection::PositiveX}}));
  CHECK_THROWS(MatchTimeline({{20, 30, AttackDirection::PositiveX}, {0, 10, AttackDirection::PositiveX}}));
  const MatchTimeline tl({{0, 10, AttackDirection::PositiveX}, {10, 20, AttackDirection::NegativeX}});
  CHECK(tl.find(9)->attack == AttackDirection::PositiveX);
  CHECK(tl.find(10)->attack == AttackDirection::NegativeX);
  CHECK(tl.find(20) == nullptr);
  CHECK(tl.flipped().find(0)->attack == AttackDirection::NegativeX);
}

TEST_CASE("select_roster drops the benched player") {
  std::vector<PositionSample> raw;
  for (PlayerId p = 1; p <= 6; ++p) raw.push_back({0, p, 1.0 * p, 0.0, 0.0});
  const RawSession s = session_of(raw);
  const RawSession r = select_roster(s, kFive);
  CHECK(r.samples.size() == 5);
  for (const auto& x : r.samples) CHECK(x.player != 3);
  CHECK(r.roster == kFive);

  CHECK(select_roster(r, kFive).samples == r.samples);
  const std::vector<PlayerId> three{1, 2, 3};
  CHECK_THROWS_AS(select_roster(s, three), ConfigError);
  const std::vector<PlayerId> missing{1, 2, 4, 5, 9};
  CHECK_THROWS_AS(select_roster(s, missing), ConfigError);
}

TEST_CASE("regularize carries the last observation forward") {
  const RawSession s = session_of({{0, 1, 1.0, 0.0, 0.0}, {3, 1, 2.0, 0.0, 0.0}});
  GridOptions g;
  g.step = 1;
  g.start_ms = 0;
  g.end_ms = 4;
  const FrameSeries f = regularize(s, g);
  REQUIRE(f.frame_count() == 5);
  std::vector<double> xs;
  for (std::size_t i = 0; i < 5; ++i) xs.push_back(f.frame(i)[0].x);
  CHECK(xs == std::vector<double>{1, 1, 1, 2, 2});
  CHECK(f.imputed == std::vector<std::uint8_t>{0, 1, 1, 0, 1});
}

TEST_CASE("regularize grid start and errors") {
  const RawSession s = session_of({{5, 1, 0, 0, 0}, {12, 2, 0, 0, 0}, {30, 1, 1, 1, 0}});
  const FrameSeries f = regularize(s, GridOptions{10, std::nullopt, std::nullopt});
  CHECK(f.start_ms == 12);
  CHECK(f.end_ms() == 22);
  GridOptions early{10, 0, std::nullopt};
  CHECK_THROWS_AS(regularize(s, early), InputError);
  CHECK_THROWS_AS(regularize(s, GridOptions{0, std::nullopt, std::nullopt}), ConfigError);
}

TEST_CASE("regularize equals the scan-back oracle on random sparse sessions") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto raw = oracle::sparse_samples(rng, kFive, 500, 12);
    const RawSession s = session_of(raw);
    const FrameSeries f = regularize(s, GridOptions{7, std::nullopt, std::nullopt});
    CHECK(f.start_ms == 0);
    const auto expected = oracle::locf(raw, f.players, f.start_ms, 7, f.frame_count());
    CHECK(f.positions == expected);
  }
}

TEST_CASE("stream_frames matches regularize") {
  std::mt19937_64 rng(5);
  const RawSession s = session_of(oracle::sparse_samples(rng, kFive, 300, 20));
  const FrameSeries f = regularize(s, GridOptions{3, std::nullopt, std::nullopt});
  std::vector<Point> streamed;
  const GridLayout layout = stream_frames(s, GridOptions{3, std::nullopt, std::nullopt},
                                          [&](TimestampMs, std::span<const Point> p, std::span<const std::uint8_t>) {
                                            streamed.insert(streamed.end(), p.begin(), p.end());
                                          });
  CHECK(layout.frame_count == f.frame_count());
  CHECK(streamed == f.positions);
}

TEST_CASE("regularize_periods seeds each period separately") {
  std::vector<PositionSample> raw;
  for (PlayerId p : kFive) {
    raw.push_back({0, p, 1.0, 1.0, 0});
    raw.push_back({100, p, 2.0, 2.0, 0});
  }
  const RawSession s = session_of(raw);
  const MatchTimeline tl({{0, 50, AttackDirection::PositiveX}, {100, 150, AttackDirection::NegativeX}});
  const auto segs = regularize_periods(s, tl, 10);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].start_ms == 0);
  CHECK(segs[0].end_ms() <= 49);
  CHECK(segs[1].start_ms == 100);
  CHECK(segs[1].frame(0)[0].x == 2.0);

  const MatchTimeline missing({{0, 50, AttackDirection::PositiveX}, {200, 250, AttackDirection::PositiveX}});
  CHECK_THROWS_AS(regularize_periods(s, missing, 10), InputError);
}

TEST_CASE("session_stats") {
  const RawSession one = session_of({{0, 1, 0, 0, 0}, {100, 1, 0, 0, 0}, {200, 1, 0, 0, 0}});
  const SessionStats st = session_stats(one);
  CHECK(st.mean_interval_ms.at(1) == doctest::Approx(100.0));
  CHECK(st.overall_rate_hz == doctest::Approx(15.0));

  std::mt19937_64 rng(3);
  const RawSession s = session_of(oracle::sparse_samples(rng, kFive, 10'000, 40));
  const SessionStats got = session_stats(s);
  std::map<PlayerId, std::vector<TimestampMs>> times;
  for (const auto& x : s.samples) times[x.player].push_back(x.timestamp);
  double sum = 0;
  for (auto& [p, ts] : times) {
    std::sort(ts.begin(), ts.end());
    double gaps = 0;
    for (std::size_t i = 1; i < ts.size(); ++i) gaps += static_cast<double>(ts[i] - ts[i - 1]);
    const double mean = gaps / static_cast<double>(ts.size() - 1);
    CHECK(got.mean_interval_ms.at(p) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(got.samples_per_player.at(p) == ts.size());
    sum += mean;
  }
  CHECK(got.mean_player_interval_ms == doctest::Approx(sum / 5).epsilon(1e-12));
  const double span = static_cast<double>(s.samples.back().timestamp - s.samples.front().timestamp);
  CHECK(got.overall_rate_hz == doctest::Approx(static_cast<double>(s.samples.size()) * 1000.0 / span));
}

TEST_CASE("frames_to_session round trip") {
  std::mt19937_64 rng(9);
  const RawSession s = session_of(oracle::sparse_samples(rng, kFive, 200, 5));
  const FrameSeries f = regularize(s, GridOptions{4, std::nullopt, std::nullopt});
  const RawSession back = frames_to_session(f);
  CHECK(back.samples.size() == f.positions.size());
  const FrameSeries again = regularize(back, GridOptions{4, std::nullopt, std::nullopt});
  CHECK(again.positions == f.positions);
}
