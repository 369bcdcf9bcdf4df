#include <doctest.h>

#include <random>

#include "courtphase/features.hpp"
#include "oracles.hpp"

using namespace courtphase;

namespace {

std::vector<Point> random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(0.0, 28.0), y(0.0, 15.0);
  std::vector<Point> f;
  for (int i = 0; i < 5; ++i) f.push_back({x(rng), y(rng)});
  return f;
}

FrameSeries random_series(std::mt19937_64& rng, std::size_t frames) {
  FrameSeries s;
  s.grid_step = 20;
  s.start_ms = 1000;
  s.players = {1, 2, 4, 5, 6};
  for (std::size_t i = 0; i < frames; ++i) {
    const auto f = random_frame(rng);
    s.positions.insert(s.positions.end(), f.begin(), f.end());
  }
  s.imputed.assign(s.positions.size(), 0);
  return s;
}

}  // namespace

TEST_CASE("pair labels follow lexicographic roster order") {
  const std::vector<PlayerId> players{1, 2, 4, 5, 6};
  const auto pairs = pair_labels(players);
  REQUIRE(pairs.size() == 10);
  CHECK(pairs.front() == PlayerPair{1, 2});
  CHECK(pairs[3] == PlayerPair{1, 6});
  CHECK(pairs[4] == PlayerPair{2, 4});
  CHECK(pairs.back() == PlayerPair{5, 6});
  CHECK(pair_index(0, 1) == 0);
  CHECK(pair_index(3, 4) == 9);
  CHECK(pair_index(2, 1) == pair_index(1, 2));
}

TEST_CASE("pairwise_distances basics") {
  const std::vector<Point> origin(5, Point{0, 0});
  for (double d : pairwise_distances(origin)) CHECK(d == 0.0);

  const std::vector<Point> f{{0, 0}, {3, 4}, {0, 0}, {0, 0}, {0, 0}};
  const auto d = pairwise_distances(f);
  CHECK(d[pair_index(0, 1)] == 5.0);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) {
      const bool involves = i == 1 || j == 1;
      CHECK(d[pair_index(i, j)] == (involves ? 5.0 : 0.0));
    }
  }
  const std::vector<Point> four(4);
  CHECK_THROWS_AS(pairwise_distances(four), InputError);
  std::vector<Point> bad(5);
  bad[2].y = std::nan("");
  CHECK_THROWS_AS(pairwise_distances(bad), InputError);
}

TEST_CASE("pairwise_distances equals the double-loop oracle and is a metric") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = random_frame(rng);
    const auto got = pairwise_distances(f);
    const auto want = oracle::pair_distances(f);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(std::abs(got[i] - want[i]) <= 1e-12);
      CHECK(got[i] >= 0.0);
    }
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t k = 0; k < 5; ++k) {
          if (i == j || j == k || i == k) continue;
          CHECK(got[pair_index(i, j)] <= got[pair_index(i, k)] + got[pair_index(k, j)] + 1e-9);
        }
  }
}

TEST_CASE("build_feature_matrix") {
  std::mt19937_64 rng(4);
  FrameSeries one = random_series(rng, 1);
  const FeatureMatrix m1 = build_feature_matrix(one);
  REQUIRE(m1.rows() == 1);
  REQUIRE(m1.cols() == 10);
  const auto d = pairwise_distances(one.frame(0));
  CHECK(std::equal(d.begin(), d.end(), m1.view().row(0).begin()));

  FrameSeries same = one;
  for (int i = 0; i < 2; ++i) same.positions.insert(same.positions.end(), one.positions.begin(), one.positions.end());
  same.imputed.assign(same.positions.size(), 0);
  const FeatureMatrix m3 = build_feature_matrix(same);
  REQUIRE(m3.rows() == 3);
  for (std::size_t r = 1; r < 3; ++r) {
    CHECK(std::equal(m3.view().row(0).begin(), m3.view().row(0).end(), m3.view().row(r).begin()));
  }

  const FrameSeries s = random_series(rng, 200);
  const FeatureMatrix m = build_feature_matrix(s);
  REQUIRE(m.rows() == 200);
  for (std::size_t r = 0; r < 200; ++r) {
    CHECK(m.timestamps[r] == s.time_at(r));
    const auto want = oracle::pair_distances(std::vector<Point>(s.frame(r).begin(), s.frame(r).end()));
    for (std::size_t c = 0; c < 10; ++c) CHECK(std::abs(m.view()(r, c) - want[c]) <= 1e-12);
  }
  CHECK(m.pairs == pair_labels(s.players));
}

TEST_CASE("segmented feature matrix records segment starts") {
  std::mt19937_64 rng(5);
  std::vector<FrameSeries> segs{random_series(rng, 4), random_series(rng, 3)};
  segs[1].start_ms = 50'000;
  const FeatureMatrix m = build_feature_matrix(std::span<const FrameSeries>(segs));
  CHECK(m.rows() == 7);
  CHECK(m.segment_starts == std::vector<std::size_t>{0, 4});
  CHECK(m.timestamps[4] == 50'000);
}

TEST_CASE("standardize_columns gives zero mean and unit variance") {
  std::mt19937_64 rng(6);
  FeatureMatrix m = build_feature_matrix(random_series(rng, 100));
  standardize_columns(m);
  for (std::size_t c = 0; c < 10; ++c) {
    double mean = 0, var = 0;
    for (std::size_t r = 0; r < 100; ++r) mean += m.view()(r, c);
    mean /= 100;
    for (std::size_t r = 0; r < 100; ++r) var += (m.view()(r, c) - mean) * (m.view()(r, c) - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var / 100 == doctest::Approx(1.0));
  }
}

TEST_CASE("centroids") {
  const std::vector<Point> sym{{0, 0}, {2, 0}, {0, 2}, {2, 2}, {1, 1}};
  CHECK(frame_centroid(sym) == Point{1, 1});
  const std::vector<Point> same(5, Point{3.5, -2.25});
  CHECK(frame_centroid(same) == Point{3.5, -2.25});

  std::mt19937_64 rng(12);
  const FrameSeries s = random_series(rng, 300);
  const CentroidSeries c = centroid_series(s);
  REQUIRE(c.centroids.size() == 300);
  for (std::size_t i = 0; i < 300; ++i) {
    double sx = 0, sy = 0, lox = 1e9, hix = -1e9, loy = 1e9, hiy = -1e9;
    for (const Point& p : s.frame(i)) {
      sx += p.x, sy += p.y;
      lox = std::min(lox, p.x), hix = std::max(hix, p.x);
      loy = std::min(loy, p.y), hiy = std::max(hiy, p.y);
    }
    CHECK(c.centroids[i].x == doctest::Approx(sx / 5).epsilon(1e-12));
    CHECK(c.centroids[i].y == doctest::Approx(sy / 5).epsilon(1e-12));
    CHECK(c.centroids[i].x >= lox);
    CHECK(c.centroids[i].x <= hix);
    CHECK(c.centroids[i].y >= loy);
    CHECK(c.centroids[i].y <= hiy);
    CHECK(c.timestamps[i] == s.time_at(i));
  }
}
