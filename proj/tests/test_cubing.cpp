#include "spcube/cubing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

using spcube::Cube;
using spcube::CubeSearchConfig;
using spcube::CubeSearchResult;
using spcube::HyperConfig;
using spcube::HyperGrid;
using spcube::ScoreTable;
using spcube::Subregion;

namespace {

HyperGrid small_grid() {
  HyperGrid grid;
  grid.weight_decay_values = {1e-4, 1e-3, 1e-2};
  grid.dropout_values = {0.2, 0.4, 0.6};
  grid.k_values = {1.0, 2.0, 3.0};
  return grid;
}

// Deterministic raw scores keyed on position, spread over [0, ~3).
std::vector<double> synthetic_scores(const std::vector<HyperConfig>& configs) {
  std::vector<double> raw;
  raw.reserve(configs.size());
  for (const auto& h : configs)
    raw.push_back(1.5 + 0.3 * std::sin(10.0 * std::log10(h.weight_decay)) +
                  0.4 * std::cos(7.0 * h.dropout_rate) + 0.2 * std::sin(h.k));
  return raw;
}

Cube manual_cube(std::array<double, 3> lo, std::array<double, 3> hi,
                 double o = 0.0) {
  Cube c;
  c.lo = lo;
  c.hi = hi;
  c.o = o;
  c.has_stats = true;
  return c;
}

}  // namespace

TEST(Grid, DefaultGridShape) {
  const HyperGrid grid = spcube::default_grid();
  ASSERT_EQ(grid.weight_decay_values.size(), 10u);
  ASSERT_EQ(grid.dropout_values.size(), 9u);
  ASSERT_EQ(grid.k_values.size(), 17u);
  EXPECT_DOUBLE_EQ(grid.weight_decay_values.front(), 1e-10);
  EXPECT_DOUBLE_EQ(grid.weight_decay_values.back(), 1e-1);
  EXPECT_DOUBLE_EQ(grid.dropout_values.front(), 0.1);
  EXPECT_DOUBLE_EQ(grid.dropout_values.back(), 0.9);
  EXPECT_DOUBLE_EQ(grid.k_values.front(), 1.0);
  EXPECT_DOUBLE_EQ(grid.k_values[1], 1.5625);
  EXPECT_DOUBLE_EQ(grid.k_values.back(), 10.0);

  const std::vector<HyperConfig> configs = spcube::enumerate_grid(grid);
  ASSERT_EQ(configs.size(), 1530u);
  EXPECT_DOUBLE_EQ(configs[0].weight_decay, 1e-10);
  EXPECT_DOUBLE_EQ(configs[0].dropout_rate, 0.1);
  EXPECT_DOUBLE_EQ(configs[0].k, 1.0);
  EXPECT_DOUBLE_EQ(configs[1].k, 1.5625);  // k is the innermost axis
  EXPECT_DOUBLE_EQ(configs[17].dropout_rate, 0.2);
}

TEST(Grid, ValidationRejections) {
  HyperGrid grid = small_grid();
  grid.dropout_values = {0.4, 0.4};
  EXPECT_THROW(spcube::validate(grid), std::invalid_argument);

  grid = small_grid();
  grid.k_values.clear();
  EXPECT_THROW(spcube::validate(grid), std::invalid_argument);

  grid = small_grid();
  grid.weight_decay_values = {0.0, 1.0};
  EXPECT_THROW(spcube::validate(grid), std::invalid_argument);
}

TEST(Normalize, HandValuesAndConstantTable) {
  std::vector<HyperConfig> configs = {{1e-4, 0.2, 1.0},
                                      {1e-3, 0.2, 1.0},
                                      {1e-2, 0.2, 1.0}};
  const ScoreTable table = spcube::normalize_scores(configs, {2.0, 4.0, 6.0}, 3.0);
  EXPECT_DOUBLE_EQ(table.normalized[0], 0.0);
  EXPECT_DOUBLE_EQ(table.normalized[1], 0.5);
  EXPECT_DOUBLE_EQ(table.normalized[2], 1.0);
  EXPECT_DOUBLE_EQ(table.baseline_normalized, 0.25);
  EXPECT_DOUBLE_EQ(table.baseline_raw, 3.0);

  const ScoreTable flat = spcube::normalize_scores(configs, {5.0, 5.0, 5.0}, 7.0);
  EXPECT_DOUBLE_EQ(flat.normalized[0], 0.0);
  EXPECT_DOUBLE_EQ(flat.normalized[2], 0.0);
  EXPECT_DOUBLE_EQ(flat.baseline_normalized, 0.0);

  EXPECT_THROW(spcube::normalize_scores({}, {}, 0.0), std::invalid_argument);
  EXPECT_THROW(spcube::normalize_scores(configs, {1.0, 2.0}, 0.0),
               std::invalid_argument);
}

TEST(Normalize, ArgminIsPreserved) {
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(small_grid());
  const std::vector<double> raw = synthetic_scores(configs);
  const ScoreTable table = spcube::normalize_scores(configs, raw, 1.0);

  const auto raw_min =
      std::min_element(table.raw.begin(), table.raw.end()) - table.raw.begin();
  const auto norm_min =
      std::min_element(table.normalized.begin(), table.normalized.end()) -
      table.normalized.begin();
  EXPECT_EQ(raw_min, norm_min);
  EXPECT_DOUBLE_EQ(table.normalized[norm_min], 0.0);
}

TEST(CubeStats, FourPointHandCase) {
  std::vector<HyperConfig> configs = {{1e-5, 0.2, 2.0},
                                      {1e-5, 0.2, 4.0},
                                      {1e-3, 0.4, 2.0},
                                      {1e-3, 0.4, 4.0}};
  // Normalized scores become {0, 1/3, 2/3, 1}; two raw values beat 4.
  const ScoreTable table =
      spcube::normalize_scores(configs, {1.0, 3.0, 5.0, 7.0}, 4.0);

  Cube all = spcube::bounding_cube(table.configs);
  spcube::cube_stats(table, all);
  EXPECT_EQ(all.n_points, 4);
  EXPECT_DOUBLE_EQ(all.s_bar, 0.5);
  EXPECT_DOUBLE_EQ(all.w, 0.5);
  EXPECT_DOUBLE_EQ(all.o, 1.0);

  Cube left = manual_cube({-5.0, 0.2, 2.0}, {-5.0, 0.2, 4.0});
  left.has_stats = false;
  spcube::cube_stats(table, left);
  EXPECT_EQ(left.n_points, 2);
  EXPECT_NEAR(left.s_bar, 1.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(left.w, 1.0);
  EXPECT_NEAR(left.o, 1.0 + 1.0 - 1.0 / 6.0, 1e-15);

  Cube empty = manual_cube({-2.0, 0.8, 9.0}, {-1.5, 0.9, 10.0});
  EXPECT_THROW(spcube::cube_stats(table, empty), std::invalid_argument);
}

TEST(CubeStats, ExtremesOfTheObjective) {
  std::vector<HyperConfig> configs = {{1e-4, 0.2, 1.0},
                                      {1e-3, 0.4, 2.0},
                                      {1e-2, 0.6, 3.0}};

  // Baseline above everything: a min-score singleton cube scores o = 2.
  ScoreTable table = spcube::normalize_scores(configs, {1.0, 2.0, 3.0}, 10.0);
  Cube best = manual_cube({-4.0, 0.2, 1.0}, {-4.0, 0.2, 1.0});
  spcube::cube_stats(table, best);
  EXPECT_DOUBLE_EQ(best.o, 2.0);

  // Baseline below everything: the max-score singleton scores o = 0.
  table = spcube::normalize_scores(configs, {1.0, 2.0, 3.0}, 0.5);
  Cube worst = manual_cube({-2.0, 0.6, 3.0}, {-2.0, 0.6, 3.0});
  spcube::cube_stats(table, worst);
  EXPECT_DOUBLE_EQ(worst.o, 0.0);

  // The objective never leaves [0, 2] on random cubes.
  const std::vector<HyperConfig> all = spcube::enumerate_grid(small_grid());
  const ScoreTable big =
      spcube::normalize_scores(all, synthetic_scores(all), 1.5);
  Cube root = spcube::bounding_cube(big.configs);
  spcube::cube_stats(big, root);
  EXPECT_GE(root.o, 0.0);
  EXPECT_LE(root.o, 2.0);
}

TEST(CubeStats, WIsInvariantUnderMonotoneRawMaps) {
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(small_grid());
  const std::vector<double> raw = synthetic_scores(configs);
  std::vector<double> mapped = raw;
  for (double& v : mapped) v = std::exp(2.0 * v);  // strictly increasing

  const ScoreTable a = spcube::normalize_scores(configs, raw, 1.5);
  const ScoreTable b =
      spcube::normalize_scores(configs, mapped, std::exp(2.0 * 1.5));

  Cube ca = spcube::bounding_cube(configs);
  Cube cb = ca;
  spcube::cube_stats(a, ca);
  spcube::cube_stats(b, cb);
  EXPECT_EQ(ca.n_points, cb.n_points);
  EXPECT_DOUBLE_EQ(ca.w, cb.w);

  for (Cube& child : spcube::split(ca)) {
    Cube ga = child, gb = child;
    spcube::cube_stats(a, ga);
    spcube::cube_stats(b, gb);
    EXPECT_EQ(ga.n_points, gb.n_points);
    EXPECT_DOUBLE_EQ(ga.w, gb.w);
  }
}

TEST(Cube, BoundingCubeAndDegenerateBox) {
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(
      spcube::default_grid());
  const Cube root = spcube::bounding_cube(configs);
  EXPECT_NEAR(root.lo[0], -10.0, 1e-9);
  EXPECT_NEAR(root.hi[0], -1.0, 1e-9);
  EXPECT_DOUBLE_EQ(root.lo[1], 0.1);
  EXPECT_DOUBLE_EQ(root.hi[1], 0.9);
  EXPECT_DOUBLE_EQ(root.lo[2], 1.0);
  EXPECT_DOUBLE_EQ(root.hi[2], 10.0);
  EXPECT_EQ(root.parent_id, -1);
  EXPECT_EQ(root.depth, 0);

  const Cube point = spcube::bounding_cube({{1e-3, 0.5, 2.0}});
  EXPECT_DOUBLE_EQ(point.volume(), 0.0);
  EXPECT_TRUE(point.contains({1e-3, 0.5, 2.0}));

  EXPECT_THROW(spcube::bounding_cube({}), std::invalid_argument);
}

TEST(Cube, SplitTilesTheParentExactly) {
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(
      spcube::default_grid());
  Cube root = spcube::bounding_cube(configs);
  root.id = 0;
  const std::array<Cube, 8> children = spcube::split(root);

  double child_volume = 0.0;
  for (const Cube& c : children) {
    EXPECT_EQ(c.parent_id, 0);
    EXPECT_EQ(c.depth, 1);
    child_volume += c.volume();
    for (int j = 0; j < 3; ++j) {
      const double mid = 0.5 * (root.lo[j] + root.hi[j]);
      if (c.lower_open[j]) {
        EXPECT_DOUBLE_EQ(c.lo[j], mid);
        EXPECT_DOUBLE_EQ(c.hi[j], root.hi[j]);
      } else {
        EXPECT_DOUBLE_EQ(c.lo[j], root.lo[j]);
        EXPECT_DOUBLE_EQ(c.hi[j], mid);
      }
    }
  }
  EXPECT_NEAR(child_volume, root.volume(), 1e-9);

  // Every grid point lands in exactly one child, and the per-child counts
  // factor across axes: lambda 5/5, dropout 5/4, k 9/8.
  std::array<int, 8> counts{};
  for (const auto& h : configs) {
    int owner = -1;
    for (int c = 0; c < 8; ++c) {
      if (!children[c].contains(h)) continue;
      EXPECT_EQ(owner, -1) << "config owned by two children";
      owner = c;
    }
    ASSERT_NE(owner, -1) << "config owned by no child";
    ++counts[owner];
  }
  const int lam[2] = {5, 5}, drp[2] = {5, 4}, kk[2] = {9, 8};
  for (int c = 0; c < 8; ++c)
    EXPECT_EQ(counts[c], lam[(c >> 0) & 1] * drp[(c >> 1) & 1] * kk[(c >> 2) & 1])
        << "child " << c;
}

TEST(Cube, FacePointBelongsToTheLowerSibling) {
  // k = 5.5 sits exactly on the k-axis split of the default grid.
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(
      spcube::default_grid());
  Cube root = spcube::bounding_cube(configs);
  const std::array<Cube, 8> children = spcube::split(root);

  const HyperConfig face{1e-8, 0.3, 5.5};
  EXPECT_TRUE(children[0].contains(face));   // lower k child
  EXPECT_FALSE(children[4].contains(face));  // upper k child, lower_open
}

TEST(Cube, SplittableNeedsTwoValuesPerAxis) {
  const HyperGrid grid = small_grid();

  Cube ok = manual_cube({-4.0, 0.2, 1.0}, {-3.0, 0.4, 2.0});
  EXPECT_TRUE(spcube::splittable(ok, grid));

  Cube thin = manual_cube({-4.0, 0.2, 1.0}, {-4.0, 0.4, 2.0});
  EXPECT_FALSE(spcube::splittable(thin, grid));  // single lambda value

  Cube point = manual_cube({-3.0, 0.4, 2.0}, {-3.0, 0.4, 2.0});
  EXPECT_FALSE(spcube::splittable(point, grid));

  Cube between = manual_cube({-3.9, 0.25, 1.1}, {-3.1, 0.35, 1.9});
  EXPECT_FALSE(spcube::splittable(between, grid));  // no k values inside
}

TEST(Search, HugeEpsilonFinishesAllDepthOneChildren) {
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(
      spcube::default_grid());
  const ScoreTable table =
      spcube::normalize_scores(configs, synthetic_scores(configs), 1.5);

  CubeSearchConfig cfg;
  cfg.epsilon = 1e18;
  cfg.t = 1;
  cfg.min_points = 1;
  const CubeSearchResult res =
      spcube::cube_search(table, spcube::default_grid(), cfg);

  ASSERT_EQ(res.visited.size(), 9u);  // root + 8 children
  ASSERT_EQ(res.finished.size(), 8u);
  EXPECT_FALSE(res.hit_round_limit);
  for (const Cube& c : res.finished) {
    EXPECT_EQ(c.depth, 1);
    EXPECT_EQ(c.finished_reason, "stall");
    EXPECT_EQ(c.stall, 1);
    EXPECT_TRUE(c.has_stats);
  }
  ASSERT_EQ(res.ranked.size(), 8u);
  for (std::size_t i = 1; i < res.ranked.size(); ++i)
    EXPECT_GE(res.ranked[i - 1].o, res.ranked[i].o);
}

TEST(Search, PlantedOctantWinsTheRanking) {
  const HyperGrid grid = spcube::default_grid();
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(grid);

  // Low scores only in the low-lambda, low-dropout, low-k corner.
  std::vector<double> raw;
  raw.reserve(configs.size());
  for (const auto& h : configs) {
    const bool inside = std::log10(h.weight_decay) <= -5.5 &&
                        h.dropout_rate <= 0.5 && h.k <= 5.5;
    raw.push_back(inside ? 0.1 : 1.0);
  }
  const ScoreTable table = spcube::normalize_scores(configs, raw, 0.5);

  CubeSearchConfig cfg;  // defaults: epsilon 0.15, t 3
  const CubeSearchResult res = spcube::cube_search(table, grid, cfg);
  ASSERT_FALSE(res.ranked.empty());
  EXPECT_FALSE(res.hit_round_limit);

  const Cube& top = res.ranked.front();
  EXPECT_DOUBLE_EQ(top.o, 2.0);  // pure winning region: w = 1, s_bar = 0
  EXPECT_GE(top.lo[0], -10.0 - 1e-9);
  EXPECT_LE(top.hi[0], -5.5 + 1e-9);
  EXPECT_GE(top.lo[1], 0.1 - 1e-9);
  EXPECT_LE(top.hi[1], 0.5 + 1e-9);
  EXPECT_GE(top.lo[2], 1.0 - 1e-9);
  EXPECT_LE(top.hi[2], 5.5 + 1e-9);
}

TEST(Search, BookkeepingInvariantsHoldOnASmallGrid) {
  const HyperGrid grid = small_grid();
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(grid);
  const ScoreTable table =
      spcube::normalize_scores(configs, synthetic_scores(configs), 1.4);

  CubeSearchConfig cfg;
  cfg.epsilon = 0.05;
  cfg.t = 2;
  const CubeSearchResult res = spcube::cube_search(table, grid, cfg);
  EXPECT_FALSE(res.hit_round_limit);
  ASSERT_FALSE(res.visited.empty());

  std::map<int, Cube> by_id;
  for (const Cube& c : res.visited) {
    EXPECT_EQ(by_id.count(c.id), 0u) << "duplicate id";
    by_id[c.id] = c;
  }

  // BFS dequeues in id order, bounds nest, and the stall rule replays.
  int prev_id = -1;
  std::map<int, int> children_seen;
  for (const Cube& c : res.visited) {
    EXPECT_GT(c.id, prev_id);
    prev_id = c.id;

    int n_inside = 0;
    for (const auto& h : configs)
      if (c.contains(h)) ++n_inside;

    if (c.parent_id < 0) {
      EXPECT_EQ(c.depth, 0);
      EXPECT_EQ(c.stall, 0);
    } else {
      ASSERT_EQ(by_id.count(c.parent_id), 1u);
      const Cube& parent = by_id[c.parent_id];
      EXPECT_EQ(c.depth, parent.depth + 1);
      ++children_seen[c.parent_id];
      for (int j = 0; j < 3; ++j) {
        EXPECT_GE(c.lo[j], parent.lo[j] - 1e-12);
        EXPECT_LE(c.hi[j], parent.hi[j] + 1e-12);
      }
      if (c.has_stats) {
        const double rel =
            (c.o - parent.o) / std::max(std::abs(parent.o), 1e-12);
        const int expected_stall = rel < cfg.epsilon ? parent.stall + 1 : 0;
        EXPECT_EQ(c.stall, expected_stall);
      }
    }

    if (c.finished_reason == "min_points") {
      EXPECT_LT(n_inside, cfg.min_points);
    } else {
      ASSERT_TRUE(c.has_stats);
      EXPECT_EQ(c.n_points, n_inside);

      // Recompute the aggregates straight from the table.
      double sum_norm = 0.0;
      int beats = 0;
      for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!c.contains(configs[i])) continue;
        sum_norm += table.normalized[i];
        if (table.raw[i] < table.baseline_raw) ++beats;
      }
      EXPECT_NEAR(c.s_bar, sum_norm / n_inside, 1e-12);
      EXPECT_NEAR(c.w, static_cast<double>(beats) / n_inside, 1e-12);
      EXPECT_NEAR(c.o, c.w + 1.0 - c.s_bar, 1e-12);

      if (c.finished_reason == "stall") {
        EXPECT_GE(c.stall, cfg.t);
      } else if (c.finished_reason == "unsplittable") {
        EXPECT_FALSE(spcube::splittable(c, grid));
      } else if (c.finished_reason.empty()) {
        EXPECT_TRUE(spcube::splittable(c, grid));
        EXPECT_LT(c.stall, cfg.t);
      } else {
        FAIL() << "unknown finished_reason " << c.finished_reason;
      }
    }
  }

  // Every split parent has all 8 children dequeued (the queue drained).
  for (const Cube& c : res.visited)
    if (c.finished_reason.empty()) EXPECT_EQ(children_seen[c.id], 8);

  // finished is exactly the visited subset with a reason.
  std::size_t finished_in_visited = 0;
  for (const Cube& c : res.visited)
    if (!c.finished_reason.empty()) ++finished_in_visited;
  EXPECT_EQ(res.finished.size(), finished_in_visited);
}

TEST(Search, DeterministicAcrossRuns) {
  const HyperGrid grid = small_grid();
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(grid);
  const ScoreTable table =
      spcube::normalize_scores(configs, synthetic_scores(configs), 1.4);

  CubeSearchConfig cfg;
  cfg.epsilon = 0.05;
  cfg.t = 2;
  const CubeSearchResult a = spcube::cube_search(table, grid, cfg);
  const CubeSearchResult b = spcube::cube_search(table, grid, cfg);
  ASSERT_EQ(a.visited.size(), b.visited.size());
  for (std::size_t i = 0; i < a.visited.size(); ++i) {
    EXPECT_EQ(a.visited[i].id, b.visited[i].id);
    EXPECT_EQ(a.visited[i].lo, b.visited[i].lo);
    EXPECT_EQ(a.visited[i].o, b.visited[i].o);
    EXPECT_EQ(a.visited[i].stall, b.visited[i].stall);
  }
}

TEST(Search, RoundLimitIsHonored) {
  const std::vector<HyperConfig> configs = spcube::enumerate_grid(
      spcube::default_grid());
  const ScoreTable table =
      spcube::normalize_scores(configs, synthetic_scores(configs), 1.5);

  CubeSearchConfig cfg;
  cfg.max_rounds = 3;
  const CubeSearchResult res =
      spcube::cube_search(table, spcube::default_grid(), cfg);
  EXPECT_EQ(res.dequeues, 3);
  EXPECT_EQ(res.visited.size(), 3u);
  EXPECT_TRUE(res.hit_round_limit);
}

TEST(Search, ConfigValidation) {
  CubeSearchConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(spcube::validate(cfg), std::invalid_argument);
  cfg = CubeSearchConfig{};
  cfg.t = 0;
  EXPECT_THROW(spcube::validate(cfg), std::invalid_argument);
  cfg = CubeSearchConfig{};
  cfg.max_rounds = 0;
  EXPECT_THROW(spcube::validate(cfg), std::invalid_argument);
  cfg = CubeSearchConfig{};
  cfg.top_k = 0;
  EXPECT_THROW(spcube::validate(cfg), std::invalid_argument);
  cfg = CubeSearchConfig{};
  cfg.min_points = 0;
  EXPECT_THROW(spcube::validate(cfg), std::invalid_argument);
}

TEST(Aggregate, IdenticalRankingsKeepEverythingAtFullCount) {
  std::vector<Cube> ranking = {
      manual_cube({-6.0, 0.1, 1.0}, {-5.0, 0.3, 3.0}, 1.9),
      manual_cube({-4.0, 0.3, 2.0}, {-3.0, 0.5, 4.0}, 1.5),
      manual_cube({-8.0, 0.5, 5.0}, {-7.0, 0.7, 6.0}, 1.2)};
  const std::vector<std::vector<Cube>> reps(4, ranking);

  const Subregion region = spcube::aggregate_subregions(reps, 10, 5);
  ASSERT_EQ(region.kept.size(), 3u);
  for (const auto& kc : region.kept) EXPECT_EQ(kc.count, 4);
  EXPECT_DOUBLE_EQ(region.n_top, 4.0);

  EXPECT_DOUBLE_EQ(region.wdr_lo, 1e-8);
  EXPECT_DOUBLE_EQ(region.wdr_hi, 1e-3);
  EXPECT_DOUBLE_EQ(region.dr_lo, 0.1);
  EXPECT_DOUBLE_EQ(region.dr_hi, 0.7);
  EXPECT_DOUBLE_EQ(region.sdr_lo, 1.0);
  EXPECT_DOUBLE_EQ(region.sdr_hi, 6.0);

  // Count ties fall back to mean o: the o=1.9 cube leads.
  EXPECT_DOUBLE_EQ(region.kept.front().mean_o, 1.9);
}

TEST(Aggregate, CountsRankAndEnvelopeFollowTheKeptSet) {
  const Cube A = manual_cube({-5.0, 0.1, 1.0}, {-4.0, 0.2, 2.0}, 1.5);
  const Cube B = manual_cube({-3.0, 0.3, 2.0}, {-2.0, 0.4, 3.0}, 1.2);
  const Cube C = manual_cube({-6.0, 0.5, 4.0}, {-5.5, 0.6, 5.0}, 1.9);

  const std::vector<std::vector<Cube>> reps = {{A, B}, {A, C}, {A, B}};
  const Subregion region = spcube::aggregate_subregions(reps, 10, 2);

  ASSERT_EQ(region.kept.size(), 2u);
  EXPECT_EQ(region.kept[0].count, 3);  // A in every replicate
  EXPECT_DOUBLE_EQ(region.kept[0].mean_o, 1.5);
  EXPECT_EQ(region.kept[1].count, 2);  // B twice, C dropped
  EXPECT_DOUBLE_EQ(region.kept[1].mean_o, 1.2);
  EXPECT_DOUBLE_EQ(region.n_top, 2.5);

  EXPECT_DOUBLE_EQ(region.wdr_lo, 1e-5);
  EXPECT_DOUBLE_EQ(region.wdr_hi, 1e-2);
  EXPECT_DOUBLE_EQ(region.dr_lo, 0.1);
  EXPECT_DOUBLE_EQ(region.dr_hi, 0.4);
  EXPECT_DOUBLE_EQ(region.sdr_lo, 1.0);
  EXPECT_DOUBLE_EQ(region.sdr_hi, 3.0);
}

TEST(Aggregate, TopNTruncatesPerReplicate) {
  const Cube A = manual_cube({-5.0, 0.1, 1.0}, {-4.0, 0.2, 2.0}, 1.5);
  const Cube B = manual_cube({-3.0, 0.3, 2.0}, {-2.0, 0.4, 3.0}, 1.2);

  const std::vector<std::vector<Cube>> reps = {{A, B}, {A, B}};
  const Subregion region = spcube::aggregate_subregions(reps, 1, 5);
  ASSERT_EQ(region.kept.size(), 1u);
  EXPECT_EQ(region.kept[0].count, 2);
  EXPECT_DOUBLE_EQ(region.kept[0].mean_o, 1.5);
  EXPECT_DOUBLE_EQ(region.n_top, 2.0);
}

TEST(Aggregate, SingleReplicateKeepOne) {
  const Cube A = manual_cube({-5.0, 0.1, 1.0}, {-4.0, 0.2, 2.0}, 1.5);
  const Cube B = manual_cube({-3.0, 0.3, 2.0}, {-2.0, 0.4, 3.0}, 1.8);

  const Subregion region = spcube::aggregate_subregions({{A, B}}, 10, 1);
  ASSERT_EQ(region.kept.size(), 1u);
  EXPECT_EQ(region.kept[0].count, 1);
  // Tie on count resolves by mean o, so B (1.8) is kept.
  EXPECT_DOUBLE_EQ(region.kept[0].mean_o, 1.8);
  EXPECT_DOUBLE_EQ(region.dr_lo, 0.3);
}

TEST(Aggregate, Rejections) {
  EXPECT_THROW(spcube::aggregate_subregions({}, 10, 5), std::invalid_argument);
  EXPECT_THROW(spcube::aggregate_subregions({{}, {}}, 10, 5),
               std::invalid_argument);
  const Cube A = manual_cube({-5.0, 0.1, 1.0}, {-4.0, 0.2, 2.0}, 1.5);
  EXPECT_THROW(spcube::aggregate_subregions({{A}}, 0, 5), std::invalid_argument);
  EXPECT_THROW(spcube::aggregate_subregions({{A}}, 10, 0),
               std::invalid_argument);
}
