#include "spcube/cubing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace spcube {

namespace {

// Comparison slack for grid-point-on-boundary tests.  Grid coordinates and
// cube bounds come from the same few arithmetic steps, so anything that
// should sit on a face is within a few ulps of it.
double face_eps(double bound) {
  return 1e-9 * std::max(1.0, std::abs(bound));
}

std::array<double, 3> split_coords(const HyperConfig& h) {
  return {std::log10(h.weight_decay), h.dropout_rate, h.k};
}

bool contains_coord(const Cube& c, int axis, double v) {
  const double lo_eps = face_eps(c.lo[axis]);
  const double hi_eps = face_eps(c.hi[axis]);
  const bool above = c.lower_open[axis] ? (v > c.lo[axis] + lo_eps)
                                        : (v >= c.lo[axis] - lo_eps);
  return above && v <= c.hi[axis] + hi_eps;
}

bool lex_less_bounds(const Cube& a, const Cube& b) {
  for (int j = 0; j < 3; ++j) {
    if (a.lo[j] != b.lo[j]) return a.lo[j] < b.lo[j];
    if (a.hi[j] != b.hi[j]) return a.hi[j] < b.hi[j];
  }
  return false;
}

// Ranking order: o descending, then smaller volume, then lexicographic bounds.
bool rank_less(const Cube& a, const Cube& b) {
  if (a.o != b.o) return a.o > b.o;
  const double va = a.volume(), vb = b.volume();
  if (va != vb) return va < vb;
  return lex_less_bounds(a, b);
}

}  // namespace

HyperGrid default_grid() {
  HyperGrid grid;
  for (int i = -10; i <= -1; ++i)
    grid.weight_decay_values.push_back(std::pow(10.0, i));
  for (int i = 1; i <= 9; ++i)
    grid.dropout_values.push_back(0.1 * i);
  for (int i = 0; i < 17; ++i)
    grid.k_values.push_back(1.0 + 0.5625 * i);
  return grid;
}

void validate(const HyperGrid& grid) {
  auto check_axis = [](const std::vector<double>& v, const char* name) {
    if (v.empty())
      throw std::invalid_argument(std::string("grid: empty axis ") + name);
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1]))
        throw std::invalid_argument(std::string("grid: axis ") + name +
                                    " not strictly increasing");
  };
  check_axis(grid.weight_decay_values, "weight_decay");
  check_axis(grid.dropout_values, "dropout");
  check_axis(grid.k_values, "k");
  if (grid.weight_decay_values.front() <= 0.0)
    throw std::invalid_argument("grid: weight decays must be positive");
}

std::vector<HyperConfig> enumerate_grid(const HyperGrid& grid) {
  validate(grid);
  std::vector<HyperConfig> out;
  out.reserve(grid.weight_decay_values.size() * grid.dropout_values.size() *
              grid.k_values.size());
  for (double wd : grid.weight_decay_values)
    for (double p : grid.dropout_values)
      for (double k : grid.k_values) out.push_back({wd, p, k});
  return out;
}

ScoreTable normalize_scores(std::vector<HyperConfig> configs,
                            std::vector<double> raw, double baseline_raw) {
  if (configs.empty() || configs.size() != raw.size())
    throw std::invalid_argument(
        "normalize_scores: configs and raw scores must be non-empty and aligned");

  const auto [mn_it, mx_it] = std::minmax_element(raw.begin(), raw.end());
  const double mn = *mn_it, mx = *mx_it;
  const double range = mx - mn;

  ScoreTable table;
  table.configs = std::move(configs);
  table.raw = std::move(raw);
  table.baseline_raw = baseline_raw;
  table.normalized.resize(table.raw.size());
  if (range > 0.0) {
    for (std::size_t i = 0; i < table.raw.size(); ++i)
      table.normalized[i] = (table.raw[i] - mn) / range;
    table.baseline_normalized = (baseline_raw - mn) / range;
  } else {
    std::fill(table.normalized.begin(), table.normalized.end(), 0.0);
    table.baseline_normalized = 0.0;
  }
  return table;
}

bool Cube::contains(const HyperConfig& h) const {
  const auto v = split_coords(h);
  for (int j = 0; j < 3; ++j)
    if (!contains_coord(*this, j, v[j])) return false;
  return true;
}

double Cube::volume() const {
  return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]);
}

void validate(const CubeSearchConfig& cfg) {
  if (!(cfg.epsilon > 0.0))
    throw std::invalid_argument("cube search: epsilon must be > 0");
  if (cfg.t < 1) throw std::invalid_argument("cube search: t must be >= 1");
  if (cfg.max_rounds < 1)
    throw std::invalid_argument("cube search: max_rounds must be >= 1");
  if (cfg.top_k < 1)
    throw std::invalid_argument("cube search: top_k must be >= 1");
  if (cfg.min_points < 1)
    throw std::invalid_argument("cube search: min_points must be >= 1");
}

Cube bounding_cube(const std::vector<HyperConfig>& configs) {
  if (configs.empty())
    throw std::invalid_argument("bounding_cube: no configurations");
  Cube root;
  root.lo.fill(std::numeric_limits<double>::infinity());
  root.hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& h : configs) {
    const auto v = split_coords(h);
    for (int j = 0; j < 3; ++j) {
      root.lo[j] = std::min(root.lo[j], v[j]);
      root.hi[j] = std::max(root.hi[j], v[j]);
    }
  }
  root.id = 0;
  root.depth = 0;
  root.parent_id = -1;
  return root;
}

void cube_stats(const ScoreTable& table, Cube& cube) {
  double sum_norm = 0.0;
  int n = 0, beats = 0;
  for (std::size_t i = 0; i < table.configs.size(); ++i) {
    if (!cube.contains(table.configs[i])) continue;
    ++n;
    sum_norm += table.normalized[i];
    if (table.raw[i] < table.baseline_raw) ++beats;
  }
  if (n == 0)
    throw std::invalid_argument("cube_stats: cube contains no grid points");
  cube.n_points = n;
  cube.s_bar = sum_norm / static_cast<double>(n);
  cube.w = static_cast<double>(beats) / static_cast<double>(n);
  cube.o = cube.w + (1.0 - cube.s_bar);
  cube.has_stats = true;
}

bool splittable(const Cube& cube, const HyperGrid& grid) {
  const std::vector<double>* axes[3] = {&grid.weight_decay_values,
                                        &grid.dropout_values, &grid.k_values};
  for (int j = 0; j < 3; ++j) {
    int count = 0;
    for (double v : *axes[j]) {
      const double coord = (j == 0) ? std::log10(v) : v;
      // Geometric span, not ownership: both faces count as inside.
      if (coord >= cube.lo[j] - face_eps(cube.lo[j]) &&
          coord <= cube.hi[j] + face_eps(cube.hi[j]))
        ++count;
      if (count >= 2) break;
    }
    if (count < 2) return false;
  }
  return true;
}

std::array<Cube, 8> split(const Cube& cube) {
  std::array<double, 3> mid;
  for (int j = 0; j < 3; ++j) mid[j] = 0.5 * (cube.lo[j] + cube.hi[j]);

  std::array<Cube, 8> children;
  for (int c = 0; c < 8; ++c) {
    Cube& child = children[c];
    child.parent_id = cube.id;
    child.depth = cube.depth + 1;
    for (int j = 0; j < 3; ++j) {
      const bool upper = (c >> j) & 1;
      if (upper) {
        child.lo[j] = mid[j];
        child.hi[j] = cube.hi[j];
        child.lower_open[j] = true;  // face point belongs to the lower sibling
      } else {
        child.lo[j] = cube.lo[j];
        child.hi[j] = mid[j];
        child.lower_open[j] = cube.lower_open[j];
      }
    }
  }
  return children;
}

CubeSearchResult cube_search(const ScoreTable& table, const HyperGrid& grid,
                             const CubeSearchConfig& cfg) {
  validate(cfg);
  if (table.configs.empty())
    throw std::invalid_argument("cube_search: empty score table");

  CubeSearchResult result;
  int next_id = 0;

  struct Pending {
    Cube cube;
    double parent_o = 0.0;
    int parent_stall = 0;
  };
  std::deque<Pending> queue;

  Cube root = bounding_cube(table.configs);
  root.id = next_id++;
  queue.push_back({root, 0.0, 0});

  while (!queue.empty() && result.dequeues < cfg.max_rounds) {
    Pending cur = queue.front();
    queue.pop_front();
    ++result.dequeues;
    Cube& cube = cur.cube;

    int n_inside = 0;
    for (const auto& h : table.configs)
      if (cube.contains(h)) ++n_inside;

    if (n_inside < cfg.min_points) {
      cube.n_points = n_inside;
      cube.finished_reason = "min_points";
      if (n_inside > 0) cube_stats(table, cube);
      result.visited.push_back(cube);
      result.finished.push_back(cube);
      continue;
    }

    cube_stats(table, cube);

    if (cube.parent_id < 0) {
      // Virtual parent carries the root's own o: no improvement is measurable,
      // so the counter stays 0 and the root always splits when splittable.
      cube.stall = 0;
    } else {
      const double rel = (cube.o - cur.parent_o) /
                         std::max(std::abs(cur.parent_o), 1e-12);
      cube.stall = rel < cfg.epsilon ? cur.parent_stall + 1 : 0;
    }

    if (cube.stall >= cfg.t) {
      cube.finished_reason = "stall";
    } else if (!splittable(cube, grid)) {
      cube.finished_reason = "unsplittable";
    }

    result.visited.push_back(cube);
    if (!cube.finished_reason.empty()) {
      result.finished.push_back(cube);
      continue;
    }

    for (Cube& child : split(cube)) {
      child.id = next_id++;
      queue.push_back({child, cube.o, cube.stall});
    }
  }
  result.hit_round_limit = !queue.empty();

  std::vector<Cube> rankable;
  for (const Cube& c : result.finished)
    if (c.has_stats) rankable.push_back(c);
  std::sort(rankable.begin(), rankable.end(), rank_less);
  if (static_cast<int>(rankable.size()) > cfg.top_k)
    rankable.resize(cfg.top_k);
  result.ranked = std::move(rankable);
  return result;
}

Subregion aggregate_subregions(
    const std::vector<std::vector<Cube>>& per_replicate_rankings, int top_n,
    int keep) {
  if (per_replicate_rankings.empty())
    throw std::invalid_argument("aggregate_subregions: no rankings");
  if (top_n < 1 || keep < 1)
    throw std::invalid_argument("aggregate_subregions: top_n/keep must be >= 1");

  struct Tally {
    Cube cube;
    int count = 0;
    double o_sum = 0.0;
  };
  std::map<std::array<double, 6>, Tally> tallies;
  for (const auto& ranking : per_replicate_rankings) {
    const int limit = std::min<int>(top_n, static_cast<int>(ranking.size()));
    for (int r = 0; r < limit; ++r) {
      const Cube& c = ranking[r];
      const std::array<double, 6> key = {c.lo[0], c.lo[1], c.lo[2],
                                         c.hi[0], c.hi[1], c.hi[2]};
      auto& tally = tallies[key];
      tally.cube = c;
      ++tally.count;
      tally.o_sum += c.o;
    }
  }
  if (tallies.empty())
    throw std::invalid_argument("aggregate_subregions: rankings are empty");

  std::vector<Tally> ordered;
  ordered.reserve(tallies.size());
  for (auto& [key, tally] : tallies) ordered.push_back(tally);
  std::sort(ordered.begin(), ordered.end(), [](const Tally& a, const Tally& b) {
    if (a.count != b.count) return a.count > b.count;
    const double ao = a.o_sum / a.count, bo = b.o_sum / b.count;
    if (ao != bo) return ao > bo;
    return lex_less_bounds(a.cube, b.cube);
  });
  if (static_cast<int>(ordered.size()) > keep) ordered.resize(keep);

  Subregion region;
  std::array<double, 3> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  double count_sum = 0.0;
  for (const Tally& tally : ordered) {
    for (int j = 0; j < 3; ++j) {
      lo[j] = std::min(lo[j], tally.cube.lo[j]);
      hi[j] = std::max(hi[j], tally.cube.hi[j]);
    }
    count_sum += tally.count;
    region.kept.push_back({tally.cube.lo, tally.cube.hi, tally.count,
                           tally.o_sum / tally.count});
  }
  region.wdr_lo = std::pow(10.0, lo[0]);
  region.wdr_hi = std::pow(10.0, hi[0]);
  region.dr_lo = lo[1];
  region.dr_hi = hi[1];
  region.sdr_lo = lo[2];
  region.sdr_hi = hi[2];
  region.n_top = count_sum / static_cast<double>(region.kept.size());
  return region;
}

}  // namespace spcube
