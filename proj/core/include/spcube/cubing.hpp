#ifndef SPCUBE_CUBING_HPP
#define SPCUBE_CUBING_HPP

#include <array>
#include <string>
#include <vector>

namespace spcube {

// One hyperparameter triple: weight decay lambda, dropout rate p, interval
// multiplier k.
struct HyperConfig {
  double weight_decay = 0.0;
  double dropout_rate = 0.0;
  double k = 0.0;
};

/* Evaluation grid.  weight_decay is log-spaced; dropout and k are linear.
 * Each axis must be strictly increasing.
 */
struct HyperGrid {
  std::vector<double> weight_decay_values;
  std::vector<double> dropout_values;
  std::vector<double> k_values;
};

/* Desk-scale default: 10 log-spaced decays 1e-10..1e-1, dropout 0.1..0.9
 * step 0.1, 17 k values 1..10 (step 0.5625); 1,530 triples.
 */
HyperGrid default_grid();

void validate(const HyperGrid& grid);

// All (lambda, p, k) triples, lexicographic in (decay, dropout, k).
std::vector<HyperConfig> enumerate_grid(const HyperGrid& grid);

/* Evaluated configurations with raw and min-max-normalized scores (lower is
 * better).  A constant table normalizes to all zeros; the baseline is mapped
 * through the same affine transform and may land outside [0,1].
 */
struct ScoreTable {
  std::vector<HyperConfig> configs;
  std::vector<double> raw;
  std::vector<double> normalized;
  double baseline_raw = 0.0;
  double baseline_normalized = 0.0;
};

ScoreTable normalize_scores(std::vector<HyperConfig> configs,
                            std::vector<double> raw, double baseline_raw);

/* Axis-aligned search cube.  Axis 0 is log10(weight_decay), axes 1 and 2 are
 * dropout and k in natural units.  A grid point on a face shared with a
 * sibling belongs to the lower sibling: the upper sibling marks that face
 * open via lower_open.  Root faces are all closed.
 */
struct Cube {
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  std::array<bool, 3> lower_open{false, false, false};

  int id = -1;
  int parent_id = -1;
  int depth = 0;
  int stall = 0;

  bool has_stats = false;
  double s_bar = 0.0;  // mean normalized score over contained points
  double w = 0.0;      // fraction of contained points with raw < baseline
  double o = 0.0;      // w + (1 - s_bar)
  int n_points = 0;
  std::string finished_reason;  // "", "stall", "unsplittable", "min_points"

  bool contains(const HyperConfig& h) const;
  double volume() const;  // in split-space coordinates
};

struct CubeSearchConfig {
  double epsilon = 0.15;  // relative-improvement threshold, > 0
  int t = 3;              // successive-ancestor window, >= 1
  int max_rounds = 10000; // dequeue budget
  int top_k = 10;         // cubes returned
  int min_points = 1;     // cubes with fewer grid points finish unscored
};

void validate(const CubeSearchConfig& cfg);

// Smallest axis-aligned box containing every config (decay in log10 space).
Cube bounding_cube(const std::vector<HyperConfig>& configs);

/* (s_bar, w, o, n_points) for one cube; throws when the cube holds no
 * evaluated configuration.
 */
void cube_stats(const ScoreTable& table, Cube& cube);

// True when every axis of the cube spans at least 2 distinct grid values.
bool splittable(const Cube& cube, const HyperGrid& grid);

// Midpoint bisection on all 3 axes; 8 children tiling the parent exactly.
std::array<Cube, 8> split(const Cube& cube);

struct CubeSearchResult {
  std::vector<Cube> visited;   // every dequeued cube, in processing order
  std::vector<Cube> finished;  // subset that entered the finished set
  std::vector<Cube> ranked;    // top_k finished with stats, best first
  int dequeues = 0;
  bool hit_round_limit = false;
};

/* Breadth-first refinement from the bounding box.  A child's stall counter
 * is parent stall + 1 when its relative improvement in o falls below
 * epsilon, else 0; the root's counter is pinned to 0 so it always splits
 * when splittable.  Cubes finish on stall >= t, unsplittability, or fewer
 * than min_points contained configs.  Ranking: o descending, then smaller
 * volume, then lexicographic bounds.
 */
CubeSearchResult cube_search(const ScoreTable& table, const HyperGrid& grid,
                             const CubeSearchConfig& cfg);

/* Cross-replicate aggregation: count, per distinct cube (exact bounds), its
 * appearances in the per-replicate top_n; keep the `keep` cubes with the
 * highest counts (ties by mean o, then bounds); report the per-axis envelope
 * of kept cubes and the mean appearance count.
 */
struct Subregion {
  double wdr_lo = 0.0, wdr_hi = 0.0;  // weight decay, natural units
  double dr_lo = 0.0, dr_hi = 0.0;    // dropout
  double sdr_lo = 0.0, sdr_hi = 0.0;  // k
  double n_top = 0.0;
  struct KeptCube {
    std::array<double, 3> lo{}, hi{};
    int count = 0;
    double mean_o = 0.0;
  };
  std::vector<KeptCube> kept;
};

Subregion aggregate_subregions(
    const std::vector<std::vector<Cube>>& per_replicate_rankings,
    int top_n = 10, int keep = 5);

}  // namespace spcube

#endif  // SPCUBE_CUBING_HPP
