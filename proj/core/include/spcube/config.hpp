#ifndef SPCUBE_CONFIG_HPP
#define SPCUBE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spcube/cubing.hpp"
#include "spcube/gibbs.hpp"
#include "spcube/io.hpp"
#include "spcube/mc_dropout.hpp"
#include "spcube/net.hpp"
#include "spcube/simulate.hpp"

namespace spcube {

// One simulation regime: Matern smoothness plus effective range.
struct Setting {
  double nu = 0.5;
  double effective_range = 0.3;
};

/* Everything a study run needs.  sim/baseline/train act as templates whose
 * seeds (and, for training, loss head and grid hyperparameters) are filled
 * in per task.
 */
struct ExperimentConfig {
  std::vector<Setting> settings;
  std::vector<int> basis_dims;
  int replicates = 5;
  std::vector<UQTag> variants;

  HyperGrid grid;
  CubeSearchConfig cube;
  int aggregate_top_n = 10;
  int aggregate_keep = 5;

  SimConfig sim;
  GibbsConfig baseline;
  TrainConfig train;

  int mc_passes = 500;
  double fa_length_scale = 1.0;
  /* Capture per-test-point predictive summaries while scoring.  Only legal
   * on a single-configuration grid (the rows carry one interval each).
   */
  bool persist_summaries = false;
  double alpha = 0.05;
  double gamma = 1.0;

  std::uint64_t seed_root = 0;
  std::string output_dir = "out";
  int workers = 1;

  /* 1-based position in settings, 0 = run all.  Filtering skips the other
   * settings without renumbering them, so seeds and directory names match a
   * later full run and partial output is reusable.
   */
  int setting_filter = 0;
};

// Desk-scale defaults: 4 settings, m in {25,135}, 5 replicates, N=2,000.
ExperimentConfig default_config();

ExperimentConfig config_from_ini(const io::Ini& ini);
ExperimentConfig load_config(const std::string& path);

void validate(const ExperimentConfig& cfg);

UQTag parse_variant(const std::string& name);
std::string variant_name(UQTag tag);

}  // namespace spcube

#endif  // SPCUBE_CONFIG_HPP
