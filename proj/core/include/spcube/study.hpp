#ifndef SPCUBE_STUDY_HPP
#define SPCUBE_STUDY_HPP

#include <map>
#include <string>
#include <vector>

#include "spcube/basis.hpp"
#include "spcube/config.hpp"
#include "spcube/cubing.hpp"
#include "spcube/gibbs.hpp"
#include "spcube/scoring.hpp"
#include "spcube/simulate.hpp"

namespace spcube {

/* Artifacts shared by every basis dimension of one (setting, replicate):
 * the dataset seed deliberately excludes m, so each replicate dataset is
 * analyzed under all basis dimensions, and the eigenbasis is computed once
 * at the largest m and sliced.
 */
struct ReplicateInputs {
  SpatialDataset ds;
  BasisSet basis;  // columns for the largest requested m
};

// Simulation template for one replicate: the setting's covariance regime
// plus a dataset seed derived from (setting, replicate) alone.
SimConfig replicate_sim_config(const ExperimentConfig& cfg, int setting_idx,
                               int replicate_idx);

ReplicateInputs prepare_replicate(const ExperimentConfig& cfg, int setting_idx,
                                  int replicate_idx, int m_max);

struct ReplicateResult {
  ScoreRecord baseline;
  // per variant, one ScoreRecord per enumerate_grid(cfg.grid) entry
  std::map<UQTag, std::vector<ScoreRecord>> variant_scores;
  // per-test-point summaries, filled only under cfg.persist_summaries
  std::map<UQTag, std::vector<PredictiveSummary>> summaries;
};

/* Conjugate-Gibbs baseline alone for one (setting, m, replicate) cell.
 * The residual-variance prior scale is set from the training responses.
 */
ScoreRecord baseline_for_replicate(const ExperimentConfig& cfg, int setting_idx,
                                   int m, int replicate_idx,
                                   const ReplicateInputs& inputs);

/* One (setting, m, replicate) cell: baseline fit plus the full (lambda, p)
 * training grid scored at every k for each configured variant.
 */
ReplicateResult run_replicate_with(const ExperimentConfig& cfg, int setting_idx,
                                   int m, int replicate_idx,
                                   const ReplicateInputs& inputs);

// Convenience wrapper that prepares inputs for this m alone.
ReplicateResult run_replicate(const ExperimentConfig& cfg, int setting_idx,
                              int m, int replicate_idx);

/* Directory layout (fixed filenames under output_dir):
 *   setting_{s}/m_{m}/rep_{r}/dataset.csv
 *   setting_{s}/m_{m}/rep_{r}/baseline.json
 *   setting_{s}/m_{m}/rep_{r}/{variant}/scores.csv
 *   setting_{s}/m_{m}/rep_{r}/{variant}/cubes.jsonl
 *   setting_{s}/m_{m}/rep_{r}/{variant}/ranked.json
 *   setting_{s}/m_{m}/subregion_{variant}.json
 *   report/results_s{s}_m{m}.csv, report/subregions_s{s}_m{m}.csv,
 *   report/tables.txt
 * Settings and replicates are numbered from 1 and 0 respectively.
 */
std::string replicate_dir(const ExperimentConfig& cfg, int setting_idx, int m,
                          int replicate_idx);

// True when every artifact of the (setting, m, replicate) cell exists.
bool replicate_complete(const ExperimentConfig& cfg, int setting_idx, int m,
                        int replicate_idx);

void persist_replicate(const ExperimentConfig& cfg, int setting_idx, int m,
                       int replicate_idx, const ReplicateInputs& inputs,
                       const ReplicateResult& result);

/* Full study: replicate loops with resume-by-skip, per-replicate cube
 * searches, cross-replicate aggregation, and report files.
 */
void run_study(const ExperimentConfig& cfg);

// Rebuild aggregation and report files from persisted artifacts only.
void write_reports(const ExperimentConfig& cfg);

// Serialization helpers shared by the harness and the CLI.
std::string score_record_json(const ScoreRecord& rec);
ScoreRecord score_record_from_json(const std::string& text);
void write_scores_csv(const std::string& path, int replicate_idx, UQTag variant,
                      const std::vector<HyperConfig>& configs,
                      const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_scores_csv(const std::string& path,
                                         const std::vector<HyperConfig>& configs);
std::string cube_log_line(const Cube& cube);
std::string ranked_cubes_json(const std::vector<Cube>& ranked);
std::vector<Cube> ranked_cubes_from_json(const std::string& text);
std::string subregion_json(const Subregion& region);

}  // namespace spcube

#endif  // SPCUBE_STUDY_HPP
