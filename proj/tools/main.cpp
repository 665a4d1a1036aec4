// Command line front end. Every subcommand exits 0 on success; failures
// print one JSON object {"command":..., "error":...} to stderr and exit
// nonzero (2 for usage errors, 1 for everything else).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spcube/basis.hpp"
#include "spcube/config.hpp"
#include "spcube/cubing.hpp"
#include "spcube/io.hpp"
#include "spcube/matern.hpp"
#include "spcube/simulate.hpp"
#include "spcube/study.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int setting = 1;
  int m = 0;  // 0 means the largest configured basis dimension
  int replicate = 0;
  std::string variant;
};

void add_common(CLI::App* sub, CommonOpts* opts, bool with_model_axes = true) {
  sub->add_option("--config", opts->config_path, "INI config file")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", opts->seed, "override the root seed")
      ->each([opts](const std::string&) { opts->seed_set = true; });
  if (with_model_axes) {
    sub->add_option("--setting", opts->setting,
                    "simulation setting, numbered from 1");
    sub->add_option("--m", opts->m, "basis dimension");
    sub->add_option("--replicate", opts->replicate, "replicate index from 0");
    sub->add_option("--variant", opts->variant,
                    "uncertainty variant: EU, FA or LA");
  }
}

spcube::ExperimentConfig resolve_config(const CommonOpts& opts) {
  spcube::ExperimentConfig cfg = spcube::load_config(opts.config_path);
  if (opts.seed_set) cfg.seed_root = opts.seed;
  return cfg;
}

int resolve_m(const spcube::ExperimentConfig& cfg, const CommonOpts& opts) {
  if (opts.m > 0) return opts.m;
  return *std::max_element(cfg.basis_dims.begin(), cfg.basis_dims.end());
}

// Dataset plus basis, either simulated per config or read from a CSV whose
// locations then define the eigenbasis.
spcube::ReplicateInputs resolve_inputs(const spcube::ExperimentConfig& cfg,
                                       const std::string& data_path,
                                       int setting_idx, int replicate_idx,
                                       int m) {
  if (data_path.empty())
    return spcube::prepare_replicate(cfg, setting_idx, replicate_idx, m);
  if (setting_idx < 0 ||
      setting_idx >= static_cast<int>(cfg.settings.size()))
    throw std::runtime_error("setting index out of range");
  const spcube::Setting& s = cfg.settings[setting_idx];
  spcube::ReplicateInputs inputs;
  inputs.ds = spcube::io::read_dataset_csv(data_path);
  spcube::MaternParams mp{
      1.0, spcube::effective_range_to_rho(s.effective_range, s.nu), s.nu};
  inputs.basis = spcube::eigen_basis(
      spcube::build_cov_matrix(inputs.ds.locations, mp), m, mp);
  return inputs;
}

void emit_written(std::initializer_list<std::string> paths) {
  json j;
  j["written"] = json::array();
  for (const auto& p : paths) j["written"].push_back(p);
  std::cout << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Spatial regression with eigenbasis features: simulation, baseline, "
      "dropout uncertainty grids and recursive cube search"};
  app.require_subcommand(1);
  std::string active = "spcube";

  CommonOpts sim_opts, basis_opts, base_opts, grid_opts, cube_opts, study_opts,
      report_opts, load_opts;
  std::string basis_data, base_data, basis_values;
  std::vector<std::string> cube_scores, cube_baselines;
  std::string load_data;
  double load_fraction = 0.8;
  bool load_log = false;

  auto* sim_cmd = app.add_subcommand(
      "simulate", "simulate one spatial dataset and write it as CSV");
  add_common(sim_cmd, &sim_opts);
  sim_cmd->add_option("--out", sim_opts.out, "output CSV path");
  sim_cmd->callback([&] {
    active = "simulate";
    const auto cfg = resolve_config(sim_opts);
    spcube::validate(cfg);
    const auto ds = spcube::simulate_dataset(spcube::replicate_sim_config(
        cfg, sim_opts.setting - 1, sim_opts.replicate));
    const std::string out =
        sim_opts.out.empty() ? "dataset.csv" : sim_opts.out;
    spcube::io::write_dataset_csv(out, ds);
    emit_written({out});
  });

  auto* basis_cmd = app.add_subcommand(
      "basis", "eigenvector basis of the covariance over the dataset "
               "locations, written as a binary matrix");
  add_common(basis_cmd, &basis_opts);
  basis_cmd->add_option("--data", basis_data, "dataset CSV (default: simulate)")
      ->check(CLI::ExistingFile);
  basis_cmd->add_option("--out", basis_opts.out, "output matrix path");
  basis_cmd->add_option("--values", basis_values,
                        "also write the eigenvalues to this CSV");
  basis_cmd->callback([&] {
    active = "basis";
    const auto cfg = resolve_config(basis_opts);
    spcube::validate(cfg);
    const int m = resolve_m(cfg, basis_opts);
    const auto inputs = resolve_inputs(cfg, basis_data, basis_opts.setting - 1,
                                       basis_opts.replicate, m);
    const std::string out = basis_opts.out.empty() ? "basis.bin" : basis_opts.out;
    spcube::io::write_matrix_bin(out, inputs.basis.phi);
    if (!basis_values.empty())
      spcube::io::write_matrix_csv(basis_values, inputs.basis.eigenvalues);
    emit_written({out});
  });

  auto* base_cmd = app.add_subcommand(
      "baseline", "conjugate Gibbs linear model on the augmented design; "
                  "prints its test scores as JSON");
  add_common(base_cmd, &base_opts);
  base_cmd->add_option("--data", base_data, "dataset CSV (default: simulate)")
      ->check(CLI::ExistingFile);
  base_cmd->add_option("--out", base_opts.out,
                       "write the score JSON here instead of stdout");
  base_cmd->callback([&] {
    active = "baseline";
    const auto cfg = resolve_config(base_opts);
    spcube::validate(cfg);
    const int m = resolve_m(cfg, base_opts);
    const auto inputs = resolve_inputs(cfg, base_data, base_opts.setting - 1,
                                       base_opts.replicate, m);
    const auto rec = spcube::baseline_for_replicate(
        cfg, base_opts.setting - 1, m, base_opts.replicate, inputs);
    const std::string text = spcube::score_record_json(rec) + "\n";
    if (base_opts.out.empty()) {
      std::cout << text;
    } else {
      spcube::io::write_text_file(base_opts.out, text);
      emit_written({base_opts.out});
    }
  });

  auto* grid_cmd = app.add_subcommand(
      "grid", "score every (decay, dropout, k) grid point for one replicate "
              "and write per-variant CSVs plus the baseline JSON");
  add_common(grid_cmd, &grid_opts);
  grid_cmd->add_option("--out", grid_opts.out, "output directory");
  bool grid_summaries = false;
  grid_cmd->add_flag("--summaries", grid_summaries,
                     "also write per-test-point predictive summaries "
                     "(single-configuration grids only)");
  grid_cmd->callback([&] {
    active = "grid";
    auto cfg = resolve_config(grid_opts);
    cfg.persist_summaries = grid_summaries;
    if (!grid_opts.variant.empty())
      cfg.variants = {spcube::parse_variant(grid_opts.variant)};
    spcube::validate(cfg);
    const int m = resolve_m(cfg, grid_opts);
    const int si = grid_opts.setting - 1;
    const auto inputs = spcube::prepare_replicate(cfg, si, grid_opts.replicate, m);
    const auto result =
        spcube::run_replicate_with(cfg, si, m, grid_opts.replicate, inputs);
    const std::string out = grid_opts.out.empty() ? "grid_out" : grid_opts.out;
    const auto configs = spcube::enumerate_grid(cfg.grid);
    fs::create_directories(out);
    spcube::io::write_text_file(out + "/baseline.json",
                                spcube::score_record_json(result.baseline) + "\n");
    for (const auto& [tag, records] : result.variant_scores) {
      const std::string vdir = out + "/" + spcube::variant_name(tag);
      fs::create_directories(vdir);
      spcube::write_scores_csv(vdir + "/scores.csv", grid_opts.replicate, tag,
                               configs, records);
      if (grid_summaries)
        spcube::io::write_text_file(
            vdir + "/summaries.csv",
            spcube::summaries_csv(result.summaries.at(tag),
                                  cfg.grid.k_values.front()));
    }
    emit_written({out});
  });

  auto* cube_cmd = app.add_subcommand(
      "cube", "recursive cube search over previously written score tables");
  add_common(cube_cmd, &cube_opts, false);
  cube_cmd
      ->add_option("--scores", cube_scores,
                   "scores CSV, repeatable (one per replicate)")
      ->required()
      ->check(CLI::ExistingFile);
  cube_cmd
      ->add_option("--baseline", cube_baselines,
                   "baseline score JSON, parallel to --scores")
      ->required()
      ->check(CLI::ExistingFile);
  cube_cmd->add_option("--out", cube_opts.out, "output directory");
  cube_cmd->callback([&] {
    active = "cube";
    const auto cfg = resolve_config(cube_opts);
    spcube::validate(cfg);
    if (cube_scores.size() != cube_baselines.size())
      throw std::runtime_error("--scores and --baseline counts differ");
    const std::string out = cube_opts.out.empty() ? "cube_out" : cube_opts.out;
    const auto configs = spcube::enumerate_grid(cfg.grid);
    std::vector<std::vector<spcube::Cube>> rankings;
    for (std::size_t i = 0; i < cube_scores.size(); ++i) {
      const auto records = spcube::read_scores_csv(cube_scores[i], configs);
      const auto baseline = spcube::score_record_from_json(
          spcube::io::read_text_file(cube_baselines[i]));
      std::vector<double> raw(records.size());
      for (std::size_t j = 0; j < records.size(); ++j) raw[j] = records[j].mis;
      const auto table = spcube::normalize_scores(configs, raw, baseline.mis);
      const auto search = spcube::cube_search(table, cfg.grid, cfg.cube);
      const std::string rdir = out + "/rep_" + std::to_string(i);
      fs::create_directories(rdir);
      std::ostringstream log;
      for (const auto& c : search.visited)
        log << spcube::cube_log_line(c) << '\n';
      spcube::io::write_text_file(rdir + "/cubes.jsonl", log.str());
      spcube::io::write_text_file(rdir + "/ranked.json",
                                  spcube::ranked_cubes_json(search.ranked));
      rankings.push_back(search.ranked);
    }
    const auto region = spcube::aggregate_subregions(
        rankings, cfg.aggregate_top_n, cfg.aggregate_keep);
    spcube::io::write_text_file(out + "/subregion.json",
                                spcube::subregion_json(region));
    emit_written({out});
  });

  auto* study_cmd = app.add_subcommand(
      "study", "full study: every setting, basis dimension, replicate and "
               "variant, with per-replicate artifacts and reports");
  add_common(study_cmd, &study_opts);
  study_cmd->add_option("--out", study_opts.out, "output directory");
  study_cmd->callback([&] {
    active = "study";
    auto cfg = resolve_config(study_opts);
    if (!study_opts.out.empty()) cfg.output_dir = study_opts.out;
    if (study_cmd->count("--setting")) cfg.setting_filter = study_opts.setting;
    if (study_opts.m > 0) cfg.basis_dims = {study_opts.m};
    if (!study_opts.variant.empty())
      cfg.variants = {spcube::parse_variant(study_opts.variant)};
    spcube::run_study(cfg);
    emit_written({cfg.output_dir});
  });

  auto* report_cmd = app.add_subcommand(
      "report", "rebuild result tables and subregions from study artifacts");
  add_common(report_cmd, &report_opts);
  report_cmd->add_option("--out", report_opts.out,
                         "study output directory to read and write");
  report_cmd->callback([&] {
    active = "report";
    auto cfg = resolve_config(report_opts);
    if (!report_opts.out.empty()) cfg.output_dir = report_opts.out;
    if (report_cmd->count("--setting"))
      cfg.setting_filter = report_opts.setting;
    if (report_opts.m > 0) cfg.basis_dims = {report_opts.m};
    if (!report_opts.variant.empty())
      cfg.variants = {spcube::parse_variant(report_opts.variant)};
    spcube::write_reports(cfg);
    emit_written({cfg.output_dir + "/report"});
  });

  auto* load_cmd = app.add_subcommand(
      "load", "validate an external tabular dataset and rewrite it in the "
              "canonical CSV layout");
  add_common(load_cmd, &load_opts, false);
  load_cmd->add_option("--data", load_data, "input CSV")
      ->required()
      ->check(CLI::ExistingFile);
  load_cmd->add_option("--out", load_opts.out, "output CSV path");
  load_cmd->add_option("--train-fraction", load_fraction,
                       "train share when the file has no split column");
  load_cmd->add_flag("--log-transform", load_log,
                     "replace the response by its natural log");
  load_cmd->callback([&] {
    active = "load";
    const auto cfg = resolve_config(load_opts);
    const auto ds = spcube::io::load_tabular_dataset(
        load_data, load_fraction, cfg.seed_root, load_log);
    const std::string out = load_opts.out.empty() ? "dataset.csv" : load_opts.out;
    spcube::io::write_dataset_csv(out, ds);
    json j;
    j["written"] = {out};
    j["rows"] = ds.n();
    j["covariates"] = ds.p();
    j["train"] = ds.train_idx.size();
    j["test"] = ds.test_idx.size();
    std::cout << j.dump() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    json j;
    j["command"] = active;
    j["error"] = std::string(e.what());
    std::cerr << j.dump() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    json j;
    j["command"] = active;
    j["error"] = std::string(e.what());
    std::cerr << j.dump() << std::endl;
    return 1;
  }
  return 0;
}
