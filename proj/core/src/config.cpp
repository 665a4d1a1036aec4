#include "spcube/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace spcube {

namespace {

std::vector<Setting> parse_settings(const io::Ini& ini) {
  // Entries look like "0.5:0.3"; the list position is the setting number.
  const auto raw = ini.get_strings(
      "study.settings", {"0.5:0.3", "1.5:0.3", "0.5:0.6", "1.5:0.6"});
  std::vector<Setting> out;
  for (const auto& item : raw) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("config study.settings: expected nu:range, got '" +
                               item + "'");
    Setting s;
    s.nu = std::stod(item.substr(0, colon));
    s.effective_range = std::stod(item.substr(colon + 1));
    out.push_back(s);
  }
  return out;
}

}  // namespace

UQTag parse_variant(const std::string& name) {
  if (name == "EU" || name == "eu") return UQTag::EU;
  if (name == "FA" || name == "fa") return UQTag::FA;
  if (name == "LA" || name == "la") return UQTag::LA;
  throw std::runtime_error("unknown variant '" + name + "' (want EU, FA or LA)");
}

std::string variant_name(UQTag tag) {
  switch (tag) {
    case UQTag::EU: return "EU";
    case UQTag::FA: return "FA";
    case UQTag::LA: return "LA";
  }
  throw std::logic_error("variant_name: bad tag");
}

ExperimentConfig default_config() {
  return config_from_ini(io::Ini::parse(""));
}

ExperimentConfig config_from_ini(const io::Ini& ini) {
  ExperimentConfig cfg;

  cfg.settings = parse_settings(ini);
  {
    const auto dims = ini.get_doubles("study.basis_dims", {25, 135});
    for (double d : dims) cfg.basis_dims.push_back(static_cast<int>(d));
  }
  cfg.replicates = ini.get_int("study.replicates", 5);
  for (const auto& v : ini.get_strings("study.variants", {"EU", "FA", "LA"}))
    cfg.variants.push_back(parse_variant(v));
  cfg.seed_root = ini.get_u64("study.seed_root", 20260817ULL);
  cfg.output_dir = ini.get_or("study.output_dir", "out");
  cfg.workers = ini.get_int("study.workers", 1);

  const HyperGrid def = default_grid();
  cfg.grid.weight_decay_values =
      ini.get_doubles("grid.weight_decay", def.weight_decay_values);
  cfg.grid.dropout_values = ini.get_doubles("grid.dropout", def.dropout_values);
  cfg.grid.k_values = ini.get_doubles("grid.k", def.k_values);

  cfg.cube.epsilon = ini.get_double("cube.epsilon", 0.15);
  cfg.cube.t = ini.get_int("cube.t", 3);
  cfg.cube.max_rounds = ini.get_int("cube.max_rounds", 10000);
  cfg.cube.top_k = ini.get_int("cube.top_k", 10);
  cfg.cube.min_points = ini.get_int("cube.min_points", 1);
  cfg.aggregate_top_n = ini.get_int("cube.top_n", 10);
  cfg.aggregate_keep = ini.get_int("cube.keep", 5);

  cfg.sim.n_total = ini.get_int("sim.n_total", 2000);
  cfg.sim.n_train = ini.get_int("sim.n_train", 1600);
  {
    const auto beta = ini.get_doubles("sim.beta", {1.0, 1.0});
    cfg.sim.beta.resize(static_cast<Eigen::Index>(beta.size()));
    for (std::size_t i = 0; i < beta.size(); ++i)
      cfg.sim.beta(static_cast<Eigen::Index>(i)) = beta[i];
  }
  cfg.sim.covariate_low = ini.get_double("sim.covariate_low", -0.5);
  cfg.sim.covariate_high = ini.get_double("sim.covariate_high", 0.5);
  cfg.sim.noise_var = ini.get_double("sim.noise_var", 0.05);
  cfg.sim.matern.sigma2 = ini.get_double("sim.sigma2", 1.0);
  cfg.sim.matern.nu = ini.get_double("sim.nu", 0.5);
  cfg.sim.effective_range = ini.get_double("sim.effective_range", 0.3);
  cfg.sim.seed = ini.get_u64("sim.seed", 0);

  cfg.baseline.n_iter = ini.get_int("baseline.n_iter", 10000);
  cfg.baseline.n_burn = ini.get_int("baseline.n_burn", 1000);
  cfg.baseline.priors.beta_cov_diag =
      ini.get_double("baseline.beta_cov_diag", 100.0);
  cfg.baseline.priors.tau2_shape = ini.get_double("baseline.tau2_shape", 2.0);
  // tau2_scale is filled per replicate with the training response variance
  cfg.baseline.tau2_init = ini.get_double("baseline.tau2_init", 1.0);

  cfg.train.learning_rate = ini.get_double("train.learning_rate", 1e-3);
  cfg.train.batch_size = ini.get_int("train.batch_size", 256);
  cfg.train.epochs = ini.get_int("train.epochs", 100);

  cfg.mc_passes = ini.get_int("mc.passes", 500);
  cfg.fa_length_scale = ini.get_double("mc.fa_length_scale", 1.0);
  cfg.persist_summaries = ini.get_bool("mc.persist_summaries", false);
  cfg.alpha = ini.get_double("score.alpha", 0.05);
  cfg.gamma = ini.get_double("score.gamma", 1.0);

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return default_config();
  return config_from_ini(io::Ini::load(path));
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.settings.empty())
    throw std::runtime_error("config: at least one setting required");
  if (cfg.basis_dims.empty())
    throw std::runtime_error("config: at least one basis dimension required");
  if (cfg.replicates < 1)
    throw std::runtime_error("config: replicates must be >= 1");
  if (cfg.variants.empty())
    throw std::runtime_error("config: at least one variant required");
  for (int m : cfg.basis_dims)
    if (m < 1 || m >= cfg.sim.n_total)
      throw std::runtime_error("config: basis dims must satisfy 1 <= m < n_total");
  for (const auto& s : cfg.settings) {
    MaternParams mp{1.0, 1.0, s.nu};
    spcube::validate(mp);  // nu domain check
    if (!(s.effective_range > 0.0))
      throw std::runtime_error("config: effective ranges must be positive");
  }
  spcube::validate(cfg.grid);
  spcube::validate(cfg.cube);
  if (cfg.aggregate_top_n < 1 || cfg.aggregate_keep < 1)
    throw std::runtime_error("config: cube.top_n and cube.keep must be >= 1");
  if (cfg.mc_passes < 2)
    throw std::runtime_error("config: mc.passes must be >= 2");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::runtime_error("config: score.alpha must lie in (0,1)");
  if (!(cfg.gamma >= 0.0))
    throw std::runtime_error("config: score.gamma must be >= 0");
  if (cfg.workers < 1)
    throw std::runtime_error("config: workers must be >= 1");
  if (cfg.setting_filter < 0 ||
      cfg.setting_filter > static_cast<int>(cfg.settings.size()))
    throw std::runtime_error("config: setting filter out of range");
}

}  // namespace spcube
