#include "spcube/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "spcube/io.hpp"
#include "spcube/mc_dropout.hpp"
#include "spcube/net.hpp"
#include "spcube/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace spcube {

namespace {

/* Coarse seed-derivation tags.  The dataset tag takes (setting, replicate)
 * only: every basis dimension analyzes the same replicate dataset.
 */
constexpr std::uint64_t kTagDataset = 11;
constexpr std::uint64_t kTagReplicate = 12;
constexpr std::uint64_t kTagNet = 21;
constexpr std::uint64_t kTagPasses = 22;
constexpr std::uint64_t kTagGibbs = 23;
constexpr std::uint64_t kTagPredictive = 24;

// head index used in seed derivations
constexpr std::uint64_t kHeadMean = 0;
constexpr std::uint64_t kHeadTwo = 1;

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto body = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct DesignSplit {
  Eigen::MatrixXd x_train, x_test;
  Eigen::VectorXd z_train, z_test;
};

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

Eigen::VectorXd entries_of(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

double sample_variance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() /
         static_cast<double>(v.size() - 1);
}

std::string variant_dir(const ExperimentConfig& cfg, int setting_idx, int m,
                        int replicate_idx, UQTag variant) {
  return replicate_dir(cfg, setting_idx, m, replicate_idx) + "/" +
         variant_name(variant);
}

std::string setting_m_dir(const ExperimentConfig& cfg, int setting_idx, int m) {
  return cfg.output_dir + "/setting_" + std::to_string(setting_idx + 1) +
         "/m_" + std::to_string(m);
}

json cube_to_json(const Cube& cube) {
  json j;
  j["id"] = cube.id;
  j["parent"] = cube.parent_id;
  j["depth"] = cube.depth;
  j["bounds"] = {{"lambda_log10", {cube.lo[0], cube.hi[0]}},
                 {"dropout", {cube.lo[1], cube.hi[1]}},
                 {"k", {cube.lo[2], cube.hi[2]}}};
  j["lower_open"] = {cube.lower_open[0], cube.lower_open[1], cube.lower_open[2]};
  if (cube.has_stats) {
    j["s_bar"] = cube.s_bar;
    j["w"] = cube.w;
    j["o"] = cube.o;
    j["n_points"] = cube.n_points;
  } else {
    j["s_bar"] = nullptr;
    j["w"] = nullptr;
    j["o"] = nullptr;
    j["n_points"] = cube.n_points;
  }
  j["stall"] = cube.stall;
  j["finished_reason"] = cube.finished_reason;
  return j;
}

Cube cube_from_json(const json& j) {
  Cube cube;
  cube.id = j.at("id").get<int>();
  cube.parent_id = j.at("parent").get<int>();
  cube.depth = j.at("depth").get<int>();
  const auto& b = j.at("bounds");
  cube.lo[0] = b.at("lambda_log10").at(0).get<double>();
  cube.hi[0] = b.at("lambda_log10").at(1).get<double>();
  cube.lo[1] = b.at("dropout").at(0).get<double>();
  cube.hi[1] = b.at("dropout").at(1).get<double>();
  cube.lo[2] = b.at("k").at(0).get<double>();
  cube.hi[2] = b.at("k").at(1).get<double>();
  for (int i = 0; i < 3; ++i)
    cube.lower_open[i] = j.at("lower_open").at(i).get<bool>();
  if (!j.at("o").is_null()) {
    cube.s_bar = j.at("s_bar").get<double>();
    cube.w = j.at("w").get<double>();
    cube.o = j.at("o").get<double>();
    cube.has_stats = true;
  }
  cube.n_points = j.at("n_points").get<int>();
  cube.stall = j.at("stall").get<int>();
  cube.finished_reason = j.at("finished_reason").get<std::string>();
  return cube;
}

// Tolerant box membership on the subregion envelope (decay compared in log10).
bool config_in_subregion(const Subregion& region, const HyperConfig& h) {
  const double eps = 1e-9;
  const double lam = std::log10(h.weight_decay);
  const double wlo = std::log10(region.wdr_lo), whi = std::log10(region.wdr_hi);
  auto inside = [eps](double v, double lo, double hi) {
    const double slack = eps * std::max({1.0, std::abs(lo), std::abs(hi)});
    return v >= lo - slack && v <= hi + slack;
  };
  return inside(lam, wlo, whi) && inside(h.dropout_rate, region.dr_lo, region.dr_hi) &&
         inside(h.k, region.sdr_lo, region.sdr_hi);
}

}  // namespace

SimConfig replicate_sim_config(const ExperimentConfig& cfg, int setting_idx,
                               int replicate_idx) {
  if (setting_idx < 0 || setting_idx >= static_cast<int>(cfg.settings.size()))
    throw std::invalid_argument("prepare_replicate: setting index out of range");
  const Setting& setting = cfg.settings[setting_idx];
  SimConfig sim = cfg.sim;
  sim.matern.nu = setting.nu;
  sim.effective_range = setting.effective_range;
  sim.seed = rng::derive_seed(
      cfg.seed_root, {kTagDataset, static_cast<std::uint64_t>(setting_idx),
                      static_cast<std::uint64_t>(replicate_idx)});
  return sim;
}

ReplicateInputs prepare_replicate(const ExperimentConfig& cfg, int setting_idx,
                                  int replicate_idx, int m_max) {
  ReplicateInputs inputs;
  inputs.ds =
      simulate_dataset(replicate_sim_config(cfg, setting_idx, replicate_idx));
  const Setting& setting = cfg.settings[setting_idx];

  // Basis covariance uses unit variance: eigenvectors are scale invariant,
  // so sigma2 only rescales the (reported) eigenvalues.
  MaternParams basis_params{1.0,
                            effective_range_to_rho(setting.effective_range,
                                                   setting.nu),
                            setting.nu};
  inputs.basis = eigen_basis(build_cov_matrix(inputs.ds.locations, basis_params),
                             m_max, basis_params);
  return inputs;
}

namespace {

DesignSplit split_design(const ReplicateInputs& inputs, int m) {
  if (m < 1 || m > inputs.basis.phi.cols())
    throw std::invalid_argument(
        "run_replicate: m exceeds the prepared basis width");
  const SpatialDataset& ds = inputs.ds;
  const Eigen::MatrixXd x_tilde =
      augment_design(ds.X, inputs.basis.phi.leftCols(m));
  DesignSplit split;
  split.x_train = rows_of(x_tilde, ds.train_idx);
  split.x_test = rows_of(x_tilde, ds.test_idx);
  split.z_train = entries_of(ds.z, ds.train_idx);
  split.z_test = entries_of(ds.z, ds.test_idx);
  return split;
}

std::uint64_t replicate_key(const ExperimentConfig& cfg, int setting_idx, int m,
                            int replicate_idx) {
  return rng::derive_seed(
      cfg.seed_root, {kTagReplicate, static_cast<std::uint64_t>(setting_idx),
                      static_cast<std::uint64_t>(m),
                      static_cast<std::uint64_t>(replicate_idx)});
}

}  // namespace

ScoreRecord baseline_for_replicate(const ExperimentConfig& cfg, int setting_idx,
                                   int m, int replicate_idx,
                                   const ReplicateInputs& inputs) {
  const std::uint64_t rep_key = replicate_key(cfg, setting_idx, m, replicate_idx);
  const DesignSplit split = split_design(inputs, m);
  GibbsConfig gibbs_cfg = cfg.baseline;
  gibbs_cfg.priors.tau2_scale = sample_variance(split.z_train);
  gibbs_cfg.seed = rng::derive_seed(rep_key, {kTagGibbs});
  const PosteriorDraws draws = gibbs_sample(split.x_train, split.z_train, gibbs_cfg);
  const Eigen::MatrixXd pred = posterior_predictive(
      draws, split.x_test, rng::derive_seed(rep_key, {kTagPredictive}));
  return baseline_scores(pred, split.z_test, cfg.alpha, cfg.gamma);
}

ReplicateResult run_replicate_with(const ExperimentConfig& cfg, int setting_idx,
                                   int m, int replicate_idx,
                                   const ReplicateInputs& inputs) {
  const std::uint64_t rep_key = replicate_key(cfg, setting_idx, m, replicate_idx);
  const DesignSplit split = split_design(inputs, m);
  const Eigen::MatrixXd& x_train = split.x_train;
  const Eigen::MatrixXd& x_test = split.x_test;
  const Eigen::VectorXd& z_train = split.z_train;
  const Eigen::VectorXd& z_test = split.z_test;
  const int n_train = static_cast<int>(z_train.size());
  const int n_test = static_cast<int>(z_test.size());

  ReplicateResult result;
  result.baseline =
      baseline_for_replicate(cfg, setting_idx, m, replicate_idx, inputs);

  const bool want_mean_head =
      std::count(cfg.variants.begin(), cfg.variants.end(), UQTag::EU) > 0 ||
      std::count(cfg.variants.begin(), cfg.variants.end(), UQTag::FA) > 0;
  const bool want_two_head =
      std::count(cfg.variants.begin(), cfg.variants.end(), UQTag::LA) > 0;

  const auto& decays = cfg.grid.weight_decay_values;
  const auto& rates = cfg.grid.dropout_values;
  const auto& ks = cfg.grid.k_values;
  const int n_cells = static_cast<int>(decays.size() * rates.size());
  const int n_k = static_cast<int>(ks.size());

  if (cfg.persist_summaries && (n_cells != 1 || n_k != 1))
    throw std::invalid_argument(
        "run_replicate: capturing summaries needs a single-configuration grid");

  for (UQTag v : cfg.variants)
    result.variant_scores[v].resize(static_cast<std::size_t>(n_cells) * n_k);

  auto run_cell = [&](int cell) {
    const double lambda = decays[cell / rates.size()];
    const double p = rates[cell % rates.size()];

    struct HeadJob {
      std::uint64_t head_tag;
      Loss loss;
      std::vector<UQTag> variants;
    };
    std::vector<HeadJob> jobs;
    if (want_mean_head) {
      HeadJob job{kHeadMean, Loss::mse, {}};
      for (UQTag v : cfg.variants)
        if (v == UQTag::EU || v == UQTag::FA) job.variants.push_back(v);
      jobs.push_back(std::move(job));
    }
    if (want_two_head) jobs.push_back({kHeadTwo, Loss::gaussian_nll, {UQTag::LA}});

    for (const HeadJob& job : jobs) {
      TrainConfig tc = cfg.train;
      tc.dropout_rate = p;
      tc.weight_decay = lambda;
      tc.loss = job.loss;
      tc.seed = rng::derive_seed(
          rep_key, {kTagNet, static_cast<std::uint64_t>(cell), job.head_tag});
      const TrainedNet net = train(x_train, z_train, tc);

      // Per test point: pass mean, per-variant total SD and CRPS.
      std::vector<PredictiveSummary> summaries(
          job.variants.size() * static_cast<std::size_t>(n_test));
      std::vector<double> crps_of(summaries.size());
      Eigen::VectorXd mu(n_test);

      for (int i = 0; i < n_test; ++i) {
        const std::uint64_t point_seed = rng::derive_seed(
            rep_key, {kTagPasses, static_cast<std::uint64_t>(cell),
                      job.head_tag, static_cast<std::uint64_t>(i)});
        const PassOutputs passes = predictive_passes(
            net, x_test.row(i), cfg.mc_passes, p, point_seed);
        for (std::size_t vi = 0; vi < job.variants.size(); ++vi) {
          UQVariant variant;
          variant.tag = job.variants[vi];
          variant.fa_length_scale = cfg.fa_length_scale;
          variant.fa_n_train = n_train;
          const std::size_t slot = vi * n_test + i;
          summaries[slot] = summarize(passes, variant, lambda, p);
          crps_of[slot] = crps_from_samples(
              crps_samples_for_variant(passes, variant, point_seed), z_test(i));
        }
        mu(i) = summaries[i].mean;  // identical across variants of one head
      }

      for (std::size_t vi = 0; vi < job.variants.size(); ++vi) {
        const UQTag tag = job.variants[vi];
        double crps_mean = 0.0;
        for (int i = 0; i < n_test; ++i) crps_mean += crps_of[vi * n_test + i];
        crps_mean /= n_test;
        const double rmse_val = rmse(mu, z_test);

        for (int ki = 0; ki < n_k; ++ki) {
          Eigen::VectorXd lo(n_test), hi(n_test);
          for (int i = 0; i < n_test; ++i) {
            const auto [l, u] = interval(summaries[vi * n_test + i], ks[ki]);
            lo(i) = l;
            hi(i) = u;
          }
          ScoreRecord rec;
          rec.alpha = cfg.alpha;
          rec.gamma = cfg.gamma;
          rec.mis = mmis(lo, hi, z_test, cfg.alpha, cfg.gamma);
          rec.crps = crps_mean;
          rec.rmse = rmse_val;
          rec.width = mean_width(lo, hi);
          rec.coverage = coverage(lo, hi, z_test);
          result.variant_scores[tag][static_cast<std::size_t>(cell) * n_k + ki] =
              rec;
        }
        if (cfg.persist_summaries)
          result.summaries[tag] =
              std::vector<PredictiveSummary>(summaries.begin() + vi * n_test,
                                             summaries.begin() + (vi + 1) * n_test);
      }
    }
  };

  parallel_for(n_cells, cfg.workers, run_cell);
  return result;
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, int setting_idx,
                              int m, int replicate_idx) {
  const ReplicateInputs inputs =
      prepare_replicate(cfg, setting_idx, replicate_idx, m);
  return run_replicate_with(cfg, setting_idx, m, replicate_idx, inputs);
}

std::string replicate_dir(const ExperimentConfig& cfg, int setting_idx, int m,
                          int replicate_idx) {
  return setting_m_dir(cfg, setting_idx, m) + "/rep_" +
         std::to_string(replicate_idx);
}

bool replicate_complete(const ExperimentConfig& cfg, int setting_idx, int m,
                        int replicate_idx) {
  const std::string base = replicate_dir(cfg, setting_idx, m, replicate_idx);
  if (!fs::exists(base + "/dataset.csv") || !fs::exists(base + "/baseline.json"))
    return false;
  for (UQTag v : cfg.variants) {
    const std::string vdir = base + "/" + variant_name(v);
    if (!fs::exists(vdir + "/scores.csv") || !fs::exists(vdir + "/cubes.jsonl") ||
        !fs::exists(vdir + "/ranked.json"))
      return false;
  }
  return true;
}

void persist_replicate(const ExperimentConfig& cfg, int setting_idx, int m,
                       int replicate_idx, const ReplicateInputs& inputs,
                       const ReplicateResult& result) {
  const std::string base = replicate_dir(cfg, setting_idx, m, replicate_idx);
  fs::create_directories(base);
  io::write_dataset_csv(base + "/dataset.csv", inputs.ds);
  io::write_text_file(base + "/baseline.json",
                      score_record_json(result.baseline) + "\n");
  const auto configs = enumerate_grid(cfg.grid);
  for (const auto& [tag, records] : result.variant_scores) {
    const std::string vdir = base + "/" + variant_name(tag);
    fs::create_directories(vdir);
    write_scores_csv(vdir + "/scores.csv", replicate_idx, tag, configs, records);
  }
}

std::string score_record_json(const ScoreRecord& rec) {
  json j;
  j["mis"] = rec.mis;
  j["crps"] = rec.crps;
  j["rmse"] = rec.rmse;
  j["width"] = rec.width;
  j["coverage"] = rec.coverage;
  return j.dump();
}

ScoreRecord score_record_from_json(const std::string& text) {
  const json j = json::parse(text);
  ScoreRecord rec;
  rec.mis = j.at("mis").get<double>();
  rec.crps = j.at("crps").get<double>();
  rec.rmse = j.at("rmse").get<double>();
  rec.width = j.at("width").get<double>();
  rec.coverage = j.at("coverage").get<double>();
  return rec;
}

void write_scores_csv(const std::string& path, int replicate_idx, UQTag variant,
                      const std::vector<HyperConfig>& configs,
                      const std::vector<ScoreRecord>& records) {
  if (configs.size() != records.size())
    throw std::invalid_argument("write_scores_csv: configs/records misaligned");
  std::ostringstream out;
  out << "replicate,variant,weight_decay,dropout,k,mis,crps,rmse,width,coverage\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& h = configs[i];
    const auto& r = records[i];
    out << replicate_idx << ',' << variant_name(variant) << ','
        << io::format_double(h.weight_decay) << ','
        << io::format_double(h.dropout_rate) << ',' << io::format_double(h.k)
        << ',' << io::format_double(r.mis) << ',' << io::format_double(r.crps)
        << ',' << io::format_double(r.rmse) << ',' << io::format_double(r.width)
        << ',' << io::format_double(r.coverage) << '\n';
  }
  io::write_text_file(path, out.str());
}

std::vector<ScoreRecord> read_scores_csv(const std::string& path,
                                         const std::vector<HyperConfig>& configs) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty scores file");
  std::vector<ScoreRecord> records;
  records.reserve(configs.size());
  std::size_t idx = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 10)
      throw std::runtime_error(path + ": bad row '" + line + "'");
    if (idx >= configs.size())
      throw std::runtime_error(path + ": more rows than grid configurations");
    const HyperConfig& h = configs[idx];
    auto close = [](double a, double b) {
      return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    if (!close(std::stod(fields[2]), h.weight_decay) ||
        !close(std::stod(fields[3]), h.dropout_rate) ||
        !close(std::stod(fields[4]), h.k))
      throw std::runtime_error(path + ": row " + std::to_string(idx) +
                               " does not match the configured grid");
    ScoreRecord rec;
    rec.mis = std::stod(fields[5]);
    rec.crps = std::stod(fields[6]);
    rec.rmse = std::stod(fields[7]);
    rec.width = std::stod(fields[8]);
    rec.coverage = std::stod(fields[9]);
    records.push_back(rec);
    ++idx;
  }
  if (records.size() != configs.size())
    throw std::runtime_error(path + ": fewer rows than grid configurations");
  return records;
}

std::string cube_log_line(const Cube& cube) { return cube_to_json(cube).dump(); }

std::string ranked_cubes_json(const std::vector<Cube>& ranked) {
  json j;
  j["cubes"] = json::array();
  for (const Cube& c : ranked) j["cubes"].push_back(cube_to_json(c));
  return j.dump(2) + "\n";
}

std::vector<Cube> ranked_cubes_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<Cube> out;
  for (const auto& item : j.at("cubes")) out.push_back(cube_from_json(item));
  return out;
}

std::string subregion_json(const Subregion& region) {
  json j;
  j["wdr"] = {region.wdr_lo, region.wdr_hi};
  j["dr"] = {region.dr_lo, region.dr_hi};
  j["sdr"] = {region.sdr_lo, region.sdr_hi};
  j["n_top"] = region.n_top;
  j["kept"] = json::array();
  for (const auto& kc : region.kept) {
    json item;
    item["lo"] = {kc.lo[0], kc.lo[1], kc.lo[2]};
    item["hi"] = {kc.hi[0], kc.hi[1], kc.hi[2]};
    item["count"] = kc.count;
    item["mean_o"] = kc.mean_o;
    j["kept"].push_back(item);
  }
  return j.dump(2) + "\n";
}

namespace {

struct LoadedReplicate {
  ScoreRecord baseline;
  std::map<UQTag, std::vector<ScoreRecord>> variant_scores;
  std::map<UQTag, std::vector<Cube>> rankings;
};

LoadedReplicate load_replicate(const ExperimentConfig& cfg, int setting_idx,
                               int m, int replicate_idx,
                               const std::vector<HyperConfig>& configs) {
  const std::string base = replicate_dir(cfg, setting_idx, m, replicate_idx);
  LoadedReplicate loaded;
  loaded.baseline =
      score_record_from_json(io::read_text_file(base + "/baseline.json"));
  loaded.baseline.alpha = cfg.alpha;
  loaded.baseline.gamma = cfg.gamma;
  for (UQTag v : cfg.variants) {
    const std::string vdir = base + "/" + variant_name(v);
    loaded.variant_scores[v] = read_scores_csv(vdir + "/scores.csv", configs);
    loaded.rankings[v] =
        ranked_cubes_from_json(io::read_text_file(vdir + "/ranked.json"));
  }
  return loaded;
}

void run_and_persist_cubes(const ExperimentConfig& cfg, int setting_idx, int m,
                           int replicate_idx, const std::vector<HyperConfig>& configs,
                           const std::map<UQTag, std::vector<ScoreRecord>>& scores,
                           double baseline_mis,
                           std::map<UQTag, std::vector<Cube>>* rankings) {
  for (UQTag v : cfg.variants) {
    const auto& records = scores.at(v);
    std::vector<double> raw(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) raw[i] = records[i].mis;
    const ScoreTable table = normalize_scores(configs, raw, baseline_mis);
    const CubeSearchResult search = cube_search(table, cfg.grid, cfg.cube);

    const std::string vdir =
        variant_dir(cfg, setting_idx, m, replicate_idx, v);
    fs::create_directories(vdir);
    std::ostringstream log;
    for (const Cube& c : search.visited) log << cube_log_line(c) << '\n';
    io::write_text_file(vdir + "/cubes.jsonl", log.str());
    io::write_text_file(vdir + "/ranked.json", ranked_cubes_json(search.ranked));
    (*rankings)[v] = search.ranked;
  }
}

ScoreRecord mean_record(const std::vector<ScoreRecord>& records) {
  ScoreRecord mean;
  if (records.empty())
    throw std::invalid_argument("mean_record: no records");
  for (const auto& r : records) {
    mean.mis += r.mis;
    mean.crps += r.crps;
    mean.rmse += r.rmse;
    mean.width += r.width;
    mean.coverage += r.coverage;
  }
  const double n = static_cast<double>(records.size());
  mean.mis /= n;
  mean.crps /= n;
  mean.rmse /= n;
  mean.width /= n;
  mean.coverage /= n;
  mean.alpha = records.front().alpha;
  mean.gamma = records.front().gamma;
  return mean;
}

std::string fmt3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt_bound(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

/* Aggregates everything already persisted for one (setting, m): subregions
 * per variant, the results table, and their text rendering.
 */
void report_setting_m(const ExperimentConfig& cfg, int setting_idx, int m,
                      const std::vector<HyperConfig>& configs,
                      const std::vector<LoadedReplicate>& reps,
                      std::ostringstream& text_out) {
  const std::string report_dir = cfg.output_dir + "/report";
  fs::create_directories(report_dir);
  const std::string tag =
      "s" + std::to_string(setting_idx + 1) + "_m" + std::to_string(m);

  // subregions
  std::map<UQTag, Subregion> subregions;
  for (UQTag v : cfg.variants) {
    std::vector<std::vector<Cube>> rankings;
    for (const auto& rep : reps) rankings.push_back(rep.rankings.at(v));
    subregions[v] =
        aggregate_subregions(rankings, cfg.aggregate_top_n, cfg.aggregate_keep);
    io::write_text_file(setting_m_dir(cfg, setting_idx, m) + "/subregion_" +
                            variant_name(v) + ".json",
                        subregion_json(subregions[v]));
  }

  std::ostringstream sub_csv;
  sub_csv << "variant,wdr_lo,wdr_hi,dr_lo,dr_hi,sdr_lo,sdr_hi,n_top\n";
  for (UQTag v : cfg.variants) {
    const Subregion& r = subregions[v];
    sub_csv << variant_name(v) << ',' << io::format_double(r.wdr_lo) << ','
            << io::format_double(r.wdr_hi) << ',' << io::format_double(r.dr_lo)
            << ',' << io::format_double(r.dr_hi) << ','
            << io::format_double(r.sdr_lo) << ',' << io::format_double(r.sdr_hi)
            << ',' << io::format_double(r.n_top) << '\n';
  }
  io::write_text_file(report_dir + "/subregions_" + tag + ".csv", sub_csv.str());

  // results table: baseline row plus one row per variant, where a variant's
  // per-replicate record is the mean over grid configs inside its subregion
  std::ostringstream res_csv;
  res_csv << "model,mis,crps,rmse,width,coverage\n";
  std::vector<std::pair<std::string, ScoreRecord>> rows;
  {
    std::vector<ScoreRecord> base;
    for (const auto& rep : reps) base.push_back(rep.baseline);
    rows.emplace_back("baseline", mean_record(base));
  }
  for (UQTag v : cfg.variants) {
    std::vector<ScoreRecord> per_rep;
    for (const auto& rep : reps) {
      std::vector<ScoreRecord> inside;
      const auto& records = rep.variant_scores.at(v);
      for (std::size_t i = 0; i < configs.size(); ++i)
        if (config_in_subregion(subregions[v], configs[i]))
          inside.push_back(records[i]);
      per_rep.push_back(mean_record(inside));
    }
    rows.emplace_back(variant_name(v), mean_record(per_rep));
  }
  for (const auto& [name, rec] : rows)
    res_csv << name << ',' << io::format_double(rec.mis) << ','
            << io::format_double(rec.crps) << ',' << io::format_double(rec.rmse)
            << ',' << io::format_double(rec.width) << ','
            << io::format_double(rec.coverage) << '\n';
  io::write_text_file(report_dir + "/results_" + tag + ".csv", res_csv.str());

  // text rendering
  const Setting& s = cfg.settings[setting_idx];
  text_out << "== Setting " << (setting_idx + 1) << " (nu=" << s.nu
           << ", range=" << s.effective_range << "), m=" << m << " ==\n";
  {
    char line[160];
    std::snprintf(line, sizeof(line), "  %-9s %10s %10s %10s %10s %10s\n",
                  "model", "MIS", "CRPS", "RMSE", "Width", "Cvg");
    text_out << line;
    for (const auto& [name, rec] : rows) {
      std::snprintf(line, sizeof(line),
                    "  %-9s %10.3f %10.3f %10.3f %10.3f %10.3f\n", name.c_str(),
                    rec.mis, rec.crps, rec.rmse, rec.width, rec.coverage);
      text_out << line;
    }
  }
  text_out << "  subregions (per-axis envelopes of kept cubes):\n";
  for (UQTag v : cfg.variants) {
    const Subregion& r = subregions[v];
    text_out << "    " << variant_name(v) << "  WDR (" << fmt_bound(r.wdr_lo)
             << ", " << fmt_bound(r.wdr_hi) << ")  DR (" << fmt3(r.dr_lo)
             << ", " << fmt3(r.dr_hi) << ")  SDR (" << fmt3(r.sdr_lo) << ", "
             << fmt3(r.sdr_hi) << ")  N_top " << fmt3(r.n_top) << '\n';
  }
  text_out << '\n';
}

}  // namespace

void run_study(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto configs = enumerate_grid(cfg.grid);
  const int m_max = *std::max_element(cfg.basis_dims.begin(),
                                      cfg.basis_dims.end());

  // reps_by_m[m] holds one loaded replicate per replicate index
  std::map<int, std::map<int, std::vector<LoadedReplicate>>> loaded;
  for (int si = 0; si < static_cast<int>(cfg.settings.size()); ++si)
    for (int m : cfg.basis_dims)
      loaded[si][m].resize(cfg.replicates);

  for (int si = 0; si < static_cast<int>(cfg.settings.size()); ++si) {
    if (cfg.setting_filter > 0 && si != cfg.setting_filter - 1) continue;
    for (int r = 0; r < cfg.replicates; ++r) {
      bool all_complete = true;
      for (int m : cfg.basis_dims)
        all_complete = all_complete && replicate_complete(cfg, si, m, r);

      ReplicateInputs inputs;
      bool inputs_ready = false;
      if (!all_complete) {
        inputs = prepare_replicate(cfg, si, r, m_max);
        inputs_ready = true;
      }

      for (int m : cfg.basis_dims) {
        if (replicate_complete(cfg, si, m, r)) {
          loaded[si][m][r] = load_replicate(cfg, si, m, r, configs);
          continue;
        }
        if (!inputs_ready) {
          inputs = prepare_replicate(cfg, si, r, m_max);
          inputs_ready = true;
        }
        const ReplicateResult result =
            run_replicate_with(cfg, si, m, r, inputs);
        persist_replicate(cfg, si, m, r, inputs, result);

        LoadedReplicate& slot = loaded[si][m][r];
        slot.baseline = result.baseline;
        slot.variant_scores = result.variant_scores;
        run_and_persist_cubes(cfg, si, m, r, configs, result.variant_scores,
                              result.baseline.mis, &slot.rankings);
      }
    }
  }

  std::ostringstream text;
  for (int si = 0; si < static_cast<int>(cfg.settings.size()); ++si) {
    if (cfg.setting_filter > 0 && si != cfg.setting_filter - 1) continue;
    for (int m : cfg.basis_dims)
      report_setting_m(cfg, si, m, configs, loaded[si][m], text);
  }
  io::write_text_file(cfg.output_dir + "/report/tables.txt", text.str());
}

void write_reports(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto configs = enumerate_grid(cfg.grid);
  std::ostringstream text;
  for (int si = 0; si < static_cast<int>(cfg.settings.size()); ++si) {
    if (cfg.setting_filter > 0 && si != cfg.setting_filter - 1) continue;
    for (int m : cfg.basis_dims) {
      std::vector<LoadedReplicate> reps;
      for (int r = 0; r < cfg.replicates; ++r) {
        if (!replicate_complete(cfg, si, m, r))
          throw std::runtime_error(
              "report: missing artifacts for setting " + std::to_string(si + 1) +
              ", m " + std::to_string(m) + ", replicate " + std::to_string(r) +
              " (run the study first)");
        reps.push_back(load_replicate(cfg, si, m, r, configs));
      }
      report_setting_m(cfg, si, m, configs, reps, text);
    }
  }
  io::write_text_file(cfg.output_dir + "/report/tables.txt", text.str());
}

}  // namespace spcube
