// Microbenchmarks for the hot paths: field simulation, basis extraction,
// training, mc-dropout prediction, scoring, and the cube search.
#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "spcube/basis.hpp"
#include "spcube/cubing.hpp"
#include "spcube/matern.hpp"
#include "spcube/mc_dropout.hpp"
#include "spcube/net.hpp"
#include "spcube/scoring.hpp"
#include "spcube/simulate.hpp"

namespace {

using namespace spcube;

Eigen::MatrixXd random_locations(int n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd loc(n, 2);
  for (int i = 0; i < n; ++i) {
    loc(i, 0) = unif(eng);
    loc(i, 1) = unif(eng);
  }
  return loc;
}

MaternParams setting1_params() {
  return {1.0, effective_range_to_rho(0.3, 0.5), 0.5};
}

void bm_cov_matrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd loc = random_locations(n, 7);
  const MaternParams params = setting1_params();
  for (auto _ : state)
    benchmark::DoNotOptimize(build_cov_matrix(loc, params));
}
BENCHMARK(bm_cov_matrix)->Arg(250)->Arg(500)->Arg(1000);

void bm_simulate_gp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd loc = random_locations(n, 7);
  const MaternParams params = setting1_params();
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_gp(loc, params, ++seed));
}
BENCHMARK(bm_simulate_gp)->Arg(250)->Arg(500);

void bm_eigen_basis(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Eigen::MatrixXd loc = random_locations(500, 7);
  const Eigen::MatrixXd cov = build_cov_matrix(loc, setting1_params());
  for (auto _ : state)
    benchmark::DoNotOptimize(eigen_basis(cov, m));
}
BENCHMARK(bm_eigen_basis)->Arg(25)->Arg(135);

void bm_train_epoch(benchmark::State& state) {
  const int n = 512, dim = 27;
  std::mt19937_64 eng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, dim);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) X(i, j) = gauss(eng);
    z(i) = gauss(eng);
  }
  TrainConfig cfg;
  cfg.dropout_rate = 0.1;
  cfg.weight_decay = 1e-4;
  cfg.batch_size = 256;
  cfg.epochs = 1;
  for (auto _ : state) {
    cfg.seed += 1;
    benchmark::DoNotOptimize(train(X, z, cfg));
  }
}
BENCHMARK(bm_train_epoch);

void bm_predictive_passes(benchmark::State& state) {
  const int dim = 27;
  const NetArchitecture arch = architecture(dim, Head::mean_only);
  TrainedNet net;
  net.params = init_params(arch, 5);
  net.input_mean = Eigen::VectorXd::Zero(dim);
  net.input_scale = Eigen::VectorXd::Ones(dim);
  const Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(dim, 0.3);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        predictive_passes(net, x, 500, 0.1, ++seed));
}
BENCHMARK(bm_predictive_passes);

void bm_crps(benchmark::State& state) {
  std::mt19937_64 eng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> samples(2500);
  for (double& s : samples) s = gauss(eng);
  for (auto _ : state)
    benchmark::DoNotOptimize(crps_from_samples(samples, 0.37));
}
BENCHMARK(bm_crps);

void bm_cube_search(benchmark::State& state) {
  HyperGrid grid;
  for (int i = 0; i < 10; ++i)
    grid.weight_decay_values.push_back(std::pow(10.0, -10.0 + i));
  for (int i = 0; i < 9; ++i) grid.dropout_values.push_back(0.1 * (i + 1));
  for (int i = 0; i < 17; ++i) grid.k_values.push_back(1.0 + 0.5625 * i);
  auto configs = enumerate_grid(grid);
  std::vector<double> raw(configs.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& h = configs[i];
    raw[i] = 1.5 + 0.3 * std::sin(10.0 * std::log10(h.weight_decay)) +
             0.4 * std::cos(7.0 * h.dropout_rate) + 0.2 * std::sin(h.k);
  }
  const ScoreTable table = normalize_scores(configs, raw, 1.5);
  const CubeSearchConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(cube_search(table, grid, cfg));
}
BENCHMARK(bm_cube_search);

}  // namespace

BENCHMARK_MAIN();
