#include "spcube/mc_dropout.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "spcube/io.hpp"
#include "spcube/rng.hpp"

namespace spcube {

PassOutputs predictive_passes(const TrainedNet& net,
                              const Eigen::RowVectorXd& x_row, int T,
                              double dropout_rate, std::uint64_t seed) {
  if (T < 2)
    throw std::invalid_argument("predictive_passes: need T >= 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw std::invalid_argument("predictive_passes: rate must lie in [0,1)");

  // One standardized column replicated T times; each column gets its own
  // mask, so a single forward call is exactly T independent passes.
  const Eigen::MatrixXd col = standardize_inputs(net, x_row);
  Eigen::MatrixXd batch = col.replicate(1, T);

  auto eng = rng::make_engine(rng::derive_seed(seed, rng::Stream::mc_pass));
  ForwardCache cache;
  if (dropout_rate > 0.0) {
    const DropoutMasks masks =
        sample_masks(net.params.arch, T, dropout_rate, eng);
    cache = forward(net.params, batch, &masks, dropout_rate);
  } else {
    cache = forward(net.params, batch);
  }

  PassOutputs passes;
  passes.mean = cache.out.row(0).transpose();
  if (net.params.arch.head == Head::mean_and_logvar)
    passes.ale_var = cache.out.row(1).array().exp().matrix().transpose();
  return passes;
}

double fa_precision(double dropout_rate, double length_scale, int n_train,
                    double weight_decay) {
  if (!(weight_decay > 0.0))
    throw std::invalid_argument("fa_precision: weight_decay must be > 0");
  if (!(dropout_rate > 0.0))
    throw std::invalid_argument("fa_precision: dropout_rate must be > 0");
  if (!(length_scale > 0.0))
    throw std::invalid_argument("fa_precision: length_scale must be > 0");
  if (n_train < 1)
    throw std::invalid_argument("fa_precision: n_train must be >= 1");
  return dropout_rate * length_scale * length_scale /
         (2.0 * static_cast<double>(n_train) * weight_decay);
}

PredictiveSummary summarize(const PassOutputs& passes, const UQVariant& variant,
                            double weight_decay, double dropout_rate) {
  const Eigen::Index T = passes.mean.size();
  if (T < 2) throw std::invalid_argument("summarize: need >= 2 passes");
  if (variant.tag == UQTag::LA && passes.ale_var.size() != T)
    throw std::invalid_argument(
        "summarize: LA needs per-pass variances from a two-headed network");

  PredictiveSummary s;
  s.mean = passes.mean.mean();
  s.var_epi = (passes.mean.array() - s.mean).square().sum() /
              static_cast<double>(T);

  switch (variant.tag) {
    case UQTag::EU:
      s.var_ale = 0.0;
      break;
    case UQTag::FA:
      s.var_ale = 1.0 / fa_precision(dropout_rate, variant.fa_length_scale,
                                     variant.fa_n_train, weight_decay);
      break;
    case UQTag::LA:
      s.var_ale = passes.ale_var.mean();
      break;
  }
  s.var_tot = s.var_epi + s.var_ale;
  s.samples = passes.mean;
  return s;
}

std::pair<double, double> interval(const PredictiveSummary& summary, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("interval: k must be > 0");
  const double half = k * std::sqrt(summary.var_tot);
  return {summary.mean - half, summary.mean + half};
}

std::vector<double> crps_samples_for_variant(const PassOutputs& passes,
                                             const UQVariant& variant,
                                             std::uint64_t seed) {
  const Eigen::Index T = passes.mean.size();
  if (T < 2)
    throw std::invalid_argument("crps_samples_for_variant: need >= 2 passes");

  std::vector<double> out(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) out[t] = passes.mean(t);
  if (variant.tag != UQTag::LA) return out;

  if (passes.ale_var.size() != T)
    throw std::invalid_argument(
        "crps_samples_for_variant: LA needs per-pass variances");
  auto eng = rng::make_engine(rng::derive_seed(seed, rng::Stream::crps_noise));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index t = 0; t < T; ++t)
    out[t] += std::sqrt(passes.ale_var(t)) * gauss(eng);
  return out;
}

std::string summaries_csv(const std::vector<PredictiveSummary>& summaries,
                          double k) {
  std::string out = "mu,var_epi,var_ale,var_tot,L,U\n";
  for (const auto& s : summaries) {
    const auto [lo, hi] = interval(s, k);
    out += io::format_double(s.mean) + ',' + io::format_double(s.var_epi) +
           ',' + io::format_double(s.var_ale) + ',' +
           io::format_double(s.var_tot) + ',' + io::format_double(lo) + ',' +
           io::format_double(hi) + '\n';
  }
  return out;
}

}  // namespace spcube
