#ifndef SPCUBE_MC_DROPOUT_HPP
#define SPCUBE_MC_DROPOUT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "spcube/net.hpp"

namespace spcube {

enum class UQTag { EU, FA, LA };

/* Uncertainty variant.  EU: epistemic only.  FA: fixed aleatoric variance
 * 1/tau with tau = p l^2 / (2 N lambda).  LA: learned per-pass aleatoric
 * variance from the two-headed network.
 */
struct UQVariant {
  UQTag tag = UQTag::EU;
  double fa_length_scale = 1.0;  // l, FA only
  int fa_n_train = 0;            // N, FA only
};

/* Raw stochastic forward passes at one input.  ale_var is empty for
 * single-headed networks, else exp(logvar) per pass.
 */
struct PassOutputs {
  Eigen::VectorXd mean;     // length T
  Eigen::VectorXd ale_var;  // length T or 0
};

/* T stochastic passes with fresh inverted-dropout masks at rate
 * dropout_rate.  x_row is one unstandardized input row; deterministic
 * given seed (callers derive one seed per test point).
 */
PassOutputs predictive_passes(const TrainedNet& net,
                              const Eigen::RowVectorXd& x_row, int T,
                              double dropout_rate, std::uint64_t seed);

// tau = p l^2 / (2 N lambda); rejects p = 0 or lambda = 0 (variance 1/tau blows up).
double fa_precision(double dropout_rate, double length_scale, int n_train,
                    double weight_decay);

struct PredictiveSummary {
  double mean = 0.0;
  double var_epi = 0.0;  // population variance of passes (divisor T)
  double var_ale = 0.0;
  double var_tot = 0.0;
  Eigen::VectorXd samples;  // the raw pass means, kept for CRPS
};

/* Combine passes under a variant.  dropout_rate and weight_decay are the
 * training values; FA needs both, LA needs neither beyond the passes.
 */
PredictiveSummary summarize(const PassOutputs& passes, const UQVariant& variant,
                            double weight_decay, double dropout_rate);

// mean +/- k * sqrt(var_tot)
std::pair<double, double> interval(const PredictiveSummary& summary, double k);

/* Predictive samples fed to CRPS.  EU and FA use the raw pass means (their
 * CRPS coincides by construction); LA adds one Gaussian draw per pass with
 * that pass's learned aleatoric SD.
 */
std::vector<double> crps_samples_for_variant(const PassOutputs& passes,
                                             const UQVariant& variant,
                                             std::uint64_t seed);

// CSV with header mu,var_epi,var_ale,var_tot,L,U; one row per test point,
// intervals at multiplier k.
std::string summaries_csv(const std::vector<PredictiveSummary>& summaries,
                          double k);

}  // namespace spcube

#endif  // SPCUBE_MC_DROPOUT_HPP
