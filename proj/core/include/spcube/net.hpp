#ifndef SPCUBE_NET_HPP
#define SPCUBE_NET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace spcube {

enum class Head { mean_only, mean_and_logvar };
enum class Loss { mse, gaussian_nll };

/* Two-hidden-layer ReLU MLP with an identity output layer.  The two-headed
 * variant adds a second output unit carrying log sigma_a^2 (log variance,
 * so positivity holds by construction).
 */
struct NetArchitecture {
  int input_dim = 0;
  int h1 = 0;
  int h2 = 0;
  Head head = Head::mean_only;

  int output_dim() const { return head == Head::mean_and_logvar ? 2 : 1; }
};

// h1 = min(2 * input_dim, 100), h2 = max(floor(0.8 * h1), 16).
NetArchitecture architecture(int input_dim, Head head);

/* Weights act on column batches: W1 is h1 x input_dim, so a batch is
 * input_dim x B and activations are units x B.
 */
struct NetParams {
  NetArchitecture arch;
  Eigen::MatrixXd W1, W2, W3;
  Eigen::VectorXd b1, b2, b3;
};

// He-scaled normal weights, zero biases, deterministic in seed.
NetParams init_params(const NetArchitecture& arch, std::uint64_t seed);

/* Bernoulli(1-rate) masks for the two hidden layers, entries in {0,1}.
 * Forward rescales surviving activations by 1/(1-rate) (inverted dropout).
 */
struct DropoutMasks {
  Eigen::MatrixXd m1;  // h1 x B
  Eigen::MatrixXd m2;  // h2 x B
};

DropoutMasks sample_masks(const NetArchitecture& arch, Eigen::Index batch,
                          double rate, std::mt19937_64& eng);

struct ForwardCache {
  Eigen::MatrixXd z1, a1;  // pre-activation and (masked) activation, h1 x B
  Eigen::MatrixXd z2, a2;  // h2 x B
  Eigen::MatrixXd out;     // output_dim x B; row 0 mean, row 1 log variance
};

/* Forward pass over a column batch.  masks == nullptr runs the full network
 * unscaled; with masks, hidden activations become a * mask / (1 - rate).
 * Throws on non-finite intermediates.
 */
ForwardCache forward(const NetParams& params, const Eigen::MatrixXd& x,
                     const DropoutMasks* masks = nullptr, double rate = 0.0);

struct NetGrads {
  Eigen::MatrixXd W1, W2, W3;
  Eigen::VectorXd b1, b2, b3;
};

/* Batch loss and analytic gradients.
 *   mse:          mean_i (y_i - mu_i)^2
 *   gaussian_nll: mean_i [ (y_i - mu_i)^2 / (2 sigma_i^2) + log(sigma_i^2)/2 ]
 * plus (weight_decay/2) * sum_l ||W_l||_F^2 (biases unpenalized).
 */
double loss_and_grad(const NetParams& params, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y, Loss loss, double weight_decay,
                     const DropoutMasks* masks, double rate, NetGrads* grads);

struct TrainConfig {
  double dropout_rate = 0.0;   // in [0,1)
  double weight_decay = 0.0;   // lambda >= 0
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 100;
  std::uint64_t seed = 0;
  Loss loss = Loss::mse;       // gaussian_nll implies the two-headed architecture
};

/* A trained network plus the input standardization that was fitted on the
 * training covariates (responses are left unscaled).
 */
struct TrainedNet {
  NetParams params;
  Eigen::VectorXd input_mean;   // length input_dim
  Eigen::VectorXd input_scale;  // training-sample SD, floored at 1e-12
  std::vector<double> loss_curve;  // mean batch loss per epoch
};

// (X - mean) / scale, transposed to input_dim x n for column-batch forward.
Eigen::MatrixXd standardize_inputs(const TrainedNet& net,
                                   const Eigen::MatrixXd& X);

/* Mini-batch SGD with momentum 0.9 and fresh dropout masks per batch.
 * X is n x input_dim (row per observation).  Deterministic in cfg.seed;
 * throws if the loss turns non-finite, naming the epoch.
 */
TrainedNet train(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                 const TrainConfig& cfg);

}  // namespace spcube

#endif  // SPCUBE_NET_HPP
