#include "spcube/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spcube/rng.hpp"

namespace spcube {

namespace {

constexpr double kMomentum = 0.9;

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite())
    throw std::runtime_error(std::string("forward: non-finite values in ") + what);
}

Eigen::MatrixXd he_matrix(Eigen::Index rows, Eigen::Index cols,
                          std::mt19937_64& eng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sd = std::sqrt(2.0 / static_cast<double>(cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = sd * gauss(eng);
  return m;
}

// Applies mask / (1 - rate) in place when a mask is present.
void apply_mask(Eigen::MatrixXd& a, const Eigen::MatrixXd* mask, double rate) {
  if (mask == nullptr) return;
  if (mask->rows() != a.rows() || mask->cols() != a.cols())
    throw std::invalid_argument("forward: dropout mask shape mismatch");
  a.array() *= mask->array() / (1.0 - rate);
}

}  // namespace

NetArchitecture architecture(int input_dim, Head head) {
  if (input_dim < 1)
    throw std::invalid_argument("architecture: input_dim must be >= 1");
  NetArchitecture arch;
  arch.input_dim = input_dim;
  arch.h1 = std::min(2 * input_dim, 100);
  arch.h2 = std::max(static_cast<int>(std::floor(0.8 * arch.h1)), 16);
  arch.head = head;
  return arch;
}

NetParams init_params(const NetArchitecture& arch, std::uint64_t seed) {
  auto eng = rng::make_engine(rng::derive_seed(seed, rng::Stream::net_init));
  NetParams p;
  p.arch = arch;
  p.W1 = he_matrix(arch.h1, arch.input_dim, eng);
  p.W2 = he_matrix(arch.h2, arch.h1, eng);
  p.W3 = he_matrix(arch.output_dim(), arch.h2, eng);
  /* The log-variance row starts at zero so sigma_a^2 = 1 on the first
   * batch; a random start here gets amplified by exp(-s) in the NLL
   * gradient and blows up training.  The row still learns (its gradient
   * depends on a2, not on itself), and zeroing after drawing keeps the
   * mean head identical to a mean_only net with the same seed.
   */
  if (arch.head == Head::mean_and_logvar) p.W3.row(1).setZero();
  p.b1 = Eigen::VectorXd::Zero(arch.h1);
  p.b2 = Eigen::VectorXd::Zero(arch.h2);
  p.b3 = Eigen::VectorXd::Zero(arch.output_dim());
  return p;
}

DropoutMasks sample_masks(const NetArchitecture& arch, Eigen::Index batch,
                          double rate, std::mt19937_64& eng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::invalid_argument("sample_masks: rate must lie in [0,1)");
  std::bernoulli_distribution keep(1.0 - rate);
  DropoutMasks masks;
  masks.m1.resize(arch.h1, batch);
  masks.m2.resize(arch.h2, batch);
  for (Eigen::Index j = 0; j < batch; ++j)
    for (Eigen::Index i = 0; i < arch.h1; ++i)
      masks.m1(i, j) = keep(eng) ? 1.0 : 0.0;
  for (Eigen::Index j = 0; j < batch; ++j)
    for (Eigen::Index i = 0; i < arch.h2; ++i)
      masks.m2(i, j) = keep(eng) ? 1.0 : 0.0;
  return masks;
}

ForwardCache forward(const NetParams& params, const Eigen::MatrixXd& x,
                     const DropoutMasks* masks, double rate) {
  if (x.rows() != params.arch.input_dim)
    throw std::invalid_argument("forward: input has wrong feature dimension");
  if (masks != nullptr && !(rate >= 0.0 && rate < 1.0))
    throw std::invalid_argument("forward: rate must lie in [0,1)");

  ForwardCache c;
  c.z1 = (params.W1 * x).colwise() + params.b1;
  c.a1 = c.z1.cwiseMax(0.0);
  apply_mask(c.a1, masks ? &masks->m1 : nullptr, rate);

  c.z2 = (params.W2 * c.a1).colwise() + params.b2;
  c.a2 = c.z2.cwiseMax(0.0);
  apply_mask(c.a2, masks ? &masks->m2 : nullptr, rate);

  c.out = (params.W3 * c.a2).colwise() + params.b3;
  check_finite(c.out, "output layer");
  return c;
}

double loss_and_grad(const NetParams& params, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y, Loss loss, double weight_decay,
                     const DropoutMasks* masks, double rate, NetGrads* grads) {
  const Eigen::Index B = x.cols();
  if (B == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  if (y.size() != B)
    throw std::invalid_argument("loss_and_grad: responses misaligned with batch");
  if (loss == Loss::gaussian_nll && params.arch.head != Head::mean_and_logvar)
    throw std::invalid_argument(
        "loss_and_grad: gaussian_nll needs the two-headed architecture");

  const ForwardCache c = forward(params, x, masks, rate);
  const double Bd = static_cast<double>(B);

  double data_loss = 0.0;
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(c.out.rows(), B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const double mu = c.out(0, i);
    const double r = mu - y(i);
    if (loss == Loss::mse) {
      data_loss += r * r;
      dout(0, i) = 2.0 * r / Bd;
    } else {
      const double s = c.out(1, i);  // log sigma^2
      const double inv_var = std::exp(-s);
      data_loss += 0.5 * r * r * inv_var + 0.5 * s;
      dout(0, i) = r * inv_var / Bd;
      dout(1, i) = 0.5 * (1.0 - r * r * inv_var) / Bd;
    }
  }
  data_loss /= Bd;

  const double decay_loss =
      0.5 * weight_decay *
      (params.W1.squaredNorm() + params.W2.squaredNorm() + params.W3.squaredNorm());

  if (grads != nullptr) {
    grads->W3 = dout * c.a2.transpose() + weight_decay * params.W3;
    grads->b3 = dout.rowwise().sum();

    Eigen::MatrixXd da2 = params.W3.transpose() * dout;
    if (masks != nullptr) da2.array() *= masks->m2.array() / (1.0 - rate);
    Eigen::MatrixXd dz2 =
        (c.z2.array() > 0.0).select(da2, Eigen::MatrixXd::Zero(da2.rows(), B));
    grads->W2 = dz2 * c.a1.transpose() + weight_decay * params.W2;
    grads->b2 = dz2.rowwise().sum();

    Eigen::MatrixXd da1 = params.W2.transpose() * dz2;
    if (masks != nullptr) da1.array() *= masks->m1.array() / (1.0 - rate);
    Eigen::MatrixXd dz1 =
        (c.z1.array() > 0.0).select(da1, Eigen::MatrixXd::Zero(da1.rows(), B));
    grads->W1 = dz1 * x.transpose() + weight_decay * params.W1;
    grads->b1 = dz1.rowwise().sum();
  }
  return data_loss + decay_loss;
}

Eigen::MatrixXd standardize_inputs(const TrainedNet& net,
                                   const Eigen::MatrixXd& X) {
  if (X.cols() != net.input_mean.size())
    throw std::invalid_argument("standardize_inputs: feature count mismatch");
  Eigen::MatrixXd xt = X.transpose();
  xt.colwise() -= net.input_mean;
  return xt.array().colwise() / net.input_scale.array();
}

TrainedNet train(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                 const TrainConfig& cfg) {
  const Eigen::Index n = X.rows();
  if (z.size() != n)
    throw std::invalid_argument("train: responses misaligned with rows");
  if (cfg.batch_size < 1 || n < cfg.batch_size)
    throw std::invalid_argument("train: need training rows >= batch_size");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0))
    throw std::invalid_argument("train: dropout_rate must lie in [0,1)");
  if (!(cfg.weight_decay >= 0.0))
    throw std::invalid_argument("train: weight_decay must be >= 0");
  if (!(cfg.learning_rate > 0.0) || cfg.epochs < 1)
    throw std::invalid_argument("train: learning_rate/epochs out of domain");

  const Head head =
      cfg.loss == Loss::gaussian_nll ? Head::mean_and_logvar : Head::mean_only;

  TrainedNet net;
  net.input_mean = X.colwise().mean();
  net.input_scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var =
        (X.col(j).array() - net.input_mean(j)).square().sum() /
        static_cast<double>(n);
    net.input_scale(j) = std::max(std::sqrt(var), 1e-12);
  }

  const Eigen::MatrixXd xt = standardize_inputs(net, X);  // input_dim x n

  net.params = init_params(architecture(static_cast<int>(X.cols()), head),
                           cfg.seed);

  NetGrads vel{Eigen::MatrixXd::Zero(net.params.W1.rows(), net.params.W1.cols()),
               Eigen::MatrixXd::Zero(net.params.W2.rows(), net.params.W2.cols()),
               Eigen::MatrixXd::Zero(net.params.W3.rows(), net.params.W3.cols()),
               Eigen::VectorXd::Zero(net.params.b1.size()),
               Eigen::VectorXd::Zero(net.params.b2.size()),
               Eigen::VectorXd::Zero(net.params.b3.size())};
  NetGrads g = vel;

  auto shuffle_eng =
      rng::make_engine(rng::derive_seed(cfg.seed, rng::Stream::shuffle));
  auto mask_eng =
      rng::make_engine(rng::derive_seed(cfg.seed, rng::Stream::dropout_mask));

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);

  const bool use_dropout = cfg.dropout_rate > 0.0;
  net.loss_curve.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_eng);
    double epoch_loss = 0.0;
    int n_batches = 0;

    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index B = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd xb(xt.rows(), B);
      Eigen::VectorXd yb(B);
      for (Eigen::Index i = 0; i < B; ++i) {
        xb.col(i) = xt.col(order[start + i]);
        yb(i) = z(order[start + i]);
      }

      DropoutMasks masks;
      if (use_dropout)
        masks = sample_masks(net.params.arch, B, cfg.dropout_rate, mask_eng);

      const double loss = loss_and_grad(
          net.params, xb, yb, cfg.loss, cfg.weight_decay,
          use_dropout ? &masks : nullptr, cfg.dropout_rate, &g);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss diverged at epoch " +
                                 std::to_string(epoch));

      vel.W1 = kMomentum * vel.W1 - cfg.learning_rate * g.W1;
      vel.W2 = kMomentum * vel.W2 - cfg.learning_rate * g.W2;
      vel.W3 = kMomentum * vel.W3 - cfg.learning_rate * g.W3;
      vel.b1 = kMomentum * vel.b1 - cfg.learning_rate * g.b1;
      vel.b2 = kMomentum * vel.b2 - cfg.learning_rate * g.b2;
      vel.b3 = kMomentum * vel.b3 - cfg.learning_rate * g.b3;
      net.params.W1 += vel.W1;
      net.params.W2 += vel.W2;
      net.params.W3 += vel.W3;
      net.params.b1 += vel.b1;
      net.params.b2 += vel.b2;
      net.params.b3 += vel.b3;

      epoch_loss += loss;
      ++n_batches;
    }
    net.loss_curve.push_back(epoch_loss / n_batches);
  }
  return net;
}

}  // namespace spcube
