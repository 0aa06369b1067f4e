#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace ckdprog {

struct MlpLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;
};

enum class MlpArch { kPlain, kResidual };

// Plain arch: input FC -> hidden stack with rectifier + dropout -> 1 logit.
// Residual arch: input FC + rectifier, then blocks y = x + W2*relu(W1*x+b1)+b2
// (projection Ws*x replaces the identity when block dims change), then an
// output FC. No activation crosses the residual sum, so a zero-weight block
// is an exact identity.
struct MlpModel {
  MlpArch arch = MlpArch::kPlain;
  std::vector<MlpLayer> layers;
  std::vector<Eigen::MatrixXd> projections;  // one per block; 0x0 means identity
  double dropout_rate = 0.0;
  int n_blocks = 0;
  int n_features = 0;

  Eigen::VectorXd predict_margin(const Eigen::MatrixXd& X) const;  // dropout off
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
  void validate() const;
};

struct MlpConfig {
  MlpArch arch = MlpArch::kPlain;
  std::vector<int> hidden_dims = {512, 256, 128};  // plain arch
  int n_blocks = 3;                                // residual arch
  int hidden_dim = 64;                             // residual arch
  double dropout_rate = 0.2;                       // plain arch hidden layers
  double learning_rate = 0.001;
  double weight_decay = 1e-4;
  int max_epochs = 35;
  int patience = 8;
  int batch_size = 64;
  double validation_fraction = 0.1;  // early-stopping slice of the training data
  std::uint64_t seed = 0;
};

MlpConfig plain_mlp_defaults();
MlpConfig residual_mlp_defaults();

// Binary cross-entropy with logits, adaptive-moment updates with L2 weight
// decay folded into the gradient, early stopping on validation log loss with
// best-weight restore. Non-finite loss aborts with a diagnostic.
MlpModel train_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const MlpConfig& config);

// Flat parameter access in a fixed order (per layer W then b, then block
// projections); used by optimization and by finite-difference checks.
Eigen::VectorXd get_parameters(const MlpModel& model);
void set_parameters(MlpModel& model, const Eigen::VectorXd& theta);

// Mean BCE-with-logits over rows plus (weight_decay/2)*||theta||^2, with the
// analytic gradient in the get_parameters layout. Dropout is off.
double mlp_loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                             const Eigen::VectorXi& y, double weight_decay,
                             Eigen::VectorXd& gradient);

// Applies one residual block (index into the block list) to a batch of rows.
Eigen::MatrixXd residual_block_forward(const MlpModel& model, int block, const Eigen::MatrixXd& H);

MlpModel make_mlp(int n_features, const MlpConfig& config, std::uint64_t init_seed);

}  // namespace ckdprog
