#pragma once

#include <cstdint>
#include <variant>

#include <Eigen/Core>

namespace isarf {

/// L2-penalised logistic regression; the intercept is not penalised.
struct LogisticModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  double C = 1.0;
  int iterations = 0;

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
};

struct LogisticGradient {
  double objective = 0.0;
  Eigen::VectorXd weights;  // d objective / d w
  double intercept = 0.0;   // d objective / d b
};

/// sum of log-losses + ||w||^2 / (2C), with its gradient.
LogisticGradient logistic_objective(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                    const Eigen::Ref<const Eigen::VectorXi>& y,
                                    const Eigen::Ref<const Eigen::VectorXd>& w, double b, double C);

/// Damped Newton until ||grad||_inf <= tolerance or max_iter.
LogisticModel fit_logistic_l2(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                              double C = 1.0, int max_iter = 1000, double tolerance = 1e-6);

/// One ReLU hidden layer, sigmoid output.
struct MlpModel {
  Eigen::MatrixXd W1;  // hidden x inputs
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;
  int epochs = 0;

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
  friend bool operator==(const MlpModel& a, const MlpModel& b);
};

struct MlpParams {
  int hidden = 100;
  int max_iter = 500;  // epochs
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;
  double tolerance = 1e-4;
  int patience = 10;
};

struct MlpGradient {
  double loss = 0.0;  // mean binary cross-entropy
  MlpModel grad;      // same shapes as the model
};

/// Mean cross-entropy over the rows of X and its backpropagated gradient.
MlpGradient mlp_loss_and_gradient(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXi>& y);

/// Adam on mini-batches with early stopping on a held-out slice; the weights
/// with the best validation loss are returned.
MlpModel fit_mlp(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                 std::uint64_t seed, const MlpParams& params = {});

using BaselineModel = std::variant<LogisticModel, MlpModel>;

}  // namespace isarf
