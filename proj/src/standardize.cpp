#include <cmath>

#include "isarf/error.hpp"
#include "isarf/lasso.hpp"

namespace isarf {

StandardizationParams fit_standardization(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.rows() == 0 || X.cols() == 0) throw DataError("cannot standardize an empty matrix");
  if (!X.allFinite()) throw DataError("cannot standardize non-finite values");
  const auto n = static_cast<double>(X.rows());
  StandardizationParams p;
  p.mean = X.colwise().mean().transpose();
  p.scale.resize(X.cols());
  p.constant.assign(static_cast<std::size_t>(X.cols()), false);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const auto col = X.col(j).array();
    const bool flat = col.maxCoeff() == col.minCoeff();
    const double var = X.rows() > 1 ? (col - p.mean[j]).square().sum() / (n - 1.0) : 0.0;
    const double sd = std::sqrt(var);
    p.scale[j] = sd;
    if (flat || sd <= 1e-12 * std::max(1.0, std::abs(p.mean[j]))) p.constant[static_cast<std::size_t>(j)] = true;
  }
  return p;
}

Eigen::MatrixXd StandardizationParams::apply(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() != mean.size()) throw DataError("standardization column count mismatch");
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (constant[static_cast<std::size_t>(j)]) {
      out.col(j).setZero();
    } else {
      out.col(j) = (X.col(j).array() - mean[j]) / scale[j];
    }
  }
  return out;
}

Eigen::VectorXd StandardizationParams::apply_row(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::MatrixXd row = x.transpose();
  return apply(row).row(0).transpose();
}

Standardized standardize_fit_apply(const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X_other) {
  Standardized s;
  s.params = fit_standardization(X_train);
  s.train = s.params.apply(X_train);
  s.other = s.params.apply(X_other);
  return s;
}

}  // namespace isarf
