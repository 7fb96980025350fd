#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace isarf {

/// Training-set column statistics. Constant columns are flagged and map to 0.
struct StandardizationParams {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;          // sample standard deviation (n - 1)
  std::vector<bool> constant;

  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
  Eigen::VectorXd apply_row(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

StandardizationParams fit_standardization(const Eigen::Ref<const Eigen::MatrixXd>& X);

struct Standardized {
  Eigen::MatrixXd train;
  Eigen::MatrixXd other;
  StandardizationParams params;
};

Standardized standardize_fit_apply(const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X_other);

struct LassoOptions {
  double tolerance = 1e-7;   // max |coefficient change| per sweep
  int max_sweeps = 10000;    // reached on ill-conditioned designs; see LassoFit::converged
};

struct LassoFit {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  int sweeps = 0;
  bool converged = false;

  std::vector<int> support() const;
};

/// max_j |(1/n) X_j^T (y - mean(y))|: the smallest penalty with an all-zero
/// solution.
double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Minimises (1/2n)||y - b0 - Xw||^2 + lambda ||w||_1 by cyclic coordinate
/// descent with soft-thresholding. `warm` seeds the iterate (path fitting).
LassoFit lasso_fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                   double lambda, const LassoOptions& options = {}, const LassoFit* warm = nullptr);

double soft_threshold(double z, double gamma);

struct SelectionOptions {
  int grid_size = 50;
  double min_ratio = 1e-3;
  int inner_folds = 5;
  int min_samples = 10;
  LassoOptions lasso;
};

struct SelectionResult {
  std::vector<int> selected;   // ascending feature indices
  Eigen::VectorXd coef;
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<std::pair<double, double>> curve;  // (lambda, mean validation MSE), grid order
  bool fallback = false;
};

/// Picks lambda on a log grid by inner k-fold CV (ties toward larger lambda)
/// and returns the support of the full-data fit at that lambda. An empty
/// support falls back to the largest grid lambda with a non-empty support.
SelectionResult select_features(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                                std::uint64_t seed, const SelectionOptions& options = {});

/// Pick count per feature across fold results, sorted by count descending
/// (ties in manifest order).
std::vector<std::pair<std::string, int>> selection_frequency(const std::vector<SelectionResult>& folds,
                                                             const std::vector<std::string>& names);

}  // namespace isarf
