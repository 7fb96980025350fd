#include "isarf/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "isarf/error.hpp"
#include "isarf/folds.hpp"
#include "isarf/util.hpp"

namespace isarf {

namespace {

constexpr double kKktSlack = 1e-7;

// Largest violation of the lasso optimality conditions at (w, r).
double kkt_violation(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& r,
                     const Eigen::VectorXd& w, double lambda) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd g = X.transpose() * r / n;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double v = w[j] == 0.0 ? std::max(0.0, std::abs(g[j]) - lambda)
                                 : std::abs(g[j] - lambda * (w[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

Eigen::MatrixXd take_rows(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& y, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  return out;
}

std::vector<double> lambda_grid(double lmax, int size, double min_ratio) {
  std::vector<double> grid(static_cast<std::size_t>(size));
  if (size == 1) {
    grid[0] = lmax;
    return grid;
  }
  const double log_hi = std::log(lmax), log_lo = std::log(lmax * min_ratio);
  for (int i = 0; i < size; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(log_hi + (log_lo - log_hi) * i / (size - 1));
  }
  grid.front() = lmax;
  return grid;
}

}  // namespace

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

std::vector<int> LassoFit::support() const {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < coef.size(); ++j)
    if (coef[j] != 0.0) s.push_back(static_cast<int>(j));
  return s;
}

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd centred = y.array() - y.mean();
  return (X.transpose() * centred).cwiseAbs().maxCoeff() / n;
}

LassoFit lasso_fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                   double lambda, const LassoOptions& options, const LassoFit* warm) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (n < 2) throw DataError("lasso needs at least two samples");
  if (y.size() != n) throw DataError("lasso: X and y row counts differ");
  if (!X.allFinite() || !y.allFinite() || !std::isfinite(lambda)) throw DataError("lasso: non-finite input");
  if (lambda < 0) throw UsageError("lasso: penalty must be non-negative");

  const double nd = static_cast<double>(n);
  const Eigen::VectorXd col_sq = X.colwise().squaredNorm().transpose() / nd;

  LassoFit fit;
  // At lambda >= lambda_max the zero vector satisfies KKT exactly; descent
  // from rounded residuals could leave a coefficient of order 1e-17 instead.
  if (lambda >= lambda_max(X, y)) {
    fit.coef = Eigen::VectorXd::Zero(p);
    fit.intercept = y.mean();
    fit.converged = true;
    return fit;
  }
  if (warm != nullptr && warm->coef.size() == p) {
    fit.coef = warm->coef;
    fit.intercept = warm->intercept;
  } else {
    fit.coef = Eigen::VectorXd::Zero(p);
    fit.intercept = y.mean();
  }
  Eigen::VectorXd r = y - X * fit.coef;
  r.array() -= fit.intercept;

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    fit.sweeps = sweep;
    const double shift = r.mean();
    fit.intercept += shift;
    r.array() -= shift;
    double max_change = std::abs(shift);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double old = fit.coef[j];
      double updated = 0.0;
      if (col_sq[j] > 0.0) {
        const double rho = X.col(j).dot(r) / nd + col_sq[j] * old;
        updated = soft_threshold(rho, lambda) / col_sq[j];
      }
      if (updated != old) {
        r.noalias() -= (updated - old) * X.col(j);
        fit.coef[j] = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    if (max_change < options.tolerance && kkt_violation(X, r, fit.coef, lambda) <= kKktSlack) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

SelectionResult select_features(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                                std::uint64_t seed, const SelectionOptions& options) {
  const Eigen::Index n = X.rows();
  if (n < options.min_samples) {
    throw DataError("feature selection needs at least " + std::to_string(options.min_samples) +
                    " training samples, got " + std::to_string(n));
  }
  const Eigen::VectorXd yd = y.cast<double>();
  const double lmax = lambda_max(X, yd);
  SelectionResult result;
  if (!(lmax > 0.0)) {
    // Constant labels or all-constant features: nothing to select on.
    result.coef = Eigen::VectorXd::Zero(X.cols());
    result.intercept = yd.mean();
    result.fallback = true;
    result.selected.resize(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) result.selected[static_cast<std::size_t>(j)] = static_cast<int>(j);
    log_warning("lasso selection degenerate (lambda_max = 0); keeping every feature");
    return result;
  }
  const auto grid = lambda_grid(lmax, options.grid_size, options.min_ratio);

  const FoldList folds = kfold_split(y, options.inner_folds, seed);
  std::vector<double> mse(grid.size(), 0.0);
  for (int f = 0; f < static_cast<int>(folds.size()); ++f) {
    const auto train_rows = complement(folds, f);
    const Eigen::MatrixXd Xt = take_rows(X, train_rows);
    const Eigen::VectorXd yt = take_rows(yd, train_rows);
    const Eigen::MatrixXd Xv = take_rows(X, folds[static_cast<std::size_t>(f)]);
    const Eigen::VectorXd yv = take_rows(yd, folds[static_cast<std::size_t>(f)]);
    LassoFit prev;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      LassoFit fit = lasso_fit(Xt, yt, grid[g], options.lasso, g == 0 ? nullptr : &prev);
      const Eigen::VectorXd resid = (yv - Xv * fit.coef).array() - fit.intercept;
      mse[g] += resid.squaredNorm() / static_cast<double>(yv.size());
      prev = std::move(fit);
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    mse[g] /= static_cast<double>(folds.size());
    result.curve.emplace_back(grid[g], mse[g]);
    if (mse[g] < mse[best]) best = g;
  }

  // Full-data path down to the chosen penalty, continuing further only if
  // the fallback needs a non-empty support.
  std::vector<LassoFit> path;
  path.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    path.push_back(lasso_fit(X, yd, grid[g], options.lasso, g == 0 ? nullptr : &path.back()));
    if (g >= best && (!path[best].support().empty() || !path.back().support().empty())) break;
  }
  std::size_t chosen = best;
  if (path[best].support().empty()) {
    result.fallback = true;
    chosen = path.size() - 1;
    if (path[chosen].support().empty()) {
      throw NumericalError("lasso selection produced an empty support at every penalty");
    }
  }
  result.coef = path[chosen].coef;
  result.intercept = path[chosen].intercept;
  result.lambda = grid[chosen];
  result.selected = path[chosen].support();
  return result;
}

std::vector<std::pair<std::string, int>> selection_frequency(const std::vector<SelectionResult>& folds,
                                                             const std::vector<std::string>& names) {
  std::vector<int> counts(names.size(), 0);
  for (const auto& f : folds)
    for (int j : f.selected) ++counts.at(static_cast<std::size_t>(j));
  std::vector<std::size_t> order(names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  std::vector<std::pair<std::string, int>> out;
  out.reserve(names.size());
  for (std::size_t i : order) out.emplace_back(names[i], counts[i]);
  return out;
}

}  // namespace isarf
