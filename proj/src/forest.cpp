#include <cmath>
#include <random>

#include "isarf/error.hpp"
#include "isarf/forest.hpp"
#include "isarf/util.hpp"

namespace isarf {

Eigen::VectorXd RandomForest::predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i));
  return out;
}

RandomForest fit_random_forest(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                               const ForestParams& params, std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n == 0) throw DataError("random forest needs at least one sample");
  if (y.size() != n) throw DataError("random forest: X and y row counts differ");
  if (params.n_trees < 1) throw UsageError("random forest needs at least one tree");

  RandomForest forest;
  forest.n_trees = params.n_trees;
  forest.max_depth = params.max_depth;
  forest.mtry = params.mtry > 0 ? std::min(params.mtry, p) : std::max(1, static_cast<int>(std::floor(std::sqrt(p))));
  forest.seed = seed;
  forest.n_features = p;
  forest.prior = y.cast<double>().mean();
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));

  const TreeParams tree_params{params.max_depth, forest.mtry, 2};
  parallel_for(forest.trees.size(), params.jobs, [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::uniform_int_distribution<int> draw(0, n - 1);
    for (auto& r : rows) r = draw(rng);
    forest.trees[t] = fit_cart(X, y, rows, tree_params, rng);
  });
  return forest;
}

}  // namespace isarf
