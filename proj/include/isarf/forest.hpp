#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace isarf {

/// 1 - p0^2 - p1^2. Throws on an empty node.
double gini_impurity(int n0, int n1);

/// Preorder node storage. Internal nodes route x[feature] <= threshold left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int n0 = 0;  // training class counts reaching the node
  int n1 = 0;

  bool is_leaf() const { return feature < 0; }
  double proportion() const { return n0 + n1 > 0 ? static_cast<double>(n1) / (n0 + n1) : 0.0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class CartTree {
 public:
  CartTree() = default;
  explicit CartTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;

  /// Class-1 proportion of the leaf reached by x.
  template <typename Derived>
  double predict(const Eigen::DenseBase<Derived>& x) const {
    return nodes_[static_cast<std::size_t>(leaf_index(x))].proportion();
  }

  template <typename Derived>
  int leaf_index(const Eigen::DenseBase<Derived>& x) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return i;
  }

  friend bool operator==(const CartTree&, const CartTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  int max_depth = 10;  // negative = unlimited; the root is depth 0
  int mtry = 0;        // features tried per node; 0 or >= p means all
  int min_split = 2;
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
};

/// Best Gini split of `rows` over `features` (ascending). Thresholds are
/// midpoints of consecutive distinct values; ties go to the lower feature
/// index, then the lower threshold. nullopt when no split strictly lowers
/// the weighted impurity.
std::optional<Split> find_best_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                     const Eigen::Ref<const Eigen::VectorXi>& y, std::span<const int> rows,
                                     std::span<const int> features);

/// Grows a CART tree on `rows` (duplicates allowed, as in a bootstrap).
CartTree fit_cart(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                  std::span<const int> rows, const TreeParams& params, std::mt19937_64& rng);

CartTree fit_cart(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                  const TreeParams& params, std::mt19937_64& rng);

struct ForestParams {
  int n_trees = 100;
  int max_depth = 10;
  int mtry = 0;  // 0 -> floor(sqrt(p)), at least 1
  int jobs = 1;  // does not affect the result
};

class RandomForest {
 public:
  std::vector<CartTree> trees;
  int n_trees = 0;
  int max_depth = 0;
  int mtry = 0;
  std::uint64_t seed = 0;
  int n_features = 0;
  double prior = 0.0;  // training class-1 fraction

  /// Mean of per-tree leaf class-1 proportions.
  /// Single row or column vector; matrices go to the batch overload.
  template <typename Derived>
    requires(Derived::RowsAtCompileTime == 1 || Derived::ColsAtCompileTime == 1)
  double predict(const Eigen::DenseBase<Derived>& x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return trees.empty() ? prior : s / static_cast<double>(trees.size());
  }

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  friend bool operator==(const RandomForest&, const RandomForest&) = default;
};

/// Bagged CART ensemble. Tree t draws its bootstrap and feature subsets from
/// derive_seed(seed, t), so results are independent of `jobs`.
RandomForest fit_random_forest(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                               const ForestParams& params, std::uint64_t seed);

/// Depth-2 Gini tree on the size fraction alone; returns its sorted internal
/// thresholds (0 to 3 values).
std::vector<double> fit_size_split_tree(const Eigen::Ref<const Eigen::VectorXd>& sizes,
                                        const Eigen::Ref<const Eigen::VectorXi>& y);

}  // namespace isarf
