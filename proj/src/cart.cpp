#include <algorithm>
#include <cmath>
#include <numeric>

#include "isarf/error.hpp"
#include "isarf/forest.hpp"

namespace isarf {

double gini_impurity(int n0, int n1) {
  if (n0 < 0 || n1 < 0 || n0 + n1 == 0) throw DataError("gini impurity of an empty node");
  const double n = n0 + n1;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

int CartTree::depth() const {
  if (nodes_.empty()) return 0;
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return best;
}

namespace {

using Wide = __int128;

// Minimising weighted child Gini == maximising sum over children of
// (c0^2 + c1^2) / n_child. Kept as an exact rational num/den.
struct Score {
  Wide num = 0;
  Wide den = 1;

  static Score of(long long l0, long long l1, long long r0, long long r1) {
    const Wide nl = l0 + l1, nr = r0 + r1;
    const Wide sl = Wide(l0) * l0 + Wide(l1) * l1;
    const Wide sr = Wide(r0) * r0 + Wide(r1) * r1;
    return {sl * nr + sr * nl, nl * nr};
  }
  bool operator>(const Score& o) const { return num * o.den > o.num * den; }
};

struct Entry {
  double value;
  int label;
};

}  // namespace

std::optional<Split> find_best_split(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                     const Eigen::Ref<const Eigen::VectorXi>& y, std::span<const int> rows,
                                     std::span<const int> features) {
  long long p0 = 0, p1 = 0;
  for (int r : rows) (y[r] != 0 ? p1 : p0)++;
  const long long n = p0 + p1;
  if (n < 2) return std::nullopt;
  // Parent score expressed as a Score for the strict-improvement test.
  const Score parent{Wide(p0) * p0 + Wide(p1) * p1, Wide(n)};

  std::optional<Split> best;
  Score best_score = parent;
  std::vector<Entry> entries(rows.size());
  for (int f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i) entries[i] = {X(rows[i], f), y[rows[i]] != 0 ? 1 : 0};
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
    long long l0 = 0, l1 = 0;
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
      (entries[i].label ? l1 : l0)++;
      const double lo = entries[i].value, hi = entries[i + 1].value;
      if (!(lo < hi)) continue;
      const Score s = Score::of(l0, l1, p0 - l0, p1 - l1);
      if (s > best_score) {
        best_score = s;
        double mid = lo + (hi - lo) / 2.0;
        if (!(mid < hi)) mid = lo;
        best = Split{f, mid};
      }
    }
  }
  return best;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
              const TreeParams& params, std::mt19937_64& rng)
      : X_(X), y_(y), params_(params), rng_(rng) {
    const int p = static_cast<int>(X.cols());
    mtry_ = params.mtry <= 0 || params.mtry >= p ? p : params.mtry;
    all_features_.resize(static_cast<std::size_t>(p));
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  int build(std::vector<int> rows, int depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    TreeNode node;
    for (int r : rows) (y_[r] != 0 ? node.n1 : node.n0)++;

    const bool pure = node.n0 == 0 || node.n1 == 0;
    const bool depth_limited = params_.max_depth >= 0 && depth >= params_.max_depth;
    const bool too_small = static_cast<int>(rows.size()) < params_.min_split;
    std::optional<Split> split;
    if (!pure && !depth_limited && !too_small) split = find_best_split(X_, y_, rows, sample_features());

    if (split) {
      std::vector<int> left, right;
      for (int r : rows) (X_(r, split->feature) <= split->threshold ? left : right).push_back(r);
      rows.clear();
      rows.shrink_to_fit();
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.left = build(std::move(left), depth + 1);
      node.right = build(std::move(right), depth + 1);
    }
    nodes_[static_cast<std::size_t>(index)] = node;
    return index;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  std::vector<int> sample_features() {
    const int p = static_cast<int>(all_features_.size());
    if (mtry_ >= p) return all_features_;
    std::vector<int> pool = all_features_;
    for (int i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<int> pick(i, p - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng_))]);
    }
    pool.resize(static_cast<std::size_t>(mtry_));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  const Eigen::Ref<const Eigen::MatrixXd>& X_;
  const Eigen::Ref<const Eigen::VectorXi>& y_;
  TreeParams params_;
  std::mt19937_64& rng_;
  int mtry_ = 0;
  std::vector<int> all_features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

CartTree fit_cart(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                  std::span<const int> rows, const TreeParams& params, std::mt19937_64& rng) {
  if (rows.empty()) throw DataError("cannot grow a tree on zero samples");
  if (X.rows() != y.size()) throw DataError("tree: X and y row counts differ");
  TreeBuilder builder(X, y, params, rng);
  builder.build(std::vector<int>(rows.begin(), rows.end()), 0);
  return CartTree(builder.take());
}

CartTree fit_cart(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                  const TreeParams& params, std::mt19937_64& rng) {
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_cart(X, y, rows, params, rng);
}

std::vector<double> fit_size_split_tree(const Eigen::Ref<const Eigen::VectorXd>& sizes,
                                        const Eigen::Ref<const Eigen::VectorXi>& y) {
  if (sizes.size() < 4) throw DataError("size split tree needs at least 4 samples");
  if (sizes.size() != y.size()) throw DataError("size split tree: sizes and labels differ in length");
  const Eigen::MatrixXd X = sizes;
  std::mt19937_64 unused(0);
  const CartTree tree = fit_cart(X, y, TreeParams{2, 0, 2}, unused);
  std::vector<double> thresholds;
  for (const auto& n : tree.nodes())
    if (!n.is_leaf()) thresholds.push_back(n.threshold);
  std::sort(thresholds.begin(), thresholds.end());
  return thresholds;
}

}  // namespace isarf
