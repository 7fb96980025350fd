#include "isarf/folds.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>

#include "isarf/error.hpp"
#include "isarf/util.hpp"

namespace isarf {

FoldList kfold_split(const Eigen::Ref<const Eigen::VectorXi>& labels, int k, std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (k < 2) throw UsageError("k-fold split needs k >= 2");
  if (n < k) throw DataError("k-fold split needs at least k samples (n=" + std::to_string(n) + ")");

  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  for (auto& [cls, members] : by_class) {
    if (static_cast<int>(members.size()) < k) {
      log_warning("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                  " members, fewer than " + std::to_string(k) + " folds; it cannot be stratified");
    }
    for (int i = static_cast<int>(members.size()) - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(members[static_cast<std::size_t>(i)], members[static_cast<std::size_t>(pick(rng))]);
    }
    order.insert(order.end(), members.begin(), members.end());
  }

  FoldList folds(static_cast<std::size_t>(k));
  for (int pos = 0; pos < n; ++pos) folds[static_cast<std::size_t>(pos % k)].push_back(order[static_cast<std::size_t>(pos)]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<int> complement(const FoldList& folds, int held_out) {
  std::vector<int> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (static_cast<int>(f) == held_out) continue;
    out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace isarf
