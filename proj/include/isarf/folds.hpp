#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace isarf {

using FoldList = std::vector<std::vector<int>>;

/// Class-stratified k-fold partition of {0..n-1}. Each class is shuffled and
/// dealt round-robin, so fold sizes and per-class counts differ by at most one.
/// Each fold's indices are ascending.
FoldList kfold_split(const Eigen::Ref<const Eigen::VectorXi>& labels, int k, std::uint64_t seed);

/// Indices of every fold except `held_out`, ascending.
std::vector<int> complement(const FoldList& folds, int held_out);

}  // namespace isarf
