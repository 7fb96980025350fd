#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "isarf/feature_table.hpp"
#include "isarf/features.hpp"
#include "isarf/forest.hpp"
#include "isarf/lasso.hpp"

namespace isarf {

/// Size-routing thresholds plus one forest per size group. Groups are
/// left-closed: group = number of thresholds <= size.
struct SizeAwareForest {
  std::vector<double> thresholds;
  std::vector<RandomForest> forests;

  int route(double size_fraction) const;

  template <typename Derived>
  double predict(const Eigen::DenseBase<Derived>& x, double size_fraction) const {
    return forests[static_cast<std::size_t>(route(size_fraction))].predict(x);
  }

  friend bool operator==(const SizeAwareForest&, const SizeAwareForest&) = default;
};

struct IsarfParams {
  ForestParams forest;
  int min_group_size = 10;
};

/// Learns size thresholds on the raw size fractions, merges groups smaller
/// than min_group_size into their smaller adjacent neighbour, then trains one
/// forest per remaining group with seed derive_seed(seed, group).
SizeAwareForest fit_isarf(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                          const Eigen::Ref<const Eigen::VectorXd>& sizes, std::uint64_t seed,
                          const IsarfParams& params = {});

/// Merges sparse groups; exposed for testing. Returns the surviving thresholds.
std::vector<double> merge_sparse_groups(std::vector<double> thresholds, const Eigen::Ref<const Eigen::VectorXd>& sizes,
                                        int min_group_size);

/// Deployable model: preprocessing, selection and the size-aware forest.
struct ISarfModel {
  std::uint64_t manifest_hash = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;  // full manifest
  StandardizationParams standardization;
  std::vector<int> selected;  // manifest indices
  SizeAwareForest core;

  /// Standardized, selected columns of raw manifest-order rows.
  Eigen::MatrixXd prepare(const Eigen::Ref<const Eigen::MatrixXd>& raw) const;
};

struct TrainOptions {
  SelectionOptions selection;
  IsarfParams isarf;
};

/// Standardize -> LASSO selection -> fit_isarf on the whole table.
ISarfModel train_isarf_model(const FeatureTable& table, std::uint64_t seed, const TrainOptions& options = {});

struct IsarfPrediction {
  double probability = 0.0;
  int group = 0;
};

IsarfPrediction isarf_predict(const ISarfModel& model, const FeatureVector& x);
std::vector<IsarfPrediction> isarf_predict(const ISarfModel& model, const FeatureTable& table);

/// "ISARF-MODEL v1" text format. Reals carry 17 significant digits so a
/// loaded model predicts bit-identically.
void write_model(std::ostream& out, const ISarfModel& model);
void write_model(const std::filesystem::path& path, const ISarfModel& model);
ISarfModel read_model(std::istream& in, const std::string& source = "<stream>");
ISarfModel read_model(const std::filesystem::path& path);

}  // namespace isarf
