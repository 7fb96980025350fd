#include "isarf/isarf_model.hpp"

#include <algorithm>

#include "isarf/error.hpp"
#include "isarf/util.hpp"

namespace isarf {

int SizeAwareForest::route(double size_fraction) const {
  return static_cast<int>(std::upper_bound(thresholds.begin(), thresholds.end(), size_fraction) - thresholds.begin());
}

namespace {

std::vector<int> group_counts(const std::vector<double>& thresholds, const Eigen::Ref<const Eigen::VectorXd>& sizes) {
  std::vector<int> counts(thresholds.size() + 1, 0);
  for (Eigen::Index i = 0; i < sizes.size(); ++i) {
    ++counts[static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), sizes[i]) -
                                      thresholds.begin())];
  }
  return counts;
}

}  // namespace

std::vector<double> merge_sparse_groups(std::vector<double> thresholds, const Eigen::Ref<const Eigen::VectorXd>& sizes,
                                        int min_group_size) {
  for (;;) {
    if (thresholds.empty()) return thresholds;
    const auto counts = group_counts(thresholds, sizes);
    const auto smallest = std::min_element(counts.begin(), counts.end());
    if (*smallest >= min_group_size) return thresholds;
    const auto g = static_cast<std::size_t>(smallest - counts.begin());
    // Threshold t_i separates group i from group i+1.
    std::size_t drop;
    if (g == 0) {
      drop = 0;
    } else if (g == counts.size() - 1) {
      drop = g - 1;
    } else {
      drop = counts[g - 1] <= counts[g + 1] ? g - 1 : g;
    }
    thresholds.erase(thresholds.begin() + static_cast<std::ptrdiff_t>(drop));
  }
}

SizeAwareForest fit_isarf(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& y,
                          const Eigen::Ref<const Eigen::VectorXd>& sizes, std::uint64_t seed,
                          const IsarfParams& params) {
  if (X.rows() < 4) throw DataError("iSARF needs at least 4 training samples");
  if (sizes.size() != X.rows() || y.size() != X.rows()) throw DataError("iSARF: inputs differ in length");

  SizeAwareForest model;
  model.thresholds = merge_sparse_groups(fit_size_split_tree(sizes, y), sizes, params.min_group_size);
  const std::size_t groups = model.thresholds.size() + 1;
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<int> rows;
    for (Eigen::Index i = 0; i < sizes.size(); ++i)
      if (static_cast<std::size_t>(model.route(sizes[i])) == g) rows.push_back(static_cast<int>(i));
    Eigen::MatrixXd Xg(static_cast<Eigen::Index>(rows.size()), X.cols());
    Eigen::VectorXi yg(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Xg.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
      yg[static_cast<Eigen::Index>(r)] = y[rows[r]];
    }
    model.forests.push_back(fit_random_forest(Xg, yg, params.forest, derive_seed(seed, g)));
  }
  return model;
}

Eigen::MatrixXd ISarfModel::prepare(const Eigen::Ref<const Eigen::MatrixXd>& raw) const {
  const Eigen::MatrixXd z = standardization.apply(raw);
  Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(selected.size()));
  for (std::size_t j = 0; j < selected.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = z.col(selected[j]);
  return out;
}

ISarfModel train_isarf_model(const FeatureTable& table, std::uint64_t seed, const TrainOptions& options) {
  const Eigen::VectorXi y = table.label_vector();
  if (y.size() < 4) throw DataError("training needs at least 4 labelled subjects");
  ISarfModel model;
  model.manifest_hash = table.manifest_hash;
  model.seed = seed;
  model.feature_names = table.feature_names;
  model.standardization = fit_standardization(table.values);
  const Eigen::MatrixXd z = model.standardization.apply(table.values);
  model.selected = select_features(z, y, derive_seed(seed, 0), options.selection).selected;
  model.core = fit_isarf(model.prepare(table.values), y, table.size_fractions, derive_seed(seed, 1), options.isarf);
  return model;
}

IsarfPrediction isarf_predict(const ISarfModel& model, const FeatureVector& x) {
  if (x.manifest_hash != model.manifest_hash) {
    throw DataError("feature manifest hash " + format_manifest_hash(x.manifest_hash) +
                    " does not match model manifest " + format_manifest_hash(model.manifest_hash));
  }
  if (x.values.size() != model.standardization.mean.size()) throw DataError("feature vector length mismatch");
  const Eigen::MatrixXd row = model.prepare(x.values.transpose());
  const int group = model.core.route(x.size_fraction);
  return {model.core.forests[static_cast<std::size_t>(group)].predict(row.row(0)), group};
}

std::vector<IsarfPrediction> isarf_predict(const ISarfModel& model, const FeatureTable& table) {
  if (table.manifest_hash != model.manifest_hash) {
    throw DataError("feature CSV manifest hash " + format_manifest_hash(table.manifest_hash) +
                    " does not match model manifest " + format_manifest_hash(model.manifest_hash));
  }
  const Eigen::MatrixXd prepared = model.prepare(table.values);
  std::vector<IsarfPrediction> out;
  out.reserve(static_cast<std::size_t>(table.rows()));
  for (int i = 0; i < table.rows(); ++i) {
    const int group = model.core.route(table.size_fractions[i]);
    out.push_back({model.core.forests[static_cast<std::size_t>(group)].predict(prepared.row(i)), group});
  }
  return out;
}

}  // namespace isarf
