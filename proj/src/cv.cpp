#include "isarf/cv.hpp"

#include "isarf/error.hpp"
#include "isarf/util.hpp"

namespace isarf {

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

template <typename Vec>
Vec rows_of(const Vec& v, const std::vector<int>& rows) {
  Vec out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

Eigen::MatrixXd columns_of(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
  return out;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values) {
  double sum = 0;
  int n = 0;
  for (const auto& v : values)
    if (v) {
      sum += *v;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

CvReport run_cv(const FeatureTable& table, ModelVariant variant, std::uint64_t seed, const CvOptions& options) {
  const int n = table.rows();
  if (n < options.min_subjects) {
    throw DataError("cross-validation needs at least " + std::to_string(options.min_subjects) + " subjects, got " +
                    std::to_string(n));
  }
  const Eigen::VectorXi y = table.label_vector();
  const int positives = y.sum();
  if (positives == 0 || positives == n) throw DataError("cross-validation needs both COVID and CAP subjects");

  CvReport report;
  report.model = to_string(variant);
  report.seed = seed;
  report.folds = options.folds;
  report.threshold = options.threshold;
  report.feature_names = table.feature_names;

  ClassifierOptions classifier_options = options.classifier;
  classifier_options.isarf.forest.jobs = options.jobs;
  classifier_options.forest.jobs = options.jobs;

  const FoldList folds = kfold_split(y, options.folds, seed);
  std::vector<double> probability(static_cast<std::size_t>(n), 0.0);
  std::vector<int> fold_of(static_cast<std::size_t>(n), -1);
  std::vector<SelectionResult> selections;

  for (int f = 0; f < options.folds; ++f) {
    const std::uint64_t fold_seed = derive_seed(seed, static_cast<std::uint64_t>(f));
    const std::vector<int> train_rows = complement(folds, f);
    const std::vector<int>& test_rows = folds[static_cast<std::size_t>(f)];

    const Eigen::VectorXi y_train = rows_of(y, train_rows);
    const Eigen::VectorXi y_test = rows_of(y, test_rows);
    const Eigen::VectorXd size_train = rows_of(table.size_fractions, train_rows);
    const Eigen::VectorXd size_test = rows_of(table.size_fractions, test_rows);
    const Standardized z = standardize_fit_apply(rows_of(table.values, train_rows), rows_of(table.values, test_rows));

    SelectionResult selection = select_features(z.train, y_train, derive_seed(fold_seed, 0), options.selection);
    auto model = make_classifier(variant, classifier_options);
    model->fit(columns_of(z.train, selection.selected), y_train, size_train, derive_seed(fold_seed, 1));
    const Eigen::VectorXd scores = model->predict(columns_of(z.other, selection.selected), size_test);

    FoldOutcome outcome;
    outcome.test_rows = test_rows;
    outcome.metrics = confusion_metrics(scores, y_test, options.threshold);
    const RocResult roc = roc_and_auc(scores, y_test);
    outcome.auc = roc.auc;
    outcome.roc = roc.points;
    outcome.selected = selection.selected;
    outcome.lambda = selection.lambda;
    outcome.selection_fallback = selection.fallback;
    outcome.size_thresholds = model->size_thresholds();
    report.per_fold.push_back(std::move(outcome));

    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      probability[static_cast<std::size_t>(test_rows[i])] = scores[static_cast<Eigen::Index>(i)];
      fold_of[static_cast<std::size_t>(test_rows[i])] = f;
    }
    selections.push_back(std::move(selection));
  }

  for (int i = 0; i < n; ++i) {
    report.subjects.push_back({table.ids[static_cast<std::size_t>(i)], y[i], probability[static_cast<std::size_t>(i)],
                               fold_of[static_cast<std::size_t>(i)], table.size_fractions[i]});
  }
  const Eigen::Map<const Eigen::VectorXd> all_scores(probability.data(), n);
  report.pooled = confusion_metrics(all_scores, y, options.threshold);
  report.pooled_auc = roc_and_auc(all_scores, y).auc;

  std::vector<std::optional<double>> sen, spe, acc, auc;
  std::vector<std::vector<RocPoint>> curves;
  for (const auto& fo : report.per_fold) {
    sen.push_back(fo.metrics.sensitivity);
    spe.push_back(fo.metrics.specificity);
    acc.push_back(fo.metrics.accuracy);
    auc.push_back(fo.auc);
    if (fo.auc) curves.push_back(fo.roc);
  }
  report.fold_mean = {mean_defined(sen), mean_defined(spe), mean_defined(acc), mean_defined(auc)};
  if (!curves.empty()) report.mean_roc = mean_roc(curves);
  report.per_group = size_group_breakdown(report.subjects, options.threshold);
  report.selection_frequency = selection_frequency(selections, table.feature_names);
  return report;
}

std::optional<double> middle_group_accuracy(const CvReport& report) {
  double sum = 0;
  for (int g = 1; g <= 3; ++g) {
    const auto& acc = report.per_group.at(static_cast<std::size_t>(g)).metrics.accuracy;
    if (!acc) return std::nullopt;
    sum += *acc;
  }
  return sum / 3.0;
}

}  // namespace isarf
