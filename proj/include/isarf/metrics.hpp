#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace isarf {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocResult {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  std::optional<double> auc;     // nullopt when a class is missing
};

/// Descending-threshold sweep with tied scores grouped into one step. AUC is
/// the trapezoid area, which equals the Mann-Whitney statistic with half
/// credit for ties.
RocResult roc_and_auc(const Eigen::Ref<const Eigen::VectorXd>& scores, const Eigen::Ref<const Eigen::VectorXi>& labels);

struct ConfusionCounts {
  long long tp = 0, fn = 0, tn = 0, fp = 0;

  long long positives() const { return tp + fn; }
  long long negatives() const { return tn + fp; }
  long long total() const { return tp + fn + tn + fp; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp; fn += o.fn; tn += o.tn; fp += o.fp;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Undefined ratios (empty denominator) stay nullopt.
struct ConfusionMetrics {
  ConfusionCounts counts;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> accuracy;
};

ConfusionMetrics metrics_from_counts(const ConfusionCounts& counts);

/// Label 1 (COVID) is positive; score >= threshold predicts positive.
ConfusionMetrics confusion_metrics(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                   const Eigen::Ref<const Eigen::VectorXi>& labels, double threshold = 0.5);

/// Fixed evaluation strata on the infection fraction, left-closed.
struct SizeGroupScheme {
  static constexpr std::array<double, 4> kBoundaries{1e-4, 1e-3, 1e-2, 1e-1};
  static constexpr int kGroups = 5;

  static int group_of(double fraction);
  static const std::string& name(int group);
};

struct SubjectResult {
  std::string id;
  int label = 0;  // 1 = COVID
  double probability = 0.0;
  int fold = 0;
  double size_fraction = 0.0;
};

struct GroupMetrics {
  std::string name;
  int n_covid = 0;
  int n_cap = 0;
  ConfusionMetrics metrics;
  std::optional<double> auc;
};

std::vector<GroupMetrics> size_group_breakdown(const std::vector<SubjectResult>& results, double threshold = 0.5);

/// Vertical averaging on the FPR grid 0, 1/(n-1), ..., 1. Each curve is
/// linearly interpolated (right-continuous at vertical steps); the endpoints
/// are pinned to (0,0) and (1,1).
std::vector<RocPoint> mean_roc(const std::vector<std::vector<RocPoint>>& curves, int grid_points = 101);

/// TPR of a ROC curve at `fpr`, using the interpolation rule of mean_roc.
double interpolate_tpr(const std::vector<RocPoint>& curve, double fpr);

}  // namespace isarf
