#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isarf/classifier.hpp"
#include "isarf/feature_table.hpp"
#include "isarf/folds.hpp"
#include "isarf/lasso.hpp"
#include "isarf/metrics.hpp"

namespace isarf {

struct CvOptions {
  int folds = 5;
  double threshold = 0.5;
  int jobs = 1;
  int min_subjects = 50;
  SelectionOptions selection;
  ClassifierOptions classifier;
};

struct FoldOutcome {
  std::vector<int> test_rows;
  ConfusionMetrics metrics;
  std::optional<double> auc;
  std::vector<RocPoint> roc;
  std::vector<int> selected;
  double lambda = 0.0;
  bool selection_fallback = false;
  std::vector<double> size_thresholds;
};

struct MetricSummary {
  std::optional<double> sensitivity, specificity, accuracy, auc;
};

struct CvReport {
  std::string model;
  std::uint64_t seed = 0;
  int folds = 0;
  double threshold = 0.5;
  std::vector<std::string> feature_names;

  ConfusionMetrics pooled;
  std::optional<double> pooled_auc;
  MetricSummary fold_mean;
  std::vector<FoldOutcome> per_fold;
  std::vector<GroupMetrics> per_group;
  std::vector<RocPoint> mean_roc;
  std::vector<SubjectResult> subjects;  // table order
  std::vector<std::pair<std::string, int>> selection_frequency;
};

/// Per fold: standardize on train, LASSO-select on train, fit the model,
/// predict the held-out fold. Overall metrics pool the held-out predictions.
CvReport run_cv(const FeatureTable& table, ModelVariant variant, std::uint64_t seed, const CvOptions& options = {});

/// "ISARF-REPORT v1": sections [config] [overall] [per_fold] [model]
/// [per_group] [mean_roc] [subjects] [selection_frequency] [selected].
/// Undefined metrics are written as null.
void write_report(std::ostream& out, const CvReport& report);
void write_report(const std::filesystem::path& path, const CvReport& report);

/// Human-readable overall metrics and size-group table.
std::string format_summary(const CvReport& report);

/// Mean accuracy over the three middle size groups (0.01-10%); nullopt if any
/// of them is undefined.
std::optional<double> middle_group_accuracy(const CvReport& report);

}  // namespace isarf
