#include "isarf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isarf/error.hpp"

namespace isarf {

RocResult roc_and_auc(const Eigen::Ref<const Eigen::VectorXd>& scores, const Eigen::Ref<const Eigen::VectorXi>& labels) {
  if (scores.size() != labels.size()) throw DataError("ROC: scores and labels differ in length");
  if (!scores.allFinite()) throw DataError("ROC: non-finite score");
  const Eigen::Index n = scores.size();
  long long P = 0, N = 0;
  for (Eigen::Index i = 0; i < n; ++i) (labels[i] != 0 ? P : N)++;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });

  RocResult out;
  out.points.push_back({0.0, 0.0});
  long long tp = 0, fp = 0, twice_area = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    long long dtp = 0, dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] != 0 ? dtp : dfp)++;
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    out.points.push_back({N > 0 ? double(fp) / double(N) : 0.0, P > 0 ? double(tp) / double(P) : 0.0});
  }
  if (P > 0 && N > 0) out.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
  return out;
}

ConfusionMetrics metrics_from_counts(const ConfusionCounts& c) {
  ConfusionMetrics m;
  m.counts = c;
  if (c.positives() > 0) m.sensitivity = double(c.tp) / double(c.positives());
  if (c.negatives() > 0) m.specificity = double(c.tn) / double(c.negatives());
  if (c.total() > 0) m.accuracy = double(c.tp + c.tn) / double(c.total());
  return m;
}

ConfusionMetrics confusion_metrics(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                   const Eigen::Ref<const Eigen::VectorXi>& labels, double threshold) {
  if (scores.size() != labels.size()) throw DataError("confusion: scores and labels differ in length");
  ConfusionCounts c;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] != 0) (predicted ? c.tp : c.fn)++;
    else (predicted ? c.fp : c.tn)++;
  }
  return metrics_from_counts(c);
}

int SizeGroupScheme::group_of(double fraction) {
  return static_cast<int>(std::upper_bound(kBoundaries.begin(), kBoundaries.end(), fraction) - kBoundaries.begin());
}

const std::string& SizeGroupScheme::name(int group) {
  static const std::array<std::string, kGroups> names{"<0.01%", "0.01-0.1%", "0.1-1%", "1-10%", ">10%"};
  return names.at(static_cast<std::size_t>(group));
}

std::vector<GroupMetrics> size_group_breakdown(const std::vector<SubjectResult>& results, double threshold) {
  std::vector<GroupMetrics> out(SizeGroupScheme::kGroups);
  for (int g = 0; g < SizeGroupScheme::kGroups; ++g) {
    std::vector<double> s;
    std::vector<int> l;
    for (const auto& r : results) {
      if (SizeGroupScheme::group_of(r.size_fraction) != g) continue;
      s.push_back(r.probability);
      l.push_back(r.label);
    }
    const Eigen::Map<const Eigen::VectorXd> scores(s.data(), static_cast<Eigen::Index>(s.size()));
    const Eigen::Map<const Eigen::VectorXi> labels(l.data(), static_cast<Eigen::Index>(l.size()));
    GroupMetrics& gm = out[static_cast<std::size_t>(g)];
    gm.name = SizeGroupScheme::name(g);
    gm.n_covid = static_cast<int>(labels.sum());
    gm.n_cap = static_cast<int>(labels.size()) - gm.n_covid;
    gm.metrics = confusion_metrics(scores, labels, threshold);
    gm.auc = roc_and_auc(scores, labels).auc;
  }
  return out;
}

double interpolate_tpr(const std::vector<RocPoint>& curve, double fpr) {
  if (curve.empty()) throw DataError("empty ROC curve");
  // Last point with point.fpr <= fpr.
  auto it = std::upper_bound(curve.begin(), curve.end(), fpr,
                             [](double f, const RocPoint& p) { return f < p.fpr; });
  if (it == curve.begin()) return curve.front().tpr;
  const RocPoint& a = *(it - 1);
  if (a.fpr == fpr || it == curve.end()) return a.tpr;
  const RocPoint& b = *it;
  return a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr);
}

std::vector<RocPoint> mean_roc(const std::vector<std::vector<RocPoint>>& curves, int grid_points) {
  if (curves.empty()) throw DataError("mean ROC needs at least one curve");
  if (grid_points < 2) throw UsageError("mean ROC grid needs at least two points");
  std::vector<RocPoint> out(static_cast<std::size_t>(grid_points));
  for (int g = 0; g < grid_points; ++g) {
    const double f = static_cast<double>(g) / (grid_points - 1);
    double sum = 0.0;
    for (const auto& c : curves) sum += interpolate_tpr(c, f);
    out[static_cast<std::size_t>(g)] = {f, std::clamp(sum / static_cast<double>(curves.size()), 0.0, 1.0)};
  }
  out.front().tpr = 0.0;
  out.back().tpr = 1.0;
  return out;
}

}  // namespace isarf
