#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "isarf/cv.hpp"
#include "isarf/error.hpp"
#include "isarf/util.hpp"

namespace isarf {

namespace {

std::string num(const std::optional<double>& v) { return v ? format_shortest(*v) : std::string("null"); }

std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void write_counts(std::ostream& out, const ConfusionCounts& c) {
  out << c.tp << ',' << c.fn << ',' << c.tn << ',' << c.fp;
}

}  // namespace

void write_report(std::ostream& out, const CvReport& r) {
  out << "ISARF-REPORT v1\n";

  out << "\n[config]\n";
  out << "model=" << r.model << '\n';
  out << "seed=" << r.seed << '\n';
  out << "folds=" << r.folds << '\n';
  out << "stratified=class\n";
  out << "threshold=" << format_shortest(r.threshold) << '\n';
  out << "n_subjects=" << r.subjects.size() << '\n';
  out << "n_features=" << r.feature_names.size() << '\n';

  out << "\n[overall]\n";
  out << "aggregate,sen,spe,acc,auc,tp,fn,tn,fp\n";
  out << "pooled," << num(r.pooled.sensitivity) << ',' << num(r.pooled.specificity) << ','
      << num(r.pooled.accuracy) << ',' << num(r.pooled_auc) << ',';
  write_counts(out, r.pooled.counts);
  out << '\n';
  out << "fold_mean," << num(r.fold_mean.sensitivity) << ',' << num(r.fold_mean.specificity) << ','
      << num(r.fold_mean.accuracy) << ',' << num(r.fold_mean.auc) << ",null,null,null,null\n";

  out << "\n[per_fold]\n";
  out << "fold,n,sen,spe,acc,auc,tp,fn,tn,fp\n";
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
    const auto& fo = r.per_fold[f];
    out << f << ',' << fo.test_rows.size() << ',' << num(fo.metrics.sensitivity) << ','
        << num(fo.metrics.specificity) << ',' << num(fo.metrics.accuracy) << ',' << num(fo.auc) << ',';
    write_counts(out, fo.metrics.counts);
    out << '\n';
  }

  out << "\n[model]\n";
  out << "fold,lambda,n_selected,fallback,size_thresholds\n";
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
    const auto& fo = r.per_fold[f];
    std::vector<std::string> thresholds;
    for (double t : fo.size_thresholds) thresholds.push_back(format_shortest(t));
    out << f << ',' << format_shortest(fo.lambda) << ',' << fo.selected.size() << ','
        << (fo.selection_fallback ? 1 : 0) << ',' << (thresholds.empty() ? "none" : join(thresholds, ';')) << '\n';
  }

  out << "\n[per_group]\n";
  out << "group,n_covid,n_cap,sen,spe,acc,auc\n";
  for (const auto& g : r.per_group) {
    out << g.name << ',' << g.n_covid << ',' << g.n_cap << ',' << num(g.metrics.sensitivity) << ','
        << num(g.metrics.specificity) << ',' << num(g.metrics.accuracy) << ',' << num(g.auc) << '\n';
  }

  out << "\n[mean_roc]\n";
  out << "fpr,tpr\n";
  for (const auto& p : r.mean_roc) out << format_shortest(p.fpr) << ',' << format_shortest(p.tpr) << '\n';

  out << "\n[subjects]\n";
  out << "id,label,prob,fold,group\n";
  for (const auto& s : r.subjects) {
    out << s.id << ',' << to_string(s.label == 1 ? Label::Covid : Label::Cap) << ',' << format_shortest(s.probability)
        << ',' << s.fold << ',' << SizeGroupScheme::name(SizeGroupScheme::group_of(s.size_fraction)) << '\n';
  }

  out << "\n[selection_frequency]\n";
  out << "feature,count\n";
  for (const auto& [name, count] : r.selection_frequency) out << name << ',' << count << '\n';

  out << "\n[selected]\n";
  out << "fold,features\n";
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
    std::vector<std::string> names;
    for (int j : r.per_fold[f].selected) names.push_back(r.feature_names.at(static_cast<std::size_t>(j)));
    out << f << ',' << join(names, ';') << '\n';
  }
}

void write_report(const std::filesystem::path& path, const CvReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open report for writing: " + path.string());
  write_report(out, report);
  out.flush();
  if (!out) throw DataError("failed writing report: " + path.string());
}

std::string format_summary(const CvReport& r) {
  auto cell = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v)
      s << std::fixed << std::setprecision(3) << *v;
    else
      s << "null";
    return s.str();
  };
  std::ostringstream out;
  out << "model " << r.model << ", seed " << r.seed << ", " << r.folds << "-fold CV, " << r.subjects.size()
      << " subjects\n";
  out << "pooled     SEN " << cell(r.pooled.sensitivity) << "  SPE " << cell(r.pooled.specificity) << "  ACC "
      << cell(r.pooled.accuracy) << "  AUC " << cell(r.pooled_auc) << '\n';
  out << "fold mean  SEN " << cell(r.fold_mean.sensitivity) << "  SPE " << cell(r.fold_mean.specificity) << "  ACC "
      << cell(r.fold_mean.accuracy) << "  AUC " << cell(r.fold_mean.auc) << '\n';
  out << '\n' << std::left << std::setw(12) << "group" << std::right << std::setw(8) << "covid" << std::setw(8)
      << "cap" << std::setw(8) << "SEN" << std::setw(8) << "SPE" << std::setw(8) << "ACC" << std::setw(8) << "AUC"
      << '\n';
  for (const auto& g : r.per_group) {
    out << std::left << std::setw(12) << g.name << std::right << std::setw(8) << g.n_covid << std::setw(8) << g.n_cap
        << std::setw(8) << cell(g.metrics.sensitivity) << std::setw(8) << cell(g.metrics.specificity) << std::setw(8)
        << cell(g.metrics.accuracy) << std::setw(8) << cell(g.auc) << '\n';
  }
  return out.str();
}

}  // namespace isarf
