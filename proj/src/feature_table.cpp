#include "isarf/feature_table.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "isarf/util.hpp"

namespace isarf {

FeatureVector FeatureTable::row(int i) const {
  FeatureVector fv;
  fv.subject_id = ids.at(static_cast<std::size_t>(i));
  fv.label = labels.at(static_cast<std::size_t>(i));
  fv.values = values.row(i).transpose();
  fv.size_fraction = size_fractions[i];
  fv.manifest_hash = manifest_hash;
  return fv;
}

Eigen::VectorXi FeatureTable::label_vector() const {
  Eigen::VectorXi y(rows());
  for (int i = 0; i < rows(); ++i) {
    const auto& l = labels[static_cast<std::size_t>(i)];
    if (!l) throw DataError("subject '" + ids[static_cast<std::size_t>(i)] + "' has no class label");
    y[i] = *l == Label::Covid ? 1 : 0;
  }
  return y;
}

FeatureTable make_feature_table(const std::vector<FeatureVector>& rows) {
  const auto& manifest = FeatureManifest::canonical();
  FeatureTable t;
  t.feature_names = manifest.names();
  t.manifest_hash = manifest.hash();
  const auto n = static_cast<Eigen::Index>(rows.size());
  t.size_fractions.resize(n);
  t.values.resize(n, manifest.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (r.values.size() != manifest.size()) throw DataError("feature vector has wrong length");
    t.ids.push_back(r.subject_id);
    t.labels.push_back(r.label);
    t.size_fractions[i] = r.size_fraction;
    t.values.row(i) = r.values.transpose();
  }
  return t;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows) {
  out << "subject_id,label,size_fraction";
  for (const auto& name : FeatureManifest::canonical().names()) out << ',' << name;
  out << '\n';
  for (const auto& r : rows) {
    out << r.subject_id << ',' << (r.label ? to_string(*r.label) : "") << ','
        << format_general(r.size_fraction, 9);
    for (Eigen::Index j = 0; j < r.values.size(); ++j) out << ',' << format_general(r.values[j], 9);
    out << '\n';
  }
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<FeatureVector>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_feature_csv(out, rows);
  if (!out) throw DataError(path.string() + ": write failed");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

FeatureTable read_feature_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty feature CSV");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "subject_id" || header[1] != "label" || header[2] != "size_fraction") {
    throw DataError(source + ": feature CSV header must start with subject_id,label,size_fraction");
  }
  FeatureTable t;
  t.feature_names.assign(header.begin() + 3, header.end());
  t.manifest_hash = FeatureManifest::hash_names(t.feature_names);
  const std::size_t p = t.feature_names.size();

  std::vector<double> sizes;
  std::vector<double> flat;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " columns, found " + std::to_string(cells.size()));
    }
    try {
      t.ids.push_back(cells[0]);
      t.labels.push_back(parse_label(cells[1]));
      sizes.push_back(parse_double(cells[2]));
      for (std::size_t j = 0; j < p; ++j) flat.push_back(parse_double(cells[3 + j]));
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  const auto n = static_cast<Eigen::Index>(t.ids.size());
  t.size_fractions = Eigen::Map<const Eigen::VectorXd>(sizes.data(), n);
  t.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n, static_cast<Eigen::Index>(p));
  if (!t.values.allFinite() || !t.size_fractions.allFinite()) {
    throw DataError(source + ": feature CSV contains non-finite values");
  }
  return t;
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open feature CSV");
  return read_feature_csv(in, path.string());
}

}  // namespace isarf
