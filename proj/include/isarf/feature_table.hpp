#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "isarf/features.hpp"

namespace isarf {

/// In-memory form of a feature CSV: one row per subject.
struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::optional<Label>> labels;
  Eigen::VectorXd size_fractions;
  Eigen::MatrixXd values;  // rows = subjects, cols = manifest order
  std::vector<std::string> feature_names;
  std::uint64_t manifest_hash = 0;

  int rows() const { return static_cast<int>(ids.size()); }
  FeatureVector row(int i) const;
  /// 1 = COVID, 0 = CAP. DataError if any row is unlabelled.
  Eigen::VectorXi label_vector() const;
};

FeatureTable make_feature_table(const std::vector<FeatureVector>& rows);

/// Header: subject_id,label,size_fraction,<96 names>. Reals use 9
/// significant digits.
void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows);
void write_feature_csv(const std::filesystem::path& path, const std::vector<FeatureVector>& rows);

FeatureTable read_feature_csv(std::istream& in, const std::string& source = "<stream>");
FeatureTable read_feature_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace isarf
