#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "isarf/volume.hpp"

namespace isarf {

enum class Label { Cap = 0, Covid = 1 };

std::string to_string(Label label);
/// "COVID" / "CAP" / "" (unlabelled). Anything else is a DataError.
std::optional<Label> parse_label(std::string_view text);

enum class FeatureFamily { Volume, Number, Histogram, Surface };

std::string to_string(FeatureFamily family);

struct FeatureSpec {
  std::string name;
  FeatureFamily family;
  std::string unit;
};

/// Family layout inside the 96-entry vector.
namespace layout {
inline constexpr int kVolumeOffset = 0;
inline constexpr int kVolumeCount = 26;
inline constexpr int kNumberOffset = kVolumeOffset + kVolumeCount;
inline constexpr int kNumberCount = 31;
inline constexpr int kHistogramOffset = kNumberOffset + kNumberCount;
inline constexpr int kHistogramCount = 32;
inline constexpr int kSurfaceOffset = kHistogramOffset + kHistogramCount;
inline constexpr int kSurfaceCount = 7;
inline constexpr int kTotal = kSurfaceOffset + kSurfaceCount;
static_assert(kTotal == 96);
}  // namespace layout

/// Ordered list of the 96 feature names. Every output file carries it.
class FeatureManifest {
 public:
  static const FeatureManifest& canonical();

  int size() const { return static_cast<int>(specs_.size()); }
  const FeatureSpec& operator[](int i) const { return specs_.at(static_cast<std::size_t>(i)); }
  const std::vector<FeatureSpec>& specs() const { return specs_; }
  std::vector<std::string> names() const;
  /// -1 when absent.
  int index_of(std::string_view name) const;
  std::uint64_t hash() const { return hash_; }

  /// FNV-1a over the comma-joined names; computed identically for CSV headers.
  static std::uint64_t hash_names(const std::vector<std::string>& names);

 private:
  FeatureManifest();
  std::vector<FeatureSpec> specs_;
  std::uint64_t hash_ = 0;
};

std::string format_manifest_hash(std::uint64_t hash);

// Histogram: 30 bins of 50 HU over [-1350, 150), end bins absorb outliers.
inline constexpr double kHistLowHu = -1350.0;
inline constexpr double kHistHighHu = 150.0;
inline constexpr int kHistBins = 30;
inline constexpr double kHistBinWidth = (kHistHighHu - kHistLowHu) / kHistBins;

// Upper edges (voxels) of the wall-distance bands; the first band is closed.
inline constexpr std::array<int, 5> kSurfaceBandEdges{3, 6, 9, 12, 15};

inline constexpr double kDefaultSpacingMm = 1.5;
inline constexpr double kDefaultLargeLesionMl = 1.0;

struct SubjectRecord {
  std::string id;
  std::optional<Label> label;
  HuVolume intensity;
  Mask infection;
  LabelMap lung_labels;  // 0 outside lung, 1..18 segment codes
};

struct FeatureVector {
  std::string subject_id;
  std::optional<Label> label;
  Eigen::VectorXd values;     // 96 entries, manifest order
  double size_fraction = 0.0;  // == values[vol_pct_total]
  std::uint64_t manifest_hash = FeatureManifest::canonical().hash();
};

struct ExtractionOptions {
  double target_spacing_mm = kDefaultSpacingMm;
  double large_lesion_ml = kDefaultLargeLesionMl;
};

/// |infection ∩ lung| / |lung|. Throws DataError on an empty lung map.
double infection_fraction(const Mask& infection, const LabelMap& lung_labels);

Eigen::VectorXd volume_features(const Mask& infection, const LabelMap& lung_labels);
Eigen::VectorXd number_features(const Mask& infection, const LabelMap& lung_labels,
                                double large_lesion_ml = kDefaultLargeLesionMl);
Eigen::VectorXd histogram_features(const HuVolume& intensity, const Mask& infection);
Eigen::VectorXd surface_features(const Mask& infection, const LabelMap& lung_labels);

/// Resamples, clips the infection to the lung, and concatenates the four
/// families in manifest order.
FeatureVector extract_feature_vector(const SubjectRecord& subject, const ExtractionOptions& options = {});

}  // namespace isarf
