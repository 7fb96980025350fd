#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "isarf/features.hpp"
#include "isarf/volume.hpp"

namespace isarf {

/// Class-conditional generator knobs. Size regimes are the four intervals cut
/// by CohortConfig::breakpoints.
struct ClassProfile {
  double lesion_count_mean = 1.0;  // count = 1 + Poisson(mean - 1)
  double bilateral_prob = 0.5;
  double peripheral_prob = 0.5;
  double hu_mean = -500.0;         // mean lesion HU of a subject ~ N(hu_mean + hu_shift[r], hu_sd^2)
  double hu_sd = 100.0;
  double core_hu = 0.0;            // added at the lesion centre, fading to 0 at the rim
  std::array<double, 4> hu_shift{};
  std::array<double, 4> size_weights{0.25, 0.25, 0.25, 0.25};
};

struct CohortConfig {
  int n_subjects = 100;
  double covid_fraction = 0.6;
  Dims dims{64, 64, 64};
  double spacing_mm = 1.5;
  std::uint64_t seed = 0;
  std::array<double, 3> breakpoints{1e-4, 3e-3, 7e-2};
  double min_fraction = 2e-5;       // lower edge of the smallest regime
  double max_fraction = 0.3;        // upper edge of the largest regime
  double regime_margin = 1.1;       // targets keep this factor away from breakpoints
  double zero_size_prob = 0.25;     // share of smallest-regime subjects with no infection
  double lesion_voxel_sd = 60.0;
  double background_hu_mean = -850.0;
  double background_hu_sd = 50.0;
  double tissue_hu = 40.0;
  std::array<double, 2> lung_scale{0.75, 1.0};  // per-subject uniform factor on both lungs' semi-axes
  ClassProfile covid;
  ClassProfile cap;
  bool null_effect = false;

  static CohortConfig defaults();
  /// Both classes share one profile: the knob-wise mean of covid and cap.
  CohortConfig with_null_effect() const;
  const ClassProfile& profile(Label label) const;
  void validate() const;
};

struct LungField {
  LabelMap labels;  // 0 outside, 1..18 segment codes
  Mask lung;
};

/// Two disjoint jittered ellipsoidal lungs whose semi-axes are multiplied by
/// `scale`. Lobes are axial slabs and segments are coronal slabs within each
/// lobe, normalised to the local chord.
LungField generate_lung_fields(const Dims& dims, double spacing_mm, std::mt19937_64& rng, double scale = 1.0);

struct GroundTruth {
  std::string id;
  Label label = Label::Cap;
  double size_target = 0.0;
  double size_fraction = 0.0;
  int lesion_count = 0;  // 26-connected infection components
  bool bilateral = false;
  double peripherality = 0.0;  // share of infection voxels within 3 voxels of the lung wall
};

struct GeneratedSubject {
  SubjectRecord record;
  GroundTruth truth;
};

/// Regime index 0..3 of a size fraction.
int size_regime(double fraction, const std::array<double, 3>& breakpoints);

/// Draws a regime from the class weights, then a log-uniform fraction inside it.
double sample_size_target(const ClassProfile& profile, const CohortConfig& config, std::mt19937_64& rng);

/// Lesion voxel count is round(size_target * lung voxels), at least 1 for a
/// positive target. DataError if the target exceeds what one lung can hold.
GeneratedSubject generate_subject(const std::string& id, Label label, double size_target, const CohortConfig& config,
                                  std::mt19937_64& rng);

struct SubjectPlan {
  Label label = Label::Cap;
  double size_target = 0.0;
};

/// Label and size target of subject `index`, without building volumes.
SubjectPlan plan_indexed_subject(const CohortConfig& config, int index);

/// Subject `index` of the cohort, seeded by derive_seed(config.seed, index).
/// Its label and target equal plan_indexed_subject(config, index).
GeneratedSubject generate_indexed_subject(const CohortConfig& config, int index);

std::string subject_id(int index, int n_subjects);

/// Writes manifest.csv, truth.csv and three SVOL files per subject.
std::vector<GroundTruth> generate_cohort(const CohortConfig& config, const std::filesystem::path& out_dir, int jobs = 1);

struct CohortEntry {
  std::string id;
  std::optional<Label> label;
  std::array<std::string, 3> files;  // intensity, infection, lung labels
  std::optional<double> size_target;
};

std::vector<CohortEntry> read_cohort_manifest(const std::filesystem::path& cohort_dir);
SubjectRecord load_subject(const std::filesystem::path& cohort_dir, const CohortEntry& entry);

/// Feature vectors in manifest order; independent of `jobs`.
std::vector<FeatureVector> extract_cohort(const std::filesystem::path& cohort_dir, const ExtractionOptions& options = {},
                                          int jobs = 1);

}  // namespace isarf
