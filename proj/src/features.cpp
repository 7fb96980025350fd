#include "isarf/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "isarf/geometry.hpp"
#include "isarf/taxonomy.hpp"
#include "isarf/util.hpp"

namespace isarf {

std::string to_string(Label label) { return label == Label::Covid ? "COVID" : "CAP"; }

std::optional<Label> parse_label(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text == "COVID") return Label::Covid;
  if (text == "CAP") return Label::Cap;
  throw DataError("unknown class label '" + std::string(text) + "' (expected COVID, CAP or empty)");
}

std::string to_string(FeatureFamily family) {
  switch (family) {
    case FeatureFamily::Volume: return "volume";
    case FeatureFamily::Number: return "number";
    case FeatureFamily::Histogram: return "histogram";
    case FeatureFamily::Surface: return "surface";
  }
  return "?";
}

namespace {

std::string two_digit(int i) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", i);
  return buf;
}

}  // namespace

FeatureManifest::FeatureManifest() {
  auto add = [&](std::string name, FeatureFamily f, std::string unit) {
    specs_.push_back({std::move(name), f, std::move(unit)});
  };
  using F = FeatureFamily;

  add("vol_abs_total", F::Volume, "mL");
  add("vol_pct_total", F::Volume, "fraction");
  for (int l = 1; l <= 5; ++l) add("vol_pct_lobe_" + std::to_string(l), F::Volume, "fraction");
  for (int s = 1; s <= 18; ++s) add("vol_pct_seg_" + two_digit(s), F::Volume, "fraction");
  add("vol_pct_lr_diff", F::Volume, "fraction");

  add("num_total", F::Number, "count");
  add("num_lung_L", F::Number, "count");
  add("num_lung_R", F::Number, "count");
  add("num_lr_diff", F::Number, "count");
  for (int l = 1; l <= 5; ++l) add("num_lobe_" + std::to_string(l), F::Number, "count");
  for (int s = 1; s <= 18; ++s) add("num_seg_" + two_digit(s), F::Number, "count");
  add("lesion_vol_mean", F::Number, "mL");
  add("lesion_vol_max", F::Number, "mL");
  add("lesion_vol_std", F::Number, "mL");
  add("num_large", F::Number, "count");

  for (int b = 0; b < kHistBins; ++b) add("hist_bin_" + two_digit(b), F::Histogram, "fraction");
  add("hist_mean", F::Histogram, "HU");
  add("hist_std", F::Histogram, "HU");

  for (int b = 1; b <= 5; ++b) add("surf_cnt_band_" + std::to_string(b), F::Surface, "count");
  add("surf_total", F::Surface, "count");
  add("surf_peripheral_frac", F::Surface, "fraction");

  hash_ = hash_names(names());
}

const FeatureManifest& FeatureManifest::canonical() {
  static const FeatureManifest manifest;
  return manifest;
}

std::vector<std::string> FeatureManifest::names() const {
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const auto& s : specs_) out.push_back(s.name);
  return out;
}

int FeatureManifest::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i)
    if (specs_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::uint64_t FeatureManifest::hash_names(const std::vector<std::string>& names) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) mix(',');
    for (char c : names[i]) mix(static_cast<unsigned char>(c));
  }
  return h;
}

std::string format_manifest_hash(std::uint64_t hash) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

void require_same_grid(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b)) throw DataError(std::string("dimension mismatch between infection and ") + what);
}

int lobe_of(std::uint8_t seg) { return SegmentTaxonomy::lobe_of_segment(seg); }
bool is_left(std::uint8_t seg) { return SegmentTaxonomy::lung_of_segment(seg) == Lung::Left; }

double safe_ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

// Counts 26-connected components of (infection ∩ region) by flood fill that
// only ever touches infected voxels.
class RegionLesionCounter {
 public:
  RegionLesionCounter(const Mask& infection, const LabelMap& labels)
      : infection_(infection), labels_(labels), stamp_(infection.size(), 0) {
    for (std::size_t i = 0; i < infection.size(); ++i)
      if (infection[i] != 0 && labels[i] != 0) infected_.push_back(i);
  }

  template <typename InRegion>
  int count(InRegion in_region) {
    ++epoch_;
    const Dims d = infection_.dims();
    int components = 0;
    for (std::size_t seed : infected_) {
      if (stamp_[seed] == epoch_ || !in_region(labels_[seed])) continue;
      ++components;
      queue_.clear();
      queue_.push_back(seed);
      stamp_[seed] = epoch_;
      for (std::size_t head = 0; head < queue_.size(); ++head) {
        const Eigen::Vector3i c = d.coord(queue_[head]);
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int x = c.x() + dx, y = c.y() + dy, z = c.z() + dz;
              if (!d.contains(x, y, z)) continue;
              const std::size_t n = d.index(x, y, z);
              if (stamp_[n] == epoch_ || infection_[n] == 0) continue;
              const std::uint8_t seg = labels_[n];
              if (seg == 0 || !in_region(seg)) continue;
              stamp_[n] = epoch_;
              queue_.push_back(n);
            }
      }
    }
    return components;
  }

 private:
  const Mask& infection_;
  const LabelMap& labels_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  VoxelList infected_;
  std::vector<std::size_t> queue_;
};

}  // namespace

double infection_fraction(const Mask& infection, const LabelMap& lung_labels) {
  require_same_grid(infection.dims(), lung_labels.dims(), "lung label map");
  std::size_t lung = 0, infected = 0, outside = 0;
  for (std::size_t i = 0; i < infection.size(); ++i) {
    const bool in_lung = lung_labels[i] != 0;
    lung += in_lung;
    if (infection[i] != 0) {
      if (in_lung) ++infected;
      else ++outside;
    }
  }
  if (lung == 0) throw DataError("lung label map is empty");
  if (outside > 0) {
    log_warning(std::to_string(outside) + " infected voxels outside the lung were ignored");
  }
  return static_cast<double>(infected) / static_cast<double>(lung);
}

Eigen::VectorXd volume_features(const Mask& infection, const LabelMap& lung_labels) {
  require_same_grid(infection.dims(), lung_labels.dims(), "lung label map");
  std::array<double, SegmentTaxonomy::kSegments + 1> seg_lung{}, seg_inf{};
  for (std::size_t i = 0; i < infection.size(); ++i) {
    const std::uint8_t seg = lung_labels[i];
    if (seg == 0) continue;
    seg_lung[seg] += 1;
    if (infection[i] != 0) seg_inf[seg] += 1;
  }
  std::array<double, SegmentTaxonomy::kLobes + 1> lobe_lung{}, lobe_inf{};
  double lung_l = 0, lung_r = 0, inf_l = 0, inf_r = 0;
  for (int s = 1; s <= SegmentTaxonomy::kSegments; ++s) {
    lobe_lung[lobe_of(s)] += seg_lung[s];
    lobe_inf[lobe_of(s)] += seg_inf[s];
    (is_left(s) ? lung_l : lung_r) += seg_lung[s];
    (is_left(s) ? inf_l : inf_r) += seg_inf[s];
  }
  const double lung_total = lung_l + lung_r;
  const double inf_total = inf_l + inf_r;

  Eigen::VectorXd f(layout::kVolumeCount);
  int o = 0;
  f[o++] = inf_total * infection.voxel_volume_mm3() / 1000.0;
  f[o++] = safe_ratio(inf_total, lung_total);
  for (int l = 1; l <= SegmentTaxonomy::kLobes; ++l) f[o++] = safe_ratio(lobe_inf[l], lobe_lung[l]);
  for (int s = 1; s <= SegmentTaxonomy::kSegments; ++s) f[o++] = safe_ratio(seg_inf[s], seg_lung[s]);
  f[o++] = std::abs(safe_ratio(inf_l, lung_l) - safe_ratio(inf_r, lung_r));
  return f;
}

Eigen::VectorXd number_features(const Mask& infection, const LabelMap& lung_labels, double large_lesion_ml) {
  require_same_grid(infection.dims(), lung_labels.dims(), "lung label map");
  RegionLesionCounter counter(infection, lung_labels);
  Eigen::VectorXd f(layout::kNumberCount);
  int o = 0;
  f[o++] = counter.count([](std::uint8_t) { return true; });
  const int left = counter.count([](std::uint8_t s) { return is_left(s); });
  const int right = counter.count([](std::uint8_t s) { return !is_left(s); });
  f[o++] = left;
  f[o++] = right;
  f[o++] = std::abs(left - right);
  for (int l = 1; l <= SegmentTaxonomy::kLobes; ++l)
    f[o++] = counter.count([l](std::uint8_t s) { return lobe_of(s) == l; });
  for (int seg = 1; seg <= SegmentTaxonomy::kSegments; ++seg)
    f[o++] = counter.count([seg](std::uint8_t s) { return s == seg; });

  // Lesion size statistics use whole-lung lesions.
  const Mask clipped = mask_where(lung_labels, [](std::uint8_t s) { return s != 0; });
  Mask lesion_mask = infection;
  lesion_mask.data() = (infection.data() != 0 && clipped.data() != 0).cast<std::uint8_t>();
  const auto sizes = component_sizes(lesion_mask, Connectivity::TwentySix);
  const double ml_per_voxel = infection.voxel_volume_mm3() / 1000.0;
  double mean = 0, max = 0, sd = 0;
  int large = 0;
  if (!sizes.empty()) {
    Eigen::ArrayXd ml(static_cast<Eigen::Index>(sizes.size()));
    for (std::size_t i = 0; i < sizes.size(); ++i) ml[static_cast<Eigen::Index>(i)] = sizes[i] * ml_per_voxel;
    mean = ml.mean();
    max = ml.maxCoeff();
    sd = std::sqrt((ml - mean).square().mean());
    large = static_cast<int>((ml >= large_lesion_ml).count());
  }
  f[o++] = mean;
  f[o++] = max;
  f[o++] = sd;
  f[o++] = large;
  return f;
}

Eigen::VectorXd histogram_features(const HuVolume& intensity, const Mask& infection) {
  require_same_grid(infection.dims(), intensity.dims(), "intensity volume");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(layout::kHistogramCount);
  double n = 0, sum = 0;
  for (std::size_t i = 0; i < infection.size(); ++i) {
    if (infection[i] == 0) continue;
    const double hu = intensity[i];
    const int bin = std::clamp(static_cast<int>(std::floor((hu - kHistLowHu) / kHistBinWidth)), 0, kHistBins - 1);
    f[bin] += 1;
    n += 1;
    sum += hu;
  }
  if (n == 0) return f;
  const double mean = sum / n;
  double ss = 0;
  for (std::size_t i = 0; i < infection.size(); ++i) {
    if (infection[i] == 0) continue;
    const double dev = intensity[i] - mean;
    ss += dev * dev;
  }
  f.head(kHistBins) /= n;
  f[kHistBins] = mean;
  f[kHistBins + 1] = std::sqrt(ss / n);
  return f;
}

Eigen::VectorXd surface_features(const Mask& infection, const LabelMap& lung_labels) {
  require_same_grid(infection.dims(), lung_labels.dims(), "lung label map");
  const Mask lung = mask_where(lung_labels, [](std::uint8_t s) { return s != 0; });
  const VoxelList wall = boundary_voxels(lung);
  if (wall.empty()) throw DataError("surface features need a non-empty lung");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(layout::kSurfaceCount);
  const VoxelList surface = boundary_voxels(infection);
  if (surface.empty()) return f;

  // Band membership is decided on exact squared distances.
  const Volume<double> d2 = squared_distance_transform(wall, lung.dims());
  for (std::size_t v : surface) {
    const double dist2 = d2[v];
    for (std::size_t b = 0; b < kSurfaceBandEdges.size(); ++b) {
      const double edge = kSurfaceBandEdges[b];
      if (dist2 <= edge * edge) {
        f[static_cast<Eigen::Index>(b)] += 1;
        break;
      }
    }
  }
  const double total = static_cast<double>(surface.size());
  f[5] = total;
  f[6] = f.head(5).sum() / total;
  return f;
}

FeatureVector extract_feature_vector(const SubjectRecord& subject, const ExtractionOptions& options) {
  const double target = options.target_spacing_mm;
  auto needs_resample = [&](const Eigen::Vector3d& spacing) {
    return !(spacing.array() == target).all();
  };
  const HuVolume intensity = needs_resample(subject.intensity.spacing())
                                 ? resample_isotropic(subject.intensity, target, Interpolation::Trilinear)
                                 : subject.intensity;
  const Mask raw_infection = needs_resample(subject.infection.spacing())
                                 ? resample_isotropic(subject.infection, target, Interpolation::Nearest)
                                 : subject.infection;
  const LabelMap lungs = needs_resample(subject.lung_labels.spacing())
                             ? resample_isotropic(subject.lung_labels, target, Interpolation::Nearest)
                             : subject.lung_labels;
  if (!(raw_infection.dims() == lungs.dims()) || !(intensity.dims() == lungs.dims())) {
    throw DataError(subject.id + ": volumes do not share dims after resampling");
  }

  const double size_fraction = infection_fraction(raw_infection, lungs);
  Mask infection = raw_infection;
  infection.data() = (raw_infection.data() != 0 && lungs.data() != 0).cast<std::uint8_t>();

  FeatureVector fv;
  fv.subject_id = subject.id;
  fv.label = subject.label;
  fv.values.resize(layout::kTotal);
  fv.values.segment(layout::kVolumeOffset, layout::kVolumeCount) = volume_features(infection, lungs);
  fv.values.segment(layout::kNumberOffset, layout::kNumberCount) =
      number_features(infection, lungs, options.large_lesion_ml);
  fv.values.segment(layout::kHistogramOffset, layout::kHistogramCount) = histogram_features(intensity, infection);
  fv.values.segment(layout::kSurfaceOffset, layout::kSurfaceCount) = surface_features(infection, lungs);
  fv.size_fraction = size_fraction;
  return fv;
}

}  // namespace isarf
