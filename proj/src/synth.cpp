#include "isarf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "isarf/error.hpp"
#include "isarf/geometry.hpp"
#include "isarf/svol.hpp"
#include "isarf/taxonomy.hpp"
#include "isarf/util.hpp"

namespace isarf {

namespace {

constexpr double kPeripheralBandSq = 9.0;  // within 3 voxels of the wall
constexpr double kCentralMinSq = 25.0;     // at least 5 voxels from the wall

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool bernoulli(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

double normal(std::mt19937_64& rng, double mean, double sd) {
  return sd > 0 ? std::normal_distribution<double>(mean, sd)(rng) : mean;
}

std::int16_t to_hu(double v) { return static_cast<std::int16_t>(std::lround(std::clamp(v, -1024.0, 3071.0))); }

template <std::size_t N>
std::array<double, N> mean_of(const std::array<double, N>& a, const std::array<double, N>& b) {
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = 0.5 * (a[i] + b[i]);
  return out;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError(std::string(what) + " must lie in [0,1]");
}

}  // namespace

CohortConfig CohortConfig::defaults() {
  // Count, laterality and periphery cues are shared; the class signal is the
  // lesion HU, whose sign flips between adjacent size regimes.
  CohortConfig c;
  for (ClassProfile* p : {&c.covid, &c.cap}) {
    p->lesion_count_mean = 1.6;
    p->bilateral_prob = 0.4;
    p->peripheral_prob = 0.5;
    p->hu_mean = -500.0;
    p->hu_sd = 100.0;
    p->core_hu = 0.0;
  }
  c.covid.hu_shift = {-150.0, 200.0, -150.0, 200.0};
  c.covid.size_weights = {0.03, 0.17, 0.30, 0.50};
  c.cap.hu_shift = {150.0, -150.0, 150.0, -150.0};
  c.cap.size_weights = {0.45, 0.35, 0.18, 0.02};
  return c;
}

CohortConfig CohortConfig::with_null_effect() const {
  CohortConfig c = *this;
  ClassProfile p;
  p.lesion_count_mean = 0.5 * (covid.lesion_count_mean + cap.lesion_count_mean);
  p.bilateral_prob = 0.5 * (covid.bilateral_prob + cap.bilateral_prob);
  p.peripheral_prob = 0.5 * (covid.peripheral_prob + cap.peripheral_prob);
  p.hu_mean = 0.5 * (covid.hu_mean + cap.hu_mean);
  p.hu_sd = 0.5 * (covid.hu_sd + cap.hu_sd);
  p.core_hu = 0.5 * (covid.core_hu + cap.core_hu);
  p.hu_shift = mean_of(covid.hu_shift, cap.hu_shift);
  p.size_weights = mean_of(covid.size_weights, cap.size_weights);
  c.covid = p;
  c.cap = p;
  c.null_effect = true;
  return c;
}

const ClassProfile& CohortConfig::profile(Label label) const { return label == Label::Covid ? covid : cap; }

void CohortConfig::validate() const {
  if (n_subjects < 1) throw UsageError("cohort needs at least one subject");
  check_probability(covid_fraction, "covid fraction");
  check_probability(zero_size_prob, "zero-size probability");
  if (dims.x < 32 || dims.y < 32 || dims.z < 32) throw UsageError("synthetic grid must be at least 32^3");
  if (!(spacing_mm > 0)) throw UsageError("spacing must be positive");
  if (!(min_fraction > 0 && min_fraction < breakpoints[0] && breakpoints[0] < breakpoints[1] &&
        breakpoints[1] < breakpoints[2] && breakpoints[2] < max_fraction && max_fraction <= 0.6)) {
    throw UsageError("size breakpoints must increase strictly within (0, 0.6]");
  }
  if (!(regime_margin >= 1.0)) throw UsageError("regime margin must be >= 1");
  if (!(lung_scale[0] >= 0.5 && lung_scale[0] <= lung_scale[1] && lung_scale[1] <= 1.0)) {
    throw UsageError("lung scale range must satisfy 0.5 <= low <= high <= 1");
  }
  for (const ClassProfile* p : {&covid, &cap}) {
    check_probability(p->bilateral_prob, "bilateral probability");
    check_probability(p->peripheral_prob, "peripheral probability");
    if (!(p->lesion_count_mean >= 1.0)) throw UsageError("lesion count mean must be >= 1");
    if (!(p->hu_sd >= 0)) throw UsageError("HU spread must be non-negative");
    double total = 0;
    for (double w : p->size_weights) {
      if (!(w >= 0)) throw UsageError("size weights must be non-negative");
      total += w;
    }
    if (!(total > 0)) throw UsageError("size weights must not all be zero");
  }
}

LungField generate_lung_fields(const Dims& dims, double spacing_mm, std::mt19937_64& rng, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw UsageError("lung scale must lie in (0, 1]");
  const Eigen::Vector3d spacing = Eigen::Vector3d::Constant(spacing_mm);
  LungField field{LabelMap(dims, spacing, VolumeKind::Labels), Mask(dims, spacing, VolumeKind::Mask)};

  struct Ellipsoid {
    Eigen::Vector3d centre, axes;
  };
  std::array<Ellipsoid, 2> lungs;  // [0] right lung (low x), [1] left lung
  const double half_gap = 0.03 * dims.x;
  for (int side = 0; side < 2; ++side) {
    Eigen::Vector3d axes = scale * Eigen::Vector3d(0.21 * dims.x, 0.36 * dims.y, 0.42 * dims.z);
    for (int a = 0; a < 3; ++a) axes[a] *= uniform(rng, 0.93, 1.07);
    const double sign = side == 0 ? -1.0 : 1.0;
    Eigen::Vector3d centre(0.5 * dims.x + sign * (axes[0] + half_gap), 0.5 * dims.y + uniform(rng, -1.5, 1.5),
                           0.5 * dims.z + uniform(rng, -1.5, 1.5));
    lungs[static_cast<std::size_t>(side)] = {centre, axes};
  }

  constexpr std::array<int, 6> kFirstSegment{0, 1, 4, 6, 11, 15};
  const auto seg_count = SegmentTaxonomy::segments_per_lobe();
  for (int k = 0; k < dims.z; ++k)
    for (int j = 0; j < dims.y; ++j)
      for (int i = 0; i < dims.x; ++i) {
        for (int side = 0; side < 2; ++side) {
          const auto& e = lungs[static_cast<std::size_t>(side)];
          const double w = (i + 0.5 - e.centre[0]) / e.axes[0];
          const double v = (j + 0.5 - e.centre[1]) / e.axes[1];
          const double u = (k + 0.5 - e.centre[2]) / e.axes[2];
          const double r2 = w * w + v * v + u * u;
          if (r2 > 1.0) continue;
          int lobe;
          if (side == 0)
            lobe = u > 0.2 ? 1 : (u > -0.25 ? 2 : 3);
          else
            lobe = u > -0.05 ? 4 : 5;
          const double chord = std::sqrt(std::max(1e-12, 1.0 - w * w - u * u));
          const double t = std::clamp((v / chord + 1.0) * 0.5, 0.0, 1.0);
          const int n = seg_count[static_cast<std::size_t>(lobe)];
          const int slot = std::min(n - 1, static_cast<int>(t * n));
          const std::size_t idx = dims.index(i, j, k);
          field.labels[idx] = static_cast<std::uint8_t>(kFirstSegment[static_cast<std::size_t>(lobe)] + slot);
          field.lung[idx] = 1;
        }
      }
  return field;
}

int size_regime(double fraction, const std::array<double, 3>& breakpoints) {
  return static_cast<int>(std::upper_bound(breakpoints.begin(), breakpoints.end(), fraction) - breakpoints.begin());
}

double sample_size_target(const ClassProfile& profile, const CohortConfig& config, std::mt19937_64& rng) {
  std::discrete_distribution<int> pick(profile.size_weights.begin(), profile.size_weights.end());
  const int r = pick(rng);
  if (r == 0 && bernoulli(rng, config.zero_size_prob)) return 0.0;
  const double m = config.regime_margin;
  const double lo = r == 0 ? config.min_fraction : config.breakpoints[static_cast<std::size_t>(r - 1)] * m;
  const double hi = r == 3 ? config.max_fraction : config.breakpoints[static_cast<std::size_t>(r)] / m;
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

GeneratedSubject generate_subject(const std::string& id, Label label, double size_target, const CohortConfig& config,
                                  std::mt19937_64& rng) {
  if (!(size_target >= 0.0 && size_target <= 0.6)) throw UsageError("size target must lie in [0, 0.6]");
  const ClassProfile& profile = config.profile(label);
  const Dims& dims = config.dims;

  const double scale = uniform(rng, config.lung_scale[0], config.lung_scale[1]);
  LungField field = generate_lung_fields(dims, config.spacing_mm, rng, scale);
  const VoxelList wall = boundary_voxels(field.lung);
  const Volume<double> wall_d2 = squared_distance_transform(wall, dims);

  std::array<std::vector<std::size_t>, 2> lung_voxels;
  for (std::size_t v = 0; v < field.labels.size(); ++v) {
    if (field.labels[v] == 0) continue;
    lung_voxels[SegmentTaxonomy::lung_of_segment(field.labels[v]) == Lung::Right ? 0 : 1].push_back(v);
  }
  const std::size_t lung_total = lung_voxels[0].size() + lung_voxels[1].size();

  HuVolume intensity(dims, field.labels.spacing(), VolumeKind::Intensity);
  for (std::size_t v = 0; v < intensity.size(); ++v) {
    intensity[v] = field.lung[v] ? to_hu(normal(rng, config.background_hu_mean, config.background_hu_sd))
                                 : to_hu(normal(rng, config.tissue_hu, 10.0));
  }
  Mask infection = field.lung.like<std::uint8_t>(VolumeKind::Mask);

  std::size_t target_voxels = 0;
  if (size_target > 0) {
    target_voxels = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(size_target * lung_total)));
  }

  if (target_voxels > 0) {
    const int regime = size_regime(size_target, config.breakpoints);
    const double subject_hu =
        normal(rng, profile.hu_mean + profile.hu_shift[static_cast<std::size_t>(regime)], profile.hu_sd);

    std::poisson_distribution<int> extra(profile.lesion_count_mean - 1.0);
    int lesions = 1 + (profile.lesion_count_mean > 1.0 ? extra(rng) : 0);
    lesions = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(lesions), target_voxels));

    const bool bilateral = lesions >= 2 && bernoulli(rng, profile.bilateral_prob);
    const int first_side = bernoulli(rng, 0.5) ? 1 : 0;

    std::vector<double> weights(static_cast<std::size_t>(lesions));
    for (double& w : weights) w = uniform(rng, 0.3, 1.0);
    const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> budget(static_cast<std::size_t>(lesions), 1);
    std::size_t assigned = static_cast<std::size_t>(lesions);
    for (std::size_t l = 0; l < budget.size(); ++l) {
      const auto share = static_cast<std::size_t>(
          std::floor(static_cast<double>(target_voxels - static_cast<std::size_t>(lesions)) * weights[l] / weight_sum));
      budget[l] += share;
      assigned += share;
    }
    for (std::size_t l = 0; assigned < target_voxels; l = (l + 1) % budget.size(), ++assigned) ++budget[l];

    std::vector<std::pair<double, std::size_t>> ranked;
    for (int l = 0; l < lesions; ++l) {
      const int side = bilateral ? (first_side + l) % 2 : first_side;
      const auto& pool = lung_voxels[static_cast<std::size_t>(side)];
      const bool peripheral = bernoulli(rng, profile.peripheral_prob);

      std::vector<std::size_t> candidates;
      std::size_t available = 0;
      for (std::size_t v : pool) {
        if (infection[v]) continue;
        ++available;
        const double d2 = wall_d2[v];
        if (peripheral ? d2 <= kPeripheralBandSq : d2 >= kCentralMinSq) candidates.push_back(v);
      }
      if (budget[static_cast<std::size_t>(l)] > available) {
        throw DataError("subject " + id + ": size target " + format_shortest(size_target) + " is unreachable");
      }
      if (candidates.empty()) {
        for (std::size_t v : pool)
          if (!infection[v]) candidates.push_back(v);
      }
      const std::size_t centre =
          candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
      const Eigen::Vector3d c = dims.coord(centre).cast<double>();
      const Eigen::Vector3d axes(uniform(rng, 0.6, 1.4), uniform(rng, 0.6, 1.4), uniform(rng, 0.6, 1.4));
      Eigen::Vector3d tilt(normal(rng, 0, 1), normal(rng, 0, 1), normal(rng, 0, 1));
      tilt.normalize();
      const double lopsided = uniform(rng, 0.0, 0.3);

      ranked.clear();
      for (std::size_t v : pool) {
        if (infection[v]) continue;
        const Eigen::Vector3d d = dims.coord(v).cast<double>() - c;
        const double norm = d.norm();
        const double radial = d.cwiseQuotient(axes).norm();
        const double stretch = norm > 0 ? 1.0 + lopsided * d.dot(tilt) / norm : 1.0;
        ranked.emplace_back(radial * stretch, v);
      }
      const std::size_t take = budget[static_cast<std::size_t>(l)];
      std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end());
      for (std::size_t q = 0; q < take; ++q) {
        const std::size_t v = ranked[q].second;
        const double rim = take > 1 ? static_cast<double>(q) / static_cast<double>(take - 1) : 0.0;
        infection[v] = 1;
        intensity[v] = to_hu(subject_hu + profile.core_hu * (1.0 - rim) * (1.0 - rim) +
                             normal(rng, 0.0, config.lesion_voxel_sd));
      }
    }
  }

  GeneratedSubject out;
  out.truth.id = id;
  out.truth.label = label;
  out.truth.size_target = size_target;
  std::size_t infected = 0, near_wall = 0;
  std::array<bool, 2> touched{false, false};
  for (std::size_t v = 0; v < infection.size(); ++v) {
    if (!infection[v]) continue;
    ++infected;
    if (wall_d2[v] <= kPeripheralBandSq) ++near_wall;
    touched[SegmentTaxonomy::lung_of_segment(field.labels[v]) == Lung::Right ? 0 : 1] = true;
  }
  out.truth.size_fraction = static_cast<double>(infected) / static_cast<double>(lung_total);
  out.truth.lesion_count = static_cast<int>(component_sizes(infection, Connectivity::TwentySix).size());
  out.truth.bilateral = touched[0] && touched[1];
  out.truth.peripherality = infected ? static_cast<double>(near_wall) / static_cast<double>(infected) : 0.0;
  out.record = SubjectRecord{id, label, std::move(intensity), std::move(infection), std::move(field.labels)};
  return out;
}

std::string subject_id(int index, int n_subjects) {
  const int width = std::max(4, static_cast<int>(std::to_string(std::max(0, n_subjects - 1)).size()));
  std::string digits = std::to_string(index);
  return "S" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') +
         digits;
}

namespace {

SubjectPlan draw_plan(const CohortConfig& config, std::mt19937_64& rng) {
  SubjectPlan plan;
  plan.label = bernoulli(rng, config.covid_fraction) ? Label::Covid : Label::Cap;
  plan.size_target = sample_size_target(config.profile(plan.label), config, rng);
  return plan;
}

}  // namespace

SubjectPlan plan_indexed_subject(const CohortConfig& config, int index) {
  std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(index)));
  return draw_plan(config, rng);
}

GeneratedSubject generate_indexed_subject(const CohortConfig& config, int index) {
  std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(index)));
  const SubjectPlan plan = draw_plan(config, rng);
  return generate_subject(subject_id(index, config.n_subjects), plan.label, plan.size_target, config, rng);
}

std::vector<GroundTruth> generate_cohort(const CohortConfig& config, const std::filesystem::path& out_dir, int jobs) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create cohort directory " + out_dir.string() + ": " + ec.message());

  std::vector<GroundTruth> truth(static_cast<std::size_t>(config.n_subjects));
  parallel_for(truth.size(), jobs, [&](std::size_t i) {
    GeneratedSubject s = generate_indexed_subject(config, static_cast<int>(i));
    write_svol(out_dir / (s.truth.id + "_int.svol"), AnyVolume(std::move(s.record.intensity)));
    write_svol(out_dir / (s.truth.id + "_inf.svol"), AnyVolume(std::move(s.record.infection)));
    write_svol(out_dir / (s.truth.id + "_seg.svol"), AnyVolume(std::move(s.record.lung_labels)));
    truth[i] = std::move(s.truth);
  });

  std::ofstream manifest(out_dir / "manifest.csv", std::ios::binary);
  std::ofstream sidecar(out_dir / "truth.csv", std::ios::binary);
  if (!manifest || !sidecar) throw DataError("cannot write cohort index files in " + out_dir.string());
  manifest << "subject_id,label,files,size_target\n";
  sidecar << "subject_id,label,size_fraction,lesion_count,bilateral,peripherality\n";
  for (const auto& t : truth) {
    manifest << t.id << ',' << to_string(t.label) << ',' << t.id << "_int.svol;" << t.id << "_inf.svol;" << t.id
             << "_seg.svol," << format_shortest(t.size_target) << '\n';
    sidecar << t.id << ',' << to_string(t.label) << ',' << format_shortest(t.size_fraction) << ',' << t.lesion_count
            << ',' << (t.bilateral ? 1 : 0) << ',' << format_shortest(t.peripherality) << '\n';
  }
  manifest.flush();
  sidecar.flush();
  if (!manifest || !sidecar) throw DataError("failed writing cohort index files in " + out_dir.string());
  return truth;
}

}  // namespace isarf
