#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "isarf/error.hpp"
#include "isarf/features.hpp"
#include "isarf/geometry.hpp"
#include "isarf/metrics.hpp"
#include "isarf/synth.hpp"
#include "isarf/taxonomy.hpp"
#include "isarf/util.hpp"
#include "support.hpp"

using namespace isarf;
using testing_support::TempDir;

namespace {

CohortConfig default_config(int n, std::uint64_t seed) {
  CohortConfig c = CohortConfig::defaults();
  c.n_subjects = n;
  c.seed = seed;
  return c;
}

/// Probability that a target drawn for `profile` lands in evaluation group g.
std::array<double, 5> expected_group_probs(const ClassProfile& profile, const CohortConfig& c) {
  std::array<double, 5> p{};
  const double wsum = std::accumulate(profile.size_weights.begin(), profile.size_weights.end(), 0.0);
  const std::array<double, 6> edges{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  for (int r = 0; r < 4; ++r) {
    double mass = profile.size_weights[static_cast<std::size_t>(r)] / wsum;
    if (r == 0) {
      p[0] += mass * c.zero_size_prob;
      mass *= 1.0 - c.zero_size_prob;
    }
    const double lo = std::log(r == 0 ? c.min_fraction : c.breakpoints[static_cast<std::size_t>(r - 1)] * c.regime_margin);
    const double hi = std::log(r == 3 ? c.max_fraction : c.breakpoints[static_cast<std::size_t>(r)] / c.regime_margin);
    for (int g = 0; g < 5; ++g) {
      const double a = g == 0 ? lo : std::max(lo, std::log(edges[static_cast<std::size_t>(g)]));
      const double b = std::min(hi, std::log(edges[static_cast<std::size_t>(g) + 1]));
      if (b > a) p[static_cast<std::size_t>(g)] += mass * (b - a) / (hi - lo);
    }
  }
  return p;
}

/// 0.99 quantiles of the chi-square distribution, df = 1..12.
constexpr std::array<double, 12> kChiSquare99{6.635, 9.210, 11.345, 13.277, 15.086, 16.812,
                                               18.475, 20.090, 21.666, 23.209, 24.725, 26.217};

}  // namespace

TEST(LungFields, PartitionTaxonomyAndBalance) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const double scale = seed % 2 ? 1.0 : 0.75;
    const LungField f = generate_lung_fields({64, 64, 64}, 1.5, rng, scale);
    std::array<std::int64_t, 2> lung{0, 0};
    std::array<std::int64_t, 19> seg{};
    for (std::size_t v = 0; v < f.labels.size(); ++v) {
      const int s = f.labels[v];
      ASSERT_EQ(s != 0, f.lung[v] != 0);
      ASSERT_LE(s, 18);
      if (s == 0) continue;
      ++seg[static_cast<std::size_t>(s)];
      ++lung[SegmentTaxonomy::lung_of_segment(s) == Lung::Right ? 0 : 1];
    }
    ASSERT_GT(lung[0], 0);
    ASSERT_GT(lung[1], 0);
    const double ratio = static_cast<double>(lung[0]) / static_cast<double>(lung[1]);
    EXPECT_GE(ratio, 0.6);
    EXPECT_LE(ratio, 1.6);
    for (int s = 1; s <= 18; ++s) EXPECT_GT(seg[static_cast<std::size_t>(s)], 0) << "segment " << s;
    // The lungs are separated: no 26-neighbour pair across lungs.
    EXPECT_EQ(component_sizes(f.lung, Connectivity::TwentySix).size(), 2u);
  }
}

TEST(LungFields, SurfaceBandsHaveDynamicRange) {
  // Full-size lungs reach the outermost wall-distance band; the smallest
  // allowed scale still reaches the third.
  auto deepest = [](double scale) {
    std::mt19937_64 rng(3);
    const LungField f = generate_lung_fields({64, 64, 64}, 1.5, rng, scale);
    const Volume<double> d2 = squared_distance_transform(boundary_voxels(f.lung), f.lung.dims());
    double best = 0;
    for (std::size_t v = 0; v < d2.size(); ++v)
      if (f.lung[v]) best = std::max(best, d2[v]);
    return std::sqrt(best);
  };
  EXPECT_GT(deepest(1.0), kSurfaceBandEdges[3]);
  EXPECT_GT(deepest(0.75), kSurfaceBandEdges[1]);
}

TEST(Subject, ZeroTargetIsEmpty) {
  const CohortConfig c = default_config(1, 0);
  std::mt19937_64 rng(1);
  const auto s = generate_subject("Z", Label::Covid, 0.0, c, rng);
  EXPECT_EQ(count_nonzero(s.record.infection), 0u);
  EXPECT_EQ(s.truth.size_fraction, 0.0);
  EXPECT_EQ(s.truth.lesion_count, 0);
  const FeatureVector fv = extract_feature_vector(s.record);
  for (int i = 0; i < layout::kHistogramOffset; ++i) EXPECT_EQ(fv.values[i], 0.0);
  for (int i = layout::kSurfaceOffset; i < layout::kTotal; ++i) EXPECT_EQ(fv.values[i], 0.0);
}

TEST(Subject, TargetToleranceAndSidecarConsistency) {
  const CohortConfig c = default_config(1, 0);
  int within = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const auto s = generate_subject("T", seed % 2 ? Label::Covid : Label::Cap, 0.05, c, rng);
    const double achieved = infection_fraction(s.record.infection, s.record.lung_labels);
    within += achieved >= 0.025 && achieved <= 0.10;
    EXPECT_DOUBLE_EQ(achieved, s.truth.size_fraction);
    for (std::size_t v = 0; v < s.record.infection.size(); ++v)
      if (s.record.infection[v]) ASSERT_NE(s.record.lung_labels[v], 0);
    EXPECT_EQ(s.truth.lesion_count,
              static_cast<int>(component_sizes(s.record.infection, Connectivity::TwentySix).size()));
  }
  EXPECT_GE(within, 98);
}

TEST(Subject, OutOfRangeTargetIsUsageError) {
  const CohortConfig c = default_config(1, 0);
  std::mt19937_64 rng(1);
  EXPECT_THROW(generate_subject("X", Label::Cap, 0.7, c, rng), UsageError);
  EXPECT_THROW(generate_subject("X", Label::Cap, -0.1, c, rng), UsageError);
}

TEST(Subject, RegenerationIsExactAndOrderFree) {
  const CohortConfig c = default_config(40, 17);
  const auto a = generate_indexed_subject(c, 23);
  const auto b = generate_indexed_subject(c, 23);
  EXPECT_TRUE((a.record.intensity.data() == b.record.intensity.data()).all());
  EXPECT_TRUE((a.record.infection.data() == b.record.infection.data()).all());
  EXPECT_TRUE((a.record.lung_labels.data() == b.record.lung_labels.data()).all());
  const SubjectPlan plan = plan_indexed_subject(c, 23);
  EXPECT_EQ(plan.label, a.truth.label);
  EXPECT_EQ(plan.size_target, a.truth.size_target);
  EXPECT_FALSE((generate_indexed_subject(c, 24).record.intensity.data() == a.record.intensity.data()).all());
}

TEST(Config, ValidationRejectsBadKnobs) {
  CohortConfig c = CohortConfig::defaults();
  EXPECT_NO_THROW(c.validate());
  auto bad = [](auto mutate) {
    CohortConfig x = CohortConfig::defaults();
    mutate(x);
    return x;
  };
  EXPECT_THROW(bad([](CohortConfig& x) { x.covid_fraction = 1.2; }).validate(), UsageError);
  EXPECT_THROW(bad([](CohortConfig& x) { x.dims = {31, 64, 64}; }).validate(), UsageError);
  EXPECT_THROW(bad([](CohortConfig& x) { x.breakpoints = {1e-3, 1e-4, 1e-2}; }).validate(), UsageError);
  EXPECT_THROW(bad([](CohortConfig& x) { x.covid.bilateral_prob = -0.1; }).validate(), UsageError);
  EXPECT_THROW(bad([](CohortConfig& x) { x.cap.size_weights = {0, 0, 0, 0}; }).validate(), UsageError);
}

TEST(Config, NullEffectEqualizesProfiles) {
  const CohortConfig n = CohortConfig::defaults().with_null_effect();
  EXPECT_EQ(n.covid.lesion_count_mean, n.cap.lesion_count_mean);
  EXPECT_EQ(n.covid.hu_mean, n.cap.hu_mean);
  EXPECT_EQ(n.covid.hu_shift, n.cap.hu_shift);
  EXPECT_EQ(n.covid.size_weights, n.cap.size_weights);
  EXPECT_EQ(n.covid.peripheral_prob, n.cap.peripheral_prob);
}

class DefaultCohort : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = new CohortConfig(default_config(1000, 2024));
    truth_ = new std::vector<GroundTruth>(1000);
    parallel_for(truth_->size(), 0, [](std::size_t i) {
      (*truth_)[i] = generate_indexed_subject(*config_, static_cast<int>(i)).truth;
    });
  }
  static void TearDownTestSuite() {
    delete truth_;
    delete config_;
  }
  static CohortConfig* config_;
  static std::vector<GroundTruth>* truth_;
};

CohortConfig* DefaultCohort::config_ = nullptr;
std::vector<GroundTruth>* DefaultCohort::truth_ = nullptr;

TEST_F(DefaultCohort, CovidFractionMatchesConfig) {
  const auto covid = std::count_if(truth_->begin(), truth_->end(), [](const auto& t) { return t.label == Label::Covid; });
  EXPECT_NEAR(static_cast<double>(covid) / 1000.0, config_->covid_fraction, 0.05);
}

TEST_F(DefaultCohort, LargestGroupIsMostlyCovid) {
  int covid = 0, total = 0;
  for (const auto& t : *truth_) {
    if (SizeGroupScheme::group_of(t.size_fraction) != 4) continue;
    ++total;
    covid += t.label == Label::Covid;
  }
  ASSERT_GT(total, 20);
  EXPECT_GE(static_cast<double>(covid) / total, 0.8);
}

TEST_F(DefaultCohort, AchievedGroupsFitConfiguredWeights) {
  double chi2 = 0;
  int cells = 0;
  for (Label label : {Label::Covid, Label::Cap}) {
    const auto probs = expected_group_probs(config_->profile(label), *config_);
    std::array<int, 5> observed{};
    int n = 0;
    for (const auto& t : *truth_) {
      if (t.label != label) continue;
      ++n;
      ++observed[static_cast<std::size_t>(SizeGroupScheme::group_of(t.size_fraction))];
    }
    // Cells expecting fewer than 5 are pooled into their lower neighbour.
    double e_acc = 0, o_acc = 0;
    int used = 0;
    for (int g = 4; g >= 0; --g) {
      e_acc += probs[static_cast<std::size_t>(g)] * n;
      o_acc += observed[static_cast<std::size_t>(g)];
      if (e_acc < 5 && g > 0) continue;
      chi2 += (o_acc - e_acc) * (o_acc - e_acc) / e_acc;
      ++used;
      e_acc = o_acc = 0;
    }
    cells += used - 1;
  }
  ASSERT_GE(cells, 1);
  EXPECT_LT(chi2, kChiSquare99[static_cast<std::size_t>(cells - 1)]) << "df=" << cells;
}

TEST_F(DefaultCohort, SidecarFieldsAreInRange) {
  for (const auto& t : *truth_) {
    EXPECT_GE(t.peripherality, 0.0);
    EXPECT_LE(t.peripherality, 1.0);
    if (t.size_target == 0) {
      EXPECT_EQ(t.size_fraction, 0.0);
    } else {
      EXPECT_GE(t.size_fraction, t.size_target / 2);
      EXPECT_LE(t.size_fraction, t.size_target * 2);
      EXPECT_GE(t.lesion_count, 1);
    }
  }
}

TEST(Cohort, DiskLayoutDeterministicAcrossJobs) {
  TempDir dir("cohort");
  const CohortConfig c = default_config(6, 5);
  const auto serial = generate_cohort(c, dir.path() / "a", 1);
  const auto parallel = generate_cohort(c, dir.path() / "b", 3);
  ASSERT_EQ(serial.size(), 6u);
  for (const char* name : {"manifest.csv", "truth.csv", "S0003_int.svol", "S0003_inf.svol", "S0005_seg.svol"})
    EXPECT_EQ(testing_support::read_file(dir.path() / "a" / name), testing_support::read_file(dir.path() / "b" / name)) << name;
  const auto entries = read_cohort_manifest(dir.path() / "a");
  ASSERT_EQ(entries.size(), 6u);
  EXPECT_EQ(entries[2].id, "S0002");
  const SubjectRecord r = load_subject(dir.path() / "a", entries[2]);
  const auto again = generate_indexed_subject(c, 2);
  EXPECT_TRUE((r.infection.data() == again.record.infection.data()).all());
  EXPECT_TRUE((r.intensity.data() == again.record.intensity.data()).all());
  const auto rows = extract_cohort(dir.path() / "a", {}, 2);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[2].values, extract_feature_vector(again.record).values);
}

TEST(Cohort, BrokenManifestNamesTheProblem) {
  TempDir dir("broken");
  generate_cohort(default_config(2, 1), dir.path(), 1);
  std::filesystem::remove(dir.path() / "S0001_inf.svol");
  try {
    extract_cohort(dir.path());
    FAIL() << "expected a DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("S0001"), std::string::npos) << e.what();
  }
}
