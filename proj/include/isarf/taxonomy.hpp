#pragma once

#include <array>

namespace isarf {

enum class Lung { Right = 0, Left = 1 };

/// Fixed pulmonary hierarchy: 18 segments -> 5 lobes -> 2 lungs.
/// Lobes: 1 right upper, 2 right middle, 3 right lower, 4 left upper,
/// 5 left lower.
struct SegmentTaxonomy {
  static constexpr int kSegments = 18;
  static constexpr int kLobes = 5;

  // index 0 unused
  static constexpr std::array<int, kSegments + 1> kLobeOfSegment{
      0, 1, 1, 1, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5};

  static constexpr int lobe_of_segment(int segment) { return kLobeOfSegment.at(segment); }
  static constexpr Lung lung_of_lobe(int lobe) { return lobe <= 3 ? Lung::Right : Lung::Left; }
  static constexpr Lung lung_of_segment(int segment) { return lung_of_lobe(lobe_of_segment(segment)); }

  /// Number of segments in each lobe, index 0 unused.
  static constexpr std::array<int, kLobes + 1> segments_per_lobe() {
    std::array<int, kLobes + 1> n{};
    for (int s = 1; s <= kSegments; ++s) ++n[kLobeOfSegment[s]];
    return n;
  }
};

static_assert(SegmentTaxonomy::segments_per_lobe()[1] == 3);
static_assert(SegmentTaxonomy::segments_per_lobe()[3] == 5);
static_assert(SegmentTaxonomy::segments_per_lobe()[5] == 4);

}  // namespace isarf
