#pragma once

#include <cstdint>
#include <vector>

#include "isarf/volume.hpp"

namespace isarf {

enum class Connectivity { Six = 6, TwentySix = 26 };

struct ComponentLabels {
  Volume<std::int32_t> labels;       // 0 = background, 1..K
  std::vector<std::int64_t> sizes;   // sizes[k-1] = voxel count of component k

  int count() const { return static_cast<int>(sizes.size()); }
};

/// Labels maximal connected foreground sets. Labels are assigned in order of
/// each component's lowest linear index.
ComponentLabels connected_components(const Mask& mask, Connectivity conn);

/// Component voxel counts only; skips materialising the label volume.
std::vector<std::int64_t> component_sizes(const Mask& mask, Connectivity conn);

/// Foreground voxels with at least one 6-neighbour that is background or
/// outside the grid.
VoxelList boundary_voxels(const Mask& mask);

/// Exact squared Euclidean distance (voxel units) from every voxel to the
/// nearest seed. Separable lower-envelope transform, one pass per axis.
Volume<double> squared_distance_transform(const VoxelList& seeds, const Dims& dims);

/// sqrt of squared_distance_transform.
Volume<double> distance_transform(const VoxelList& seeds, const Dims& dims);

}  // namespace isarf
