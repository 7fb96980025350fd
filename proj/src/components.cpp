#include <array>

#include "isarf/geometry.hpp"

namespace isarf {

namespace {

struct Offset {
  int dx, dy, dz;
};

std::vector<Offset> neighbour_offsets(Connectivity conn) {
  std::vector<Offset> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (conn == Connectivity::Six && manhattan != 1) continue;
        out.push_back({dx, dy, dz});
      }
  return out;
}

// Breadth-first labelling; `labels` doubles as the visited set.
template <typename OnVoxel>
std::vector<std::int64_t> label_components(const Mask& mask, Connectivity conn,
                                           std::vector<std::int32_t>& labels, OnVoxel&& on_voxel) {
  const Dims d = mask.dims();
  const auto offsets = neighbour_offsets(conn);
  labels.assign(mask.size(), 0);
  std::vector<std::int64_t> sizes;
  std::vector<std::size_t> queue;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (mask[seed] == 0 || labels[seed] != 0) continue;
    const auto label = static_cast<std::int32_t>(sizes.size() + 1);
    std::int64_t size = 0;
    queue.clear();
    queue.push_back(seed);
    labels[seed] = label;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t cur = queue[head];
      ++size;
      on_voxel(cur, label);
      const Eigen::Vector3i c = d.coord(cur);
      for (const Offset& o : offsets) {
        const int x = c.x() + o.dx, y = c.y() + o.dy, z = c.z() + o.dz;
        if (!d.contains(x, y, z)) continue;
        const std::size_t n = d.index(x, y, z);
        if (mask[n] != 0 && labels[n] == 0) {
          labels[n] = label;
          queue.push_back(n);
        }
      }
    }
    sizes.push_back(size);
  }
  return sizes;
}

}  // namespace

ComponentLabels connected_components(const Mask& mask, Connectivity conn) {
  std::vector<std::int32_t> scratch;
  auto sizes = label_components(mask, conn, scratch, [](std::size_t, std::int32_t) {});
  ComponentLabels out{mask.like<std::int32_t>(VolumeKind::Labels), std::move(sizes)};
  for (std::size_t i = 0; i < scratch.size(); ++i) out.labels[i] = scratch[i];
  return out;
}

std::vector<std::int64_t> component_sizes(const Mask& mask, Connectivity conn) {
  std::vector<std::int32_t> scratch;
  return label_components(mask, conn, scratch, [](std::size_t, std::int32_t) {});
}

VoxelList boundary_voxels(const Mask& mask) {
  const Dims d = mask.dims();
  VoxelList out;
  for (int k = 0; k < d.z; ++k)
    for (int j = 0; j < d.y; ++j)
      for (int i = 0; i < d.x; ++i) {
        if (mask(i, j, k) == 0) continue;
        const bool edge = i == 0 || j == 0 || k == 0 || i == d.x - 1 || j == d.y - 1 || k == d.z - 1;
        if (edge || mask(i - 1, j, k) == 0 || mask(i + 1, j, k) == 0 || mask(i, j - 1, k) == 0 ||
            mask(i, j + 1, k) == 0 || mask(i, j, k - 1) == 0 || mask(i, j, k + 1) == 0) {
          out.push_back(d.index(i, j, k));
        }
      }
  return out;
}

}  // namespace isarf
