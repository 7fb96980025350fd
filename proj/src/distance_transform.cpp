#include <cmath>
#include <limits>

#include "isarf/geometry.hpp"

namespace isarf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D lower envelope of parabolas (q - v)^2 + f(v) over the finite samples
// of f. Inputs are integers, so every output is an exact integer.
void envelope_1d(const double* f, double* out, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    // z[0] is -inf, so the pop loop always stops at k == 0.
    double s = 0.0;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    out[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

Volume<double> squared_distance_transform(const VoxelList& seeds, const Dims& dims) {
  if (seeds.empty()) throw DataError("distance transform needs at least one seed voxel");
  Volume<double> vol(dims, Eigen::Vector3d::Ones(), VolumeKind::Intensity, kInf);
  for (std::size_t s : seeds) {
    if (s >= dims.count()) throw DataError("distance transform seed outside the grid");
    vol[s] = 0.0;
  }

  const int longest = std::max({dims.x, dims.y, dims.z});
  std::vector<double> line(longest), result(longest), z;
  std::vector<int> v;

  auto pass = [&](int n, std::size_t stride, int outer_a, int outer_b, auto base_of) {
    for (int b = 0; b < outer_b; ++b) {
      for (int a = 0; a < outer_a; ++a) {
        const std::size_t base = base_of(a, b);
        for (int q = 0; q < n; ++q) line[q] = vol[base + q * stride];
        envelope_1d(line.data(), result.data(), n, v, z);
        for (int q = 0; q < n; ++q) vol[base + q * stride] = result[q];
      }
    }
  };
  const std::size_t sx = 1, sy = static_cast<std::size_t>(dims.x), sz = sy * dims.y;
  pass(dims.x, sx, dims.y, dims.z, [&](int j, int k) { return j * sy + k * sz; });
  pass(dims.y, sy, dims.x, dims.z, [&](int i, int k) { return i * sx + k * sz; });
  pass(dims.z, sz, dims.x, dims.y, [&](int i, int j) { return i * sx + j * sy; });
  return vol;
}

Volume<double> distance_transform(const VoxelList& seeds, const Dims& dims) {
  Volume<double> vol = squared_distance_transform(seeds, dims);
  vol.data() = vol.data().sqrt();
  return vol;
}

}  // namespace isarf
