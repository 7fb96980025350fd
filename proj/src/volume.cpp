#include <algorithm>
#include <cmath>
#include <limits>

#include "isarf/volume.hpp"

namespace isarf {

std::string to_string(VolumeKind kind) {
  switch (kind) {
    case VolumeKind::Intensity: return "intensity";
    case VolumeKind::Mask: return "mask";
    case VolumeKind::Labels: return "labels";
  }
  return "unknown";
}

namespace {

struct AxisMap {
  int out_dim = 1;
  double scale = 1.0;  // input index per output index
  double offset = 0.0;

  double source(int i) const { return (i + 0.5) * scale - 0.5 + offset; }
};

AxisMap make_axis(int in_dim, double in_spacing, double target) {
  AxisMap m;
  m.out_dim = std::max(1, static_cast<int>(std::lround(in_dim * in_spacing / target)));
  m.scale = target / in_spacing;
  return m;
}

int clamp_index(long v, int dim) { return static_cast<int>(std::clamp<long>(v, 0, dim - 1)); }

template <typename Scalar>
Scalar round_to(double v) {
  if constexpr (std::is_integral_v<Scalar>) {
    const double lo = static_cast<double>(std::numeric_limits<Scalar>::lowest());
    const double hi = static_cast<double>(std::numeric_limits<Scalar>::max());
    return static_cast<Scalar>(std::clamp(std::nearbyint(v), lo, hi));
  } else {
    return static_cast<Scalar>(v);
  }
}

}  // namespace

template <typename Scalar>
Volume<Scalar> resample_isotropic(const Volume<Scalar>& vol, double target_mm, Interpolation mode) {
  if (!(target_mm > 0.0) || !std::isfinite(target_mm)) {
    throw UsageError("resample target spacing must be positive");
  }
  if (mode == Interpolation::Trilinear && vol.kind() != VolumeKind::Intensity) {
    throw UsageError("trilinear resampling requested on a " + to_string(vol.kind()) +
                     " volume; use nearest");
  }
  const Dims in = vol.dims();
  const AxisMap ax = make_axis(in.x, vol.spacing().x(), target_mm);
  const AxisMap ay = make_axis(in.y, vol.spacing().y(), target_mm);
  const AxisMap az = make_axis(in.z, vol.spacing().z(), target_mm);
  const Dims out_dims{ax.out_dim, ay.out_dim, az.out_dim};
  Volume<Scalar> out(out_dims, Eigen::Vector3d::Constant(target_mm), vol.kind());

  if (mode == Interpolation::Nearest) {
    std::vector<int> sx(out_dims.x), sy(out_dims.y), sz(out_dims.z);
    for (int i = 0; i < out_dims.x; ++i) sx[i] = clamp_index(std::lround(ax.source(i)), in.x);
    for (int j = 0; j < out_dims.y; ++j) sy[j] = clamp_index(std::lround(ay.source(j)), in.y);
    for (int k = 0; k < out_dims.z; ++k) sz[k] = clamp_index(std::lround(az.source(k)), in.z);
    for (int k = 0; k < out_dims.z; ++k)
      for (int j = 0; j < out_dims.y; ++j)
        for (int i = 0; i < out_dims.x; ++i) out(i, j, k) = vol(sx[i], sy[j], sz[k]);
    return out;
  }

  struct Tap {
    int lo, hi;
    double w;  // weight of hi
  };
  auto taps = [](const AxisMap& a, int in_dim) {
    std::vector<Tap> t(a.out_dim);
    for (int i = 0; i < a.out_dim; ++i) {
      const double s = std::clamp(a.source(i), 0.0, static_cast<double>(in_dim - 1));
      const int lo = static_cast<int>(std::floor(s));
      const int hi = std::min(lo + 1, in_dim - 1);
      t[i] = {lo, hi, s - lo};
    }
    return t;
  };
  const auto tx = taps(ax, in.x), ty = taps(ay, in.y), tz = taps(az, in.z);
  for (int k = 0; k < out_dims.z; ++k) {
    for (int j = 0; j < out_dims.y; ++j) {
      for (int i = 0; i < out_dims.x; ++i) {
        const Tap& a = tx[i];
        const Tap& b = ty[j];
        const Tap& c = tz[k];
        auto at = [&](int x, int y, int z) { return static_cast<double>(vol(x, y, z)); };
        // lerp form keeps constant regions exact
        auto lerp = [](double u, double v, double w) { return u + w * (v - u); };
        const double c00 = lerp(at(a.lo, b.lo, c.lo), at(a.hi, b.lo, c.lo), a.w);
        const double c10 = lerp(at(a.lo, b.hi, c.lo), at(a.hi, b.hi, c.lo), a.w);
        const double c01 = lerp(at(a.lo, b.lo, c.hi), at(a.hi, b.lo, c.hi), a.w);
        const double c11 = lerp(at(a.lo, b.hi, c.hi), at(a.hi, b.hi, c.hi), a.w);
        const double c0 = lerp(c00, c10, b.w);
        const double c1 = lerp(c01, c11, b.w);
        out(i, j, k) = round_to<Scalar>(lerp(c0, c1, c.w));
      }
    }
  }
  return out;
}

template Volume<std::uint8_t> resample_isotropic(const Volume<std::uint8_t>&, double, Interpolation);
template Volume<std::int16_t> resample_isotropic(const Volume<std::int16_t>&, double, Interpolation);
template Volume<std::uint16_t> resample_isotropic(const Volume<std::uint16_t>&, double, Interpolation);
template Volume<double> resample_isotropic(const Volume<double>&, double, Interpolation);

}  // namespace isarf
