#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "isarf/error.hpp"

namespace isarf {

enum class VolumeKind { Intensity, Mask, Labels };

std::string to_string(VolumeKind kind);

/// Voxel counts along x, y, z. Linear indices are x-fastest, z-slowest.
struct Dims {
  int x = 0;
  int y = 0;
  int z = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(y) * static_cast<std::size_t>(z);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * y + j) * x + i;
  }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < x && j < y && k < z;
  }
  Eigen::Vector3i coord(std::size_t idx) const {
    const auto sx = static_cast<std::size_t>(x);
    const auto sxy = sx * static_cast<std::size_t>(y);
    return {static_cast<int>(idx % sx), static_cast<int>((idx / sx) % y),
            static_cast<int>(idx / sxy)};
  }

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Linear voxel indices, ascending.
using VoxelList = std::vector<std::size_t>;

/// Dense 3-D grid with physical spacing (mm per voxel along x, y, z).
template <typename Scalar>
class Volume {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using value_type = Scalar;

  Volume() = default;

  Volume(Dims dims, Eigen::Vector3d spacing, VolumeKind kind, Scalar fill = Scalar(0))
      : dims_(dims), spacing_(spacing), kind_(kind),
        data_(Storage::Constant(static_cast<Eigen::Index>(dims.count()), fill)) {
    check_geometry();
  }

  Volume(Dims dims, Eigen::Vector3d spacing, VolumeKind kind, Storage data)
      : dims_(dims), spacing_(spacing), kind_(kind), data_(std::move(data)) {
    check_geometry();
    if (static_cast<std::size_t>(data_.size()) != dims_.count()) {
      throw DataError("volume data length " + std::to_string(data_.size()) +
                      " does not match dims product " + std::to_string(dims_.count()));
    }
  }

  const Dims& dims() const { return dims_; }
  const Eigen::Vector3d& spacing() const { return spacing_; }
  VolumeKind kind() const { return kind_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  const Storage& data() const { return data_; }
  Storage& data() { return data_; }

  Scalar operator[](std::size_t i) const { return data_[static_cast<Eigen::Index>(i)]; }
  Scalar& operator[](std::size_t i) { return data_[static_cast<Eigen::Index>(i)]; }
  Scalar operator()(int i, int j, int k) const { return (*this)[dims_.index(i, j, k)]; }
  Scalar& operator()(int i, int j, int k) { return (*this)[dims_.index(i, j, k)]; }

  double voxel_volume_mm3() const { return spacing_.prod(); }

  /// Same geometry, different contents.
  template <typename Other>
  Volume<Other> like(VolumeKind kind, Other fill = Other(0)) const {
    return Volume<Other>(dims_, spacing_, kind, fill);
  }

  friend bool operator==(const Volume& a, const Volume& b) {
    return a.dims_ == b.dims_ && a.spacing_ == b.spacing_ && a.kind_ == b.kind_ &&
           (a.data_ == b.data_).all();
  }

 private:
  void check_geometry() const {
    if (dims_.x <= 0 || dims_.y <= 0 || dims_.z <= 0) {
      throw DataError("volume dims must be positive");
    }
    if (!(spacing_.array() > 0.0).all() || !spacing_.allFinite()) {
      throw DataError("volume spacing must be positive and finite");
    }
  }

  Dims dims_{};
  Eigen::Vector3d spacing_ = Eigen::Vector3d::Ones();
  VolumeKind kind_ = VolumeKind::Intensity;
  Storage data_;
};

using HuVolume = Volume<std::int16_t>;
using Mask = Volume<std::uint8_t>;
using LabelMap = Volume<std::uint8_t>;

inline constexpr int kMaxSegmentLabel = 18;

/// Checks the value-range invariants implied by the volume kind.
template <typename Scalar>
void validate(const Volume<Scalar>& vol) {
  const auto& d = vol.data();
  switch (vol.kind()) {
    case VolumeKind::Mask:
      if (!((d == Scalar(0)) || (d == Scalar(1))).all()) {
        throw DataError("binary mask contains values other than 0/1");
      }
      break;
    case VolumeKind::Labels:
      if (!((d >= Scalar(0)) && (d <= Scalar(kMaxSegmentLabel))).all()) {
        throw DataError("label map contains values outside 0..18");
      }
      break;
    case VolumeKind::Intensity:
      if constexpr (std::is_floating_point_v<Scalar>) {
        if (!d.allFinite()) throw DataError("intensity volume contains non-finite values");
      }
      break;
  }
}

/// Foreground (nonzero) voxel count.
template <typename Scalar>
std::size_t count_nonzero(const Volume<Scalar>& vol) {
  return static_cast<std::size_t>((vol.data() != Scalar(0)).count());
}

/// Binary mask of voxels whose value satisfies pred.
template <typename Scalar, typename Pred>
Mask mask_where(const Volume<Scalar>& vol, Pred pred) {
  Mask out = vol.template like<std::uint8_t>(VolumeKind::Mask);
  for (std::size_t i = 0; i < vol.size(); ++i) out[i] = pred(vol[i]) ? 1 : 0;
  return out;
}

enum class Interpolation { Nearest, Trilinear };

/// Resamples to isotropic `target_mm` spacing. Output dims are
/// round(dim * spacing / target), at least 1. Output voxel centres are mapped
/// to input continuous coordinates with edge clamping. Trilinear results are
/// rounded for integer scalars.
template <typename Scalar>
Volume<Scalar> resample_isotropic(const Volume<Scalar>& vol, double target_mm, Interpolation mode);

}  // namespace isarf
