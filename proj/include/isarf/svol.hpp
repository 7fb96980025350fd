#pragma once

// SVOL: ASCII header followed by a raw little-endian payload.
//
//   SVOL1
//   dim=<x> <y> <z>
//   spacing=<sx> <sy> <sz>
//   dtype=<int16|uint8|uint16>
//   kind=<intensity|mask|labels>
//   <blank line>
//   <payload, x-fastest, z-slowest>
//
// The writer emits keys in the order above with shortest round-trip decimal
// spacing, so canonical files survive read -> write byte-for-byte.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "isarf/volume.hpp"

namespace isarf {

enum class SvolDtype { Int16, UInt8, UInt16 };

using AnyVolume = std::variant<Volume<std::int16_t>, Volume<std::uint8_t>, Volume<std::uint16_t>>;

AnyVolume decode_svol(std::string_view bytes, const std::string& source = "<memory>");
std::string encode_svol(const AnyVolume& vol);

AnyVolume read_svol(const std::filesystem::path& path);
void write_svol(const std::filesystem::path& path, const AnyVolume& vol);

SvolDtype dtype_of(const AnyVolume& vol);
const Dims& dims_of(const AnyVolume& vol);

/// Converts whatever dtype was on disk into Volume<T>, rejecting values that
/// do not fit. Kind and geometry are preserved.
template <typename T>
Volume<T> volume_cast(const AnyVolume& any) {
  return std::visit(
      [](const auto& v) {
        using Src = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_same_v<Src, T>) {
          return v;
        } else {
          const auto& d = v.data();
          if (d.size() > 0 && (d.minCoeff() < std::numeric_limits<T>::lowest() ||
                               d.maxCoeff() > std::numeric_limits<T>::max())) {
            throw DataError("volume values do not fit the requested scalar type");
          }
          return Volume<T>(v.dims(), v.spacing(), v.kind(), d.template cast<T>().eval());
        }
      },
      any);
}

}  // namespace isarf
