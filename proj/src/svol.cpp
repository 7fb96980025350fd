#include "isarf/svol.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "isarf/util.hpp"

namespace isarf {

namespace {

constexpr std::string_view kMagic = "SVOL1";

std::size_t dtype_size(SvolDtype t) { return t == SvolDtype::UInt8 ? 1 : 2; }

std::string dtype_name(SvolDtype t) {
  switch (t) {
    case SvolDtype::Int16: return "int16";
    case SvolDtype::UInt8: return "uint8";
    case SvolDtype::UInt16: return "uint16";
  }
  return "?";
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
Volume<T> decode_payload(std::string_view payload, Dims dims, Eigen::Vector3d spacing, VolumeKind kind) {
  typename Volume<T>::Storage data(static_cast<Eigen::Index>(dims.count()));
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if constexpr (sizeof(T) == 1) {
      data[i] = static_cast<T>(p[i]);
    } else {
      const auto lo = static_cast<std::uint16_t>(p[2 * i]);
      const auto hi = static_cast<std::uint16_t>(p[2 * i + 1]);
      data[i] = static_cast<T>(static_cast<std::uint16_t>(lo | (hi << 8)));
    }
  }
  return Volume<T>(dims, spacing, kind, std::move(data));
}

template <typename T>
void encode_payload(const Volume<T>& vol, std::string& out) {
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if constexpr (sizeof(T) == 1) {
      out.push_back(static_cast<char>(vol[i]));
    } else {
      const auto u = static_cast<std::uint16_t>(vol[i]);
      out.push_back(static_cast<char>(u & 0xFF));
      out.push_back(static_cast<char>(u >> 8));
    }
  }
}

}  // namespace

AnyVolume decode_svol(std::string_view bytes, const std::string& source) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError(source + ": malformed SVOL: " + why);
  };
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) return false;
    line = bytes.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line != kMagic) throw fail("missing SVOL1 magic line");

  bool have_dim = false, have_spacing = false, have_dtype = false, have_kind = false;
  Dims dims;
  Eigen::Vector3d spacing;
  SvolDtype dtype = SvolDtype::UInt8;
  VolumeKind kind = VolumeKind::Intensity;
  for (;;) {
    if (!next_line(line)) throw fail("header not terminated by a blank line");
    if (line.empty()) break;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("header line without '=': " + std::string(line));
    const std::string_view key = line.substr(0, eq);
    const std::string_view value = line.substr(eq + 1);
    try {
      if (key == "dim") {
        auto parts = split_ws(value);
        if (parts.size() != 3) throw fail("dim needs three integers");
        dims = {static_cast<int>(parse_integer(parts[0])), static_cast<int>(parse_integer(parts[1])),
                static_cast<int>(parse_integer(parts[2]))};
        if (dims.x <= 0 || dims.y <= 0 || dims.z <= 0) throw fail("dim must be positive");
        have_dim = true;
      } else if (key == "spacing") {
        auto parts = split_ws(value);
        if (parts.size() != 3) throw fail("spacing needs three numbers");
        spacing = {parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
        if (!(spacing.array() > 0.0).all()) throw fail("spacing must be positive");
        have_spacing = true;
      } else if (key == "dtype") {
        if (value == "int16") dtype = SvolDtype::Int16;
        else if (value == "uint8") dtype = SvolDtype::UInt8;
        else if (value == "uint16") dtype = SvolDtype::UInt16;
        else throw fail("unknown dtype '" + std::string(value) + "'");
        have_dtype = true;
      } else if (key == "kind") {
        if (value == "intensity") kind = VolumeKind::Intensity;
        else if (value == "mask") kind = VolumeKind::Mask;
        else if (value == "labels") kind = VolumeKind::Labels;
        else throw fail("unknown kind '" + std::string(value) + "'");
        have_kind = true;
      } else {
        throw fail("unknown header key '" + std::string(key) + "'");
      }
    } catch (const DataError& e) {
      const std::string msg = e.what();
      if (msg.rfind(source, 0) == 0) throw;
      throw fail(msg);
    }
  }
  if (!have_dim || !have_spacing || !have_dtype || !have_kind) {
    throw fail("header must define dim, spacing, dtype and kind");
  }

  const std::string_view payload = bytes.substr(pos);
  const std::size_t expected = dims.count() * dtype_size(dtype);
  if (payload.size() != expected) {
    throw DataError(source + ": payload has " + std::to_string(payload.size()) + " bytes, header needs " +
                    std::to_string(expected) + (payload.size() < expected ? " (truncated)" : " (trailing data)"));
  }

  AnyVolume out;
  switch (dtype) {
    case SvolDtype::Int16: out = decode_payload<std::int16_t>(payload, dims, spacing, kind); break;
    case SvolDtype::UInt8: out = decode_payload<std::uint8_t>(payload, dims, spacing, kind); break;
    case SvolDtype::UInt16: out = decode_payload<std::uint16_t>(payload, dims, spacing, kind); break;
  }
  try {
    std::visit([](const auto& v) { validate(v); }, out);
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
  return out;
}

std::string encode_svol(const AnyVolume& any) {
  std::string out;
  std::visit(
      [&](const auto& vol) {
        const Dims& d = vol.dims();
        out += kMagic;
        out += "\ndim=" + std::to_string(d.x) + " " + std::to_string(d.y) + " " + std::to_string(d.z);
        out += "\nspacing=" + format_shortest(vol.spacing().x()) + " " + format_shortest(vol.spacing().y()) +
               " " + format_shortest(vol.spacing().z());
        out += "\ndtype=" + dtype_name(dtype_of(any));
        out += "\nkind=" + to_string(vol.kind());
        out += "\n\n";
        out.reserve(out.size() + vol.size() * sizeof(typename std::decay_t<decltype(vol)>::value_type));
        encode_payload(vol, out);
      },
      any);
  return out;
}

AnyVolume read_svol(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open SVOL file");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_svol(bytes, path.string());
}

void write_svol(const std::filesystem::path& path, const AnyVolume& vol) {
  const std::string bytes = encode_svol(vol);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

SvolDtype dtype_of(const AnyVolume& vol) {
  switch (vol.index()) {
    case 0: return SvolDtype::Int16;
    case 1: return SvolDtype::UInt8;
    default: return SvolDtype::UInt16;
  }
}

const Dims& dims_of(const AnyVolume& vol) {
  return std::visit([](const auto& v) -> const Dims& { return v.dims(); }, vol);
}

}  // namespace isarf
