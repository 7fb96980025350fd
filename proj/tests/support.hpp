#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "isarf/features.hpp"
#include "isarf/volume.hpp"
#include "oracles.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("isarf_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline isarf::Mask random_mask(const isarf::Dims& d, double density, std::mt19937_64& rng) {
  isarf::Mask m(d, Eigen::Vector3d::Ones(), isarf::VolumeKind::Mask);
  std::bernoulli_distribution on(density);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = on(rng) ? 1 : 0;
  return m;
}

inline std::vector<std::uint8_t> to_vector(const isarf::Mask& m) {
  return {m.data().data(), m.data().data() + m.size()};
}

/// Box-shaped two-lung phantom: the right lung occupies low x, the left lung
/// high x; each lobe is a z-slab and each segment a y-slab inside it.
/// Random blobs are painted as infection and random HU everywhere.
inline isarf::SubjectRecord random_subject(const isarf::Dims& d, std::mt19937_64& rng, int blobs = 4) {
  const Eigen::Vector3d spacing = Eigen::Vector3d::Constant(1.5);
  isarf::SubjectRecord s;
  s.id = "T";
  s.label = isarf::Label::Covid;
  s.intensity = isarf::HuVolume(d, spacing, isarf::VolumeKind::Intensity);
  s.infection = isarf::Mask(d, spacing, isarf::VolumeKind::Mask);
  s.lung_labels = isarf::LabelMap(d, spacing, isarf::VolumeKind::Labels);
  std::uniform_int_distribution<int> hu(-1500, 300);
  const int half = d.x / 2;
  for (int z = 1; z < d.z - 1; ++z)
    for (int y = 1; y < d.y - 1; ++y)
      for (int x = 1; x < d.x - 1; ++x) {
        if (x == half) continue;  // gap between lungs
        const bool left = x > half;
        const double tz = static_cast<double>(z - 1) / (d.z - 2);
        const double ty = static_cast<double>(y - 1) / (d.y - 2);
        int lobe, first, count;
        if (!left) {
          lobe = tz < 0.33 ? 3 : (tz < 0.6 ? 2 : 1);
        } else {
          lobe = tz < 0.5 ? 5 : 4;
        }
        static constexpr int kFirst[6] = {0, 1, 4, 6, 11, 15};
        static constexpr int kCount[6] = {0, 3, 2, 5, 4, 4};
        first = kFirst[lobe];
        count = kCount[lobe];
        const int seg = first + std::min(count - 1, static_cast<int>(ty * count));
        s.lung_labels(x, y, z) = static_cast<std::uint8_t>(seg);
      }
  for (std::size_t i = 0; i < s.intensity.size(); ++i) s.intensity[i] = static_cast<std::int16_t>(hu(rng));
  std::uniform_int_distribution<int> px(0, d.x - 1), py(0, d.y - 1), pz(0, d.z - 1), pr(0, 3);
  for (int b = 0; b < blobs; ++b) {
    const int cx = px(rng), cy = py(rng), cz = pz(rng), r = pr(rng);
    for (int z = 0; z < d.z; ++z)
      for (int y = 0; y < d.y; ++y)
        for (int x = 0; x < d.x; ++x) {
          const int dd = (x - cx) * (x - cx) + (y - cy) * (y - cy) + (z - cz) * (z - cz);
          if (dd <= r * r && s.lung_labels(x, y, z) != 0) s.infection(x, y, z) = 1;
        }
  }
  return s;
}

inline oracle::NaiveSubject naive_view(const isarf::SubjectRecord& s) {
  oracle::NaiveSubject n;
  n.dims = s.intensity.dims();
  n.spacing = s.intensity.spacing()[0];
  n.hu.assign(s.intensity.data().data(), s.intensity.data().data() + s.intensity.size());
  n.infection = to_vector(s.infection);
  n.segment.assign(s.lung_labels.data().data(), s.lung_labels.data().data() + s.lung_labels.size());
  return n;
}

}  // namespace testing_support
