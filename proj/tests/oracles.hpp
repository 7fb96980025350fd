#pragma once

// Brute-force reference implementations. Each one recomputes a quantity
// straight from its definition, sharing no code with the library beyond the
// Volume container.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "isarf/volume.hpp"

namespace oracle {

using isarf::Dims;

inline std::vector<std::array<int, 3>> neighbour_offsets(int connectivity) {
  std::vector<std::array<int, 3>> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (connectivity == 6 && manhattan != 1) continue;
        out.push_back({dx, dy, dz});
      }
  return out;
}

/// Union-find over every foreground neighbour pair. Labels are 1..K in order
/// of each component's smallest linear index.
inline std::vector<int> component_labels(const std::vector<std::uint8_t>& fg, const Dims& d, int connectivity) {
  const std::size_t n = fg.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  const auto offs = neighbour_offsets(connectivity);
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x) {
        const std::size_t a = d.index(x, y, z);
        if (!fg[a]) continue;
        for (const auto& o : offs) {
          const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
          if (!d.contains(nx, ny, nz)) continue;
          const std::size_t b = d.index(nx, ny, nz);
          if (!fg[b]) continue;
          const std::size_t ra = find(a), rb = find(b);
          if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      }
  std::vector<int> labels(n, 0);
  std::map<std::size_t, int> root_label;
  for (std::size_t i = 0; i < n; ++i) {
    if (!fg[i]) continue;
    const std::size_t r = find(i);
    auto it = root_label.find(r);
    if (it == root_label.end()) it = root_label.emplace(r, static_cast<int>(root_label.size()) + 1).first;
    labels[i] = it->second;
  }
  return labels;
}

/// Breadth-first flood fill started from each unlabelled foreground voxel in
/// linear order, so labels follow the same canonical order as above.
inline std::vector<int> flood_fill_labels(const std::vector<std::uint8_t>& fg, const Dims& d, int connectivity) {
  std::vector<int> labels(fg.size(), 0);
  const auto offs = neighbour_offsets(connectivity);
  int next = 0;
  std::vector<std::size_t> queue;
  for (std::size_t seed = 0; seed < fg.size(); ++seed) {
    if (!fg[seed] || labels[seed]) continue;
    labels[seed] = ++next;
    queue.assign(1, seed);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto p = d.coord(queue[head]);
      for (const auto& o : offs) {
        const int nx = p[0] + o[0], ny = p[1] + o[1], nz = p[2] + o[2];
        if (!d.contains(nx, ny, nz)) continue;
        const std::size_t b = d.index(nx, ny, nz);
        if (fg[b] && !labels[b]) {
          labels[b] = next;
          queue.push_back(b);
        }
      }
    }
  }
  return labels;
}

inline int component_count(const std::vector<std::uint8_t>& fg, const Dims& d, int connectivity) {
  const auto labels = component_labels(fg, d, connectivity);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

/// Foreground voxels having a 6-neighbour that is background or off-grid.
inline std::vector<std::size_t> boundary(const std::vector<std::uint8_t>& fg, const Dims& d) {
  std::vector<std::size_t> out;
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x) {
        if (!fg[d.index(x, y, z)]) continue;
        bool edge = false;
        for (const auto& o : neighbour_offsets(6)) {
          const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
          if (!d.contains(nx, ny, nz) || !fg[d.index(nx, ny, nz)]) edge = true;
        }
        if (edge) out.push_back(d.index(x, y, z));
      }
  return out;
}

/// Squared Euclidean distance from every voxel to its nearest seed.
inline std::vector<double> squared_distance(const std::vector<std::size_t>& seeds, const Dims& d) {
  std::vector<double> out(d.count(), std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < d.count(); ++v) {
    const auto p = d.coord(v);
    for (std::size_t s : seeds) {
      const auto q = d.coord(s);
      out[v] = std::min(out[v], static_cast<double>((p - q).squaredNorm()));
    }
  }
  return out;
}

struct NaiveSubject {
  Dims dims;
  double spacing = 1.5;
  std::vector<std::int16_t> hu;
  std::vector<std::uint8_t> infection;
  std::vector<std::uint8_t> segment;  // 0 outside lung, 1..18
};

inline int lobe_of(int segment) {
  if (segment <= 3) return 1;
  if (segment <= 5) return 2;
  if (segment <= 10) return 3;
  if (segment <= 14) return 4;
  return 5;
}
inline bool left_lung(int segment) { return lobe_of(segment) >= 4; }

/// The 96 features written out voxel by voxel, in manifest order.
inline std::vector<double> features(const NaiveSubject& s, double large_ml = 1.0) {
  const Dims& d = s.dims;
  const std::size_t n = d.count();
  const double voxel_ml = s.spacing * s.spacing * s.spacing / 1000.0;
  std::vector<double> f;
  auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };
  auto region_mask = [&](auto pred) {
    std::vector<std::uint8_t> m(n, 0);
    for (std::size_t v = 0; v < n; ++v) m[v] = (s.segment[v] != 0 && pred(s.segment[v])) ? 1 : 0;
    return m;
  };
  auto infected_in = [&](const std::vector<std::uint8_t>& region) {
    std::vector<std::uint8_t> m(n, 0);
    for (std::size_t v = 0; v < n; ++v) m[v] = (region[v] && s.infection[v]) ? 1 : 0;
    return m;
  };
  auto count = [](const std::vector<std::uint8_t>& m) {
    return static_cast<double>(std::count(m.begin(), m.end(), std::uint8_t{1}));
  };

  const auto lung = region_mask([](int) { return true; });
  const auto inf = infected_in(lung);

  // volume
  f.push_back(count(inf) * voxel_ml);
  f.push_back(ratio(count(inf), count(lung)));
  for (int lobe = 1; lobe <= 5; ++lobe) {
    const auto r = region_mask([&](int seg) { return lobe_of(seg) == lobe; });
    f.push_back(ratio(count(infected_in(r)), count(r)));
  }
  for (int seg = 1; seg <= 18; ++seg) {
    const auto r = region_mask([&](int sg) { return sg == seg; });
    f.push_back(ratio(count(infected_in(r)), count(r)));
  }
  const auto left = region_mask([](int seg) { return left_lung(seg); });
  const auto right = region_mask([](int seg) { return !left_lung(seg); });
  f.push_back(std::abs(ratio(count(infected_in(left)), count(left)) - ratio(count(infected_in(right)), count(right))));

  // number
  const auto lesions = component_labels(inf, d, 26);
  const int k = lesions.empty() ? 0 : *std::max_element(lesions.begin(), lesions.end());
  const double nl = component_count(infected_in(left), d, 26);
  const double nr = component_count(infected_in(right), d, 26);
  f.push_back(k);
  f.push_back(nl);
  f.push_back(nr);
  f.push_back(std::abs(nl - nr));
  for (int lobe = 1; lobe <= 5; ++lobe)
    f.push_back(component_count(infected_in(region_mask([&](int seg) { return lobe_of(seg) == lobe; })), d, 26));
  for (int seg = 1; seg <= 18; ++seg)
    f.push_back(component_count(infected_in(region_mask([&](int sg) { return sg == seg; })), d, 26));
  std::vector<double> vols(static_cast<std::size_t>(k), 0.0);
  for (int l : lesions)
    if (l > 0) vols[static_cast<std::size_t>(l - 1)] += voxel_ml;
  double mean = 0, mx = 0, var = 0, large = 0;
  for (double v : vols) {
    mean += v / k;
    mx = std::max(mx, v);
    if (v >= large_ml) ++large;
  }
  for (double v : vols) var += (v - mean) * (v - mean) / k;
  f.push_back(k ? mean : 0.0);
  f.push_back(mx);
  f.push_back(k ? std::sqrt(var) : 0.0);
  f.push_back(large);

  // histogram
  std::vector<double> bins(30, 0.0);
  double total = 0, hsum = 0, hsq = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (!inf[v]) continue;
    int b = static_cast<int>(std::floor((s.hu[v] + 1350.0) / 50.0));
    b = std::clamp(b, 0, 29);
    bins[static_cast<std::size_t>(b)] += 1;
    total += 1;
    hsum += s.hu[v];
  }
  const double hmean = total > 0 ? hsum / total : 0.0;
  for (std::size_t v = 0; v < n; ++v)
    if (inf[v]) hsq += (s.hu[v] - hmean) * (s.hu[v] - hmean);
  for (double b : bins) f.push_back(total > 0 ? b / total : 0.0);
  f.push_back(hmean);
  f.push_back(total > 0 ? std::sqrt(hsq / total) : 0.0);

  // surface
  const auto surf = boundary(inf, d);
  const auto wall = boundary(lung, d);
  const auto d2 = squared_distance(wall, d);
  std::array<double, 5> band{};
  for (std::size_t v : surf) {
    const double dist = std::sqrt(d2[v]);
    for (int b = 0; b < 5; ++b) {
      const double lo = 3.0 * b, hi = 3.0 * (b + 1);
      if ((b == 0 ? dist >= lo : dist > lo) && dist <= hi) band[static_cast<std::size_t>(b)] += 1;
    }
  }
  double in_bands = 0;
  for (double b : band) {
    f.push_back(b);
    in_bands += b;
  }
  f.push_back(static_cast<double>(surf.size()));
  f.push_back(surf.empty() ? 0.0 : in_bands / static_cast<double>(surf.size()));
  return f;
}

/// Every (feature, midpoint) candidate scored by the exact weighted Gini
/// impurity n_l * G_l + n_r * G_r, compared as rationals.
struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
};

inline SplitChoice exhaustive_split(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const std::vector<int>& rows,
                                    const std::vector<int>& features) {
  using i128 = __int128;
  // Weighted impurity = n - (a0^2 + a1^2)/na - (b0^2 + b1^2)/nb; minimise it,
  // i.e. maximise S = (a0^2 + a1^2)/na + (b0^2 + b1^2)/nb held as num/den.
  long long t0 = 0, t1 = 0;
  for (int r : rows) (y[r] ? t1 : t0) += 1;
  const long long nt = t0 + t1;
  i128 best_num = static_cast<i128>(t0 * t0 + t1 * t1), best_den = nt;  // the unsplit node
  SplitChoice best;
  for (int j : features) {
    std::vector<double> values;
    for (int r : rows) values.push_back(X(r, j));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      double thr = values[v] + (values[v + 1] - values[v]) / 2.0;
      if (!(thr < values[v + 1])) thr = values[v];
      long long a0 = 0, a1 = 0;
      for (int r : rows)
        if (X(r, j) <= thr) (y[r] ? a1 : a0) += 1;
      const long long b0 = t0 - a0, b1 = t1 - a1, na = a0 + a1, nb = b0 + b1;
      if (na == 0 || nb == 0) continue;
      const i128 num = static_cast<i128>(a0 * a0 + a1 * a1) * nb + static_cast<i128>(b0 * b0 + b1 * b1) * na;
      const i128 den = static_cast<i128>(na) * nb;
      if (num * best_den > best_num * den) {
        best_num = num;
        best_den = den;
        best = {j, thr};
      }
    }
  }
  return best;
}

/// Mann-Whitney concordance with half credit for ties, over all P*N pairs.
inline double pairwise_auc(const Eigen::VectorXd& s, const Eigen::VectorXi& y) {
  long long twice = 0, pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) (y[i] ? pos : neg) += 1;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      twice += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

/// Central differences of f at x, one coordinate at a time.
template <typename F>
Eigen::VectorXd numeric_gradient(F f, Eigen::VectorXd x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace oracle
