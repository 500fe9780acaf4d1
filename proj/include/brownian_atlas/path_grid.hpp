#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "brownian_atlas/rng.hpp"

namespace brownian_atlas {

enum class Variant { map, plane };

// Uniform time grid carrying one sampled path. Evaluation is by grid index
// only; time lookups snap to the nearest index, never interpolate.
struct PathGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  int last() const { return size() - 1; }
  double time_of(int i) const { return t0 + dt * i; }

  int index_of(double t) const {
    const long long i = std::llround((t - t0) / dt);
    if (i < 0 || i >= size()) throw std::invalid_argument("PathGrid::index_of: time outside grid");
    return static_cast<int>(i);
  }
};

// Normalized Brownian excursion on [0,1] with n cells, drawn as the norm of a
// 3d Brownian bridge pinned to zero at both ends (the Bessel(3) bridge, equal
// in law to the excursion). The grid values are jointly exact in law: each
// coordinate bridge is exact at grid times and the norm is pointwise. A
// Vervaat rotation of one discretized scalar bridge only conditions the bridge
// to be nonnegative AT grid points — weaker than staying positive between
// them — which biases marginals detectably at 10^4-replica resolution.
inline PathGrid sample_excursion(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_excursion: need n >= 2");
  Rng rng(seed, "excursion", 0);
  const double dt = 1.0 / n;
  const double sd = std::sqrt(dt);
  std::array<std::vector<double>, 3> w;
  for (auto& coord : w) {
    coord.resize(n + 1);
    coord[0] = 0.0;
  }
  for (int i = 1; i <= n; ++i)
    for (auto& coord : w) coord[i] = coord[i - 1] + sd * rng.next_gaussian();
  PathGrid g;
  g.t0 = 0.0;
  g.dt = dt;
  g.values.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    double s2 = 0.0;
    for (const auto& coord : w) {
      const double b = coord[i] - (static_cast<double>(i) / n) * coord[n];
      s2 += b * b;
    }
    g.values[i] = std::sqrt(s2);
  }
  g.values[0] = 0.0;
  g.values[n] = 0.0;
  return g;
}

// Lifetime path of the infinite-volume variant on [-T, T]: two independent
// 3d Bessel paths from 0 glued back to back, so the unique zero is at t = 0.
inline PathGrid sample_plane_lifetime(double T, int cells_per_unit, std::uint64_t seed) {
  if (!(T > 0.0) || cells_per_unit < 1)
    throw std::invalid_argument("sample_plane_lifetime: need T > 0 and cells_per_unit >= 1");
  const int side = static_cast<int>(std::llround(T * cells_per_unit));
  if (side < 1) throw std::invalid_argument("sample_plane_lifetime: window shorter than one cell");
  const double dt = 1.0 / cells_per_unit;
  const double sd = std::sqrt(dt);
  PathGrid g;
  g.t0 = -side * dt;
  g.dt = dt;
  g.values.assign(2 * side + 1, 0.0);
  for (int dir = 0; dir < 2; ++dir) {
    Rng rng(seed, dir == 0 ? "bessel-neg" : "bessel-pos", 0);
    double x = 0.0, y = 0.0, z = 0.0;
    for (int k = 1; k <= side; ++k) {
      x += sd * rng.next_gaussian();
      y += sd * rng.next_gaussian();
      z += sd * rng.next_gaussian();
      const int idx = dir == 0 ? side - k : side + k;
      g.values[idx] = std::sqrt(x * x + y * y + z * z);
    }
  }
  return g;
}

// O(1) range-minimum queries over a fixed value array (sparse table).
// Cyclic queries (complement arcs) are only legal for the map variant.
class MinimaIndex {
 public:
  MinimaIndex() = default;

  MinimaIndex(const std::vector<double>& values, bool allow_cyclic)
      : values_(values), allow_cyclic_(allow_cyclic) {
    const int n = static_cast<int>(values_.size());
    if (n == 0) throw std::invalid_argument("MinimaIndex: empty values");
    const int levels = std::bit_width(static_cast<unsigned>(n));
    table_.assign(levels, values_);
    for (int k = 1; k < levels; ++k) {
      const int span = 1 << k;
      for (int i = 0; i + span <= n; ++i)
        table_[k][i] = std::min(table_[k - 1][i], table_[k - 1][i + span / 2]);
    }
  }

  int size() const { return static_cast<int>(values_.size()); }
  bool allow_cyclic() const { return allow_cyclic_; }
  double value(int i) const { return values_[i]; }

  // Minimum over [i..j], endpoints included.
  double range_min(int i, int j) const {
    if (i > j) std::swap(i, j);
    check(i, j);
    const int k = std::bit_width(static_cast<unsigned>(j - i + 1)) - 1;
    return std::min(table_[k][i], table_[k][j + 1 - (1 << k)]);
  }

  // Minimum over the complement arc [0..min(i,j)] U [max(i,j)..last].
  double complement_min(int i, int j) const {
    if (i > j) std::swap(i, j);
    check(i, j);
    return std::min(range_min(0, i), range_min(j, size() - 1));
  }

 private:
  void check(int i, int j) const {
    if (i < 0 || j >= size()) throw std::invalid_argument("MinimaIndex: index out of range");
  }

  std::vector<double> values_;
  std::vector<std::vector<double>> table_;
  bool allow_cyclic_ = false;
};

// Running-minimum query between two grid indices; cyclic = true asks for the
// complement arc and is rejected unless the index was built for one.
inline double m_query(const MinimaIndex& idx, int i, int j, bool cyclic = false) {
  if (!cyclic) return idx.range_min(i, j);
  if (!idx.allow_cyclic())
    throw std::invalid_argument("m_query: cyclic query on a non-cyclic (plane) grid");
  return idx.complement_min(i, j);
}

}  // namespace brownian_atlas
