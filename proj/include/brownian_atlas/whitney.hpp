#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace brownian_atlas {

// ---- planar domains ----------------------------------------------------------

// A domain is an inside-test over a bounding box. boundary_dist, when
// provided, is an exact distance-to-boundary oracle used instead of the
// rasterized distance transform.
struct Domain {
  std::function<bool(double, double)> inside;
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  std::function<double(double, double)> boundary_dist;

  static Domain disk(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("Domain::disk: need radius > 0");
    Domain d;
    d.inside = [radius](double x, double y) { return x * x + y * y < radius * radius; };
    d.x0 = d.y0 = -radius;
    d.x1 = d.y1 = radius;
    d.boundary_dist = [radius](double x, double y) {
      return std::abs(radius - std::hypot(x, y));
    };
    return d;
  }

  static Domain unit_square() {
    Domain d;
    d.inside = [](double x, double y) { return x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0; };
    d.x0 = d.y0 = 0.0;
    d.x1 = d.y1 = 1.0;
    d.boundary_dist = [](double x, double y) {
      return std::min(std::min(x, 1.0 - x), std::min(y, 1.0 - y));
    };
    return d;
  }

  // Polygonal domain from a closed boundary trace (e.g. a chart evaluated on
  // a circle just inside the unit disk). Inside-test by crossing number;
  // exact distance to the polygon.
  static Domain from_polygon(std::vector<std::array<double, 2>> pts) {
    if (pts.size() < 3) throw std::invalid_argument("Domain::from_polygon: need >= 3 points");
    Domain d;
    d.x0 = d.x1 = pts[0][0];
    d.y0 = d.y1 = pts[0][1];
    for (const auto& p : pts) {
      d.x0 = std::min(d.x0, p[0]);
      d.x1 = std::max(d.x1, p[0]);
      d.y0 = std::min(d.y0, p[1]);
      d.y1 = std::max(d.y1, p[1]);
    }
    auto poly = std::make_shared<std::vector<std::array<double, 2>>>(std::move(pts));
    d.inside = [poly](double x, double y) {
      bool in = false;
      const auto& q = *poly;
      for (size_t i = 0, j = q.size() - 1; i < q.size(); j = i++) {
        if ((q[i][1] > y) != (q[j][1] > y) &&
            x < (q[j][0] - q[i][0]) * (y - q[i][1]) / (q[j][1] - q[i][1]) + q[i][0])
          in = !in;
      }
      return in;
    };
    d.boundary_dist = [poly](double x, double y) {
      const auto& q = *poly;
      double best = std::numeric_limits<double>::infinity();
      for (size_t i = 0, j = q.size() - 1; i < q.size(); j = i++) {
        const double ax = q[j][0], ay = q[j][1];
        const double bx = q[i][0], by = q[i][1];
        const double dx = bx - ax, dy = by - ay;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0.0 ? ((x - ax) * dx + (y - ay) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(x - (ax + t * dx), y - (ay + t * dy)));
      }
      return best;
    };
    return d;
  }
};

// ---- Whitney decomposition -----------------------------------------------------

struct WhitneyCube {
  int level = 0;
  int ix = 0;
  int iy = 0;
  double side = 0.0;
  double dist = 0.0;  // raster estimate of dist(Q, boundary)
};

class WhitneyDecomposition {
 public:
  double origin_x = 0.0, origin_y = 0.0;
  double root_side = 0.0;
  int max_level = 0;
  double raster_h = 0.0;
  std::vector<WhitneyCube> cubes;

  double cube_x0(const WhitneyCube& q) const { return origin_x + q.side * q.ix; }
  double cube_y0(const WhitneyCube& q) const { return origin_y + q.side * q.iy; }
  double cube_diam(const WhitneyCube& q) const { return q.side * std::sqrt(2.0); }

  // Retained cube containing a point, or -1; retained cubes are disjoint.
  int cube_at(double x, double y) const {
    if (x < origin_x || y < origin_y || x >= origin_x + root_side || y >= origin_y + root_side)
      return -1;
    for (int k = 1; k <= max_level; ++k) {
      const double side = root_side / static_cast<double>(1 << k);
      const int ix = static_cast<int>((x - origin_x) / side);
      const int iy = static_cast<int>((y - origin_y) / side);
      const auto it = lookup_.find(key(k, ix, iy));
      if (it != lookup_.end()) return it->second;
    }
    return -1;
  }

  bool retained(int level, int ix, int iy) const {
    return lookup_.count(key(level, ix, iy)) > 0;
  }

  void insert(const WhitneyCube& q) {
    lookup_.emplace(key(q.level, q.ix, q.iy), static_cast<int>(cubes.size()));
    cubes.push_back(q);
  }

 private:
  static std::uint64_t key(int level, int ix, int iy) {
    return (static_cast<std::uint64_t>(level) << 56) ^
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 28) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy));
  }

  std::unordered_map<std::uint64_t, int> lookup_;
};

namespace detail {

// 1d squared-distance transform (lower envelope of parabolas).
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    for (;;) {
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * (q - v[k]));
      if (s <= z[k] && k > 0)
        --k;
      else
        break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  d.resize(n);
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact Euclidean distance (in sample units) to the nearest outside sample.
inline std::vector<double> edt_2d(const std::vector<char>& inside, int n) {
  const double inf = 1e18;
  std::vector<double> g(static_cast<size_t>(n) * n);
  for (size_t i = 0; i < g.size(); ++i) g[i] = inside[i] ? inf : 0.0;
  std::vector<double> row(n), out(n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) row[x] = g[static_cast<size_t>(y) * n + x];
    edt_1d(row, out);
    for (int x = 0; x < n; ++x) g[static_cast<size_t>(y) * n + x] = out[x];
  }
  std::vector<double> col(n), outc(n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) col[y] = g[static_cast<size_t>(y) * n + x];
    edt_1d(col, outc);
    for (int y = 0; y < n; ++y) g[static_cast<size_t>(y) * n + x] = std::sqrt(outc[y]);
  }
  return g;
}

}  // namespace detail

// Dyadic Whitney decomposition over the padded square hull of the domain's
// bounding box. A sample point x qualifies the level-k cube containing it
// when dist(x, boundary) lies in (2 diam_k, 4 diam_k]; those layers tile all
// distances, and keeping only qualified cubes without a retained ancestor
// yields disjoint cubes with diam(Q) <= dist(Q, boundary) <= 4 diam(Q).
// raster_level fixes the sample grid at 2^raster_level cells per side.
inline WhitneyDecomposition whitney_decompose(const Domain& domain, int max_level,
                                              int raster_level = 0) {
  if (max_level < 1) throw std::invalid_argument("whitney_decompose: need max_level >= 1");
  if (raster_level == 0) raster_level = max_level + 2;
  if (raster_level < max_level + 1)
    throw std::invalid_argument("whitney_decompose: raster finer than two samples per cube side");
  WhitneyDecomposition dec;
  const double w = domain.x1 - domain.x0, h = domain.y1 - domain.y0;
  dec.root_side = std::max(w, h);
  if (!(dec.root_side > 0.0)) throw std::invalid_argument("whitney_decompose: empty bounding box");
  dec.origin_x = domain.x0 - 0.5 * (dec.root_side - w);
  dec.origin_y = domain.y0 - 0.5 * (dec.root_side - h);
  dec.max_level = max_level;
  const int n = 1 << raster_level;
  dec.raster_h = dec.root_side / n;

  std::vector<char> inside(static_cast<size_t>(n) * n, 0);
  long inside_count = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = dec.origin_x + (i + 0.5) * dec.raster_h;
      const double y = dec.origin_y + (j + 0.5) * dec.raster_h;
      if (domain.inside(x, y)) {
        inside[static_cast<size_t>(j) * n + i] = 1;
        ++inside_count;
      }
    }
  if (inside_count == 0) throw std::invalid_argument("whitney_decompose: empty domain");

  std::vector<double> dist;
  if (!domain.boundary_dist) dist = detail::edt_2d(inside, n);

  auto sample_dist = [&](int i, int j) {
    if (domain.boundary_dist)
      return domain.boundary_dist(dec.origin_x + (i + 0.5) * dec.raster_h,
                                  dec.origin_y + (j + 0.5) * dec.raster_h);
    return dist[static_cast<size_t>(j) * n + i] * dec.raster_h;
  };

  // marked[k] maps (ix,iy) at level k to the min sample distance seen.
  std::vector<std::unordered_map<std::uint64_t, double>> marked(max_level + 1);
  const double sqrt2 = std::sqrt(2.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!inside[static_cast<size_t>(j) * n + i]) continue;
      const double d = sample_dist(i, j);
      if (!(d > 0.0)) continue;
      const int k0 = static_cast<int>(std::floor(std::log2(4.0 * sqrt2 * dec.root_side / d)));
      for (int k = k0 - 1; k <= k0 + 1; ++k) {
        if (k < 1 || k > max_level) continue;
        const double diam = sqrt2 * dec.root_side / static_cast<double>(1 << k);
        if (!(d > 2.0 * diam && d <= 4.0 * diam)) continue;
        const int shift = raster_level - k;
        const std::uint64_t key = (static_cast<std::uint64_t>(i >> shift) << 32) |
                                  static_cast<std::uint64_t>(j >> shift);
        auto [it, fresh] = marked[k].emplace(key, d);
        if (!fresh) it->second = std::min(it->second, d);
        break;
      }
    }

  // Keep marked cubes without a retained ancestor, coarse to fine.
  for (int k = 1; k <= max_level; ++k) {
    for (const auto& [key, d] : marked[k]) {
      const int ix = static_cast<int>(key >> 32);
      const int iy = static_cast<int>(key & 0xffffffffULL);
      bool covered = false;
      for (int a = 1; a < k && !covered; ++a)
        covered = dec.retained(a, ix >> (k - a), iy >> (k - a));
      if (covered) continue;
      WhitneyCube q;
      q.level = k;
      q.ix = ix;
      q.iy = iy;
      q.side = dec.root_side / static_cast<double>(1 << k);
      q.dist = d;
      dec.insert(q);
    }
  }
  std::sort(dec.cubes.begin(), dec.cubes.end(), [](const WhitneyCube& a, const WhitneyCube& b) {
    return std::tie(a.level, a.ix, a.iy) < std::tie(b.level, b.ix, b.iy);
  });
  // Rebuild the lookup in sorted order for deterministic ids.
  WhitneyDecomposition ordered;
  ordered.origin_x = dec.origin_x;
  ordered.origin_y = dec.origin_y;
  ordered.root_side = dec.root_side;
  ordered.max_level = dec.max_level;
  ordered.raster_h = dec.raster_h;
  for (const auto& q : dec.cubes) ordered.insert(q);
  return ordered;
}

// ---- conformal charts and shadows ---------------------------------------------

struct ConformalChart {
  std::string name;
  std::function<std::complex<double>(std::complex<double>)> phi;

  static ConformalChart identity_disk(double radius) {
    return {"identity-disk", [radius](std::complex<double> z) { return radius * z; }};
  }

  // Koebe map z/(1-z)^2 precomposed with a contraction, so the image stays
  // bounded while keeping the slit-like pinch of the full map.
  static ConformalChart truncated_koebe(double c) {
    if (!(c > 0.0 && c < 1.0))
      throw std::invalid_argument("truncated_koebe: need c in (0,1)");
    return {"koebe-trunc", [c](std::complex<double> z) {
              const std::complex<double> w = c * z;
              const std::complex<double> denom = (1.0 - w) * (1.0 - w);
              return w / denom;
            }};
  }
};

struct ShadowCube {
  int cube_id = 0;
  int level = 0;
  double s = 0.0;   // diameter of the shadow endpoint set
  int n_theta = 0;  // curves meeting the cube
  bool truncated = false;
};

struct ShadowReport {
  std::string chart_name;
  int theta_grid = 0;
  int r_steps = 0;
  std::vector<ShadowCube> cubes;      // one per retained cube, same order
  std::vector<double> partial_sums;   // sum of s^2 over levels <= k, k = 1..max_level
};

namespace detail {

// Diameter of a planar point set: convex hull + rotating calipers.
inline double point_set_diameter(std::vector<std::complex<double>> pts) {
  if (pts.size() < 2) return 0.0;
  if (pts.size() == 2) return std::abs(pts[0] - pts[1]);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) return 0.0;
  auto cross = [](const std::complex<double>& o, const std::complex<double>& a,
                  const std::complex<double>& b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
  };
  std::vector<std::complex<double>> hull(2 * pts.size());
  size_t m = 0;
  for (const auto& p : pts) {
    while (m >= 2 && cross(hull[m - 2], hull[m - 1], p) <= 0.0) --m;
    hull[m++] = p;
  }
  const size_t lower = m + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (m >= lower && cross(hull[m - 2], hull[m - 1], *it) <= 0.0) --m;
    hull[m++] = *it;
  }
  hull.resize(m - 1);
  if (hull.size() < 2) return 0.0;
  double best = 0.0;
  size_t j = 1;
  const size_t hn = hull.size();
  for (size_t i = 0; i < hn; ++i) {
    const auto edge = hull[(i + 1) % hn] - hull[i];
    while (std::abs(cross({0, 0}, edge, hull[(j + 1) % hn] - hull[i])) >
           std::abs(cross({0, 0}, edge, hull[j] - hull[i])))
      j = (j + 1) % hn;
    best = std::max(best, std::abs(hull[i] - hull[j]));
    best = std::max(best, std::abs(hull[(i + 1) % hn] - hull[j]));
  }
  return best;
}

}  // namespace detail

// Traces the image of each radial segment [0, e^{i theta}] through the chart
// and records, for every retained cube, which curves pass through it and
// where they land on the boundary. s(Q) is the diameter of the endpoint set
// of the curves through Q; curves whose chart evaluation stops being finite
// before the last radius are flagged and keep their last valid endpoint.
inline ShadowReport radial_shadow(const ConformalChart& chart, const WhitneyDecomposition& dec,
                                  int theta_grid, int r_steps = 0) {
  if (theta_grid < 256) throw std::invalid_argument("radial_shadow: need theta_grid >= 256");
  if (r_steps == 0) r_steps = 2048;
  if (r_steps < 16) throw std::invalid_argument("radial_shadow: need r_steps >= 16");
  ShadowReport rep;
  rep.chart_name = chart.name;
  rep.theta_grid = theta_grid;
  rep.r_steps = r_steps;

  const double r_max = 1.0 - std::pow(2.0, -14);
  const double min_feature = dec.root_side / static_cast<double>(1 << dec.max_level) / 8.0;
  std::vector<std::vector<int>> hits(dec.cubes.size());
  std::vector<char> cube_truncated(dec.cubes.size(), 0);
  std::vector<std::complex<double>> endpoints(theta_grid);
  std::vector<char> theta_truncated(theta_grid, 0);

  auto mark_point = [&](const std::complex<double>& p, int theta) {
    const int id = dec.cube_at(p.real(), p.imag());
    if (id < 0) return;
    if (hits[id].empty() || hits[id].back() != theta) hits[id].push_back(theta);
    if (theta_truncated[theta]) cube_truncated[id] = 1;
  };
  std::function<void(std::complex<double>, std::complex<double>, int, int)> mark_segment =
      [&](std::complex<double> a, std::complex<double> b, int theta, int depth) {
        mark_point(a, theta);
        mark_point(b, theta);
        if (depth >= 28 || std::abs(b - a) < min_feature) return;
        const auto mid = 0.5 * (a + b);
        mark_segment(a, mid, theta, depth + 1);
        mark_segment(mid, b, theta, depth + 1);
      };

  for (int t = 0; t < theta_grid; ++t) {
    const double angle = 2.0 * 3.14159265358979323846 * t / theta_grid;
    const std::complex<double> dir(std::cos(angle), std::sin(angle));
    std::complex<double> prev = chart.phi(0.0);
    bool alive = std::isfinite(prev.real()) && std::isfinite(prev.imag());
    std::complex<double> last = prev;
    for (int j = 1; j <= r_steps && alive; ++j) {
      const double r = r_max * j / r_steps;
      const std::complex<double> p = chart.phi(r * dir);
      if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
        theta_truncated[t] = 1;
        break;
      }
      mark_segment(prev, p, t, 0);
      prev = p;
      last = p;
    }
    endpoints[t] = last;
    if (theta_truncated[t]) {
      // retroactively flag the cubes this curve met
      for (size_t id = 0; id < hits.size(); ++id)
        if (!hits[id].empty() && hits[id].back() == t) cube_truncated[id] = 1;
    }
  }

  rep.partial_sums.assign(dec.max_level, 0.0);
  for (size_t id = 0; id < dec.cubes.size(); ++id) {
    ShadowCube sc;
    sc.cube_id = static_cast<int>(id);
    sc.level = dec.cubes[id].level;
    sc.n_theta = static_cast<int>(hits[id].size());
    sc.truncated = cube_truncated[id] != 0;
    std::vector<std::complex<double>> pts;
    pts.reserve(hits[id].size());
    for (int t : hits[id]) pts.push_back(endpoints[t]);
    sc.s = detail::point_set_diameter(std::move(pts));
    rep.cubes.push_back(sc);
  }
  for (int k = 1; k <= dec.max_level; ++k) {
    double acc = k > 1 ? rep.partial_sums[k - 2] : 0.0;
    for (const auto& sc : rep.cubes)
      if (sc.level == k) acc += sc.s * sc.s;
    rep.partial_sums[k - 1] = acc;
  }
  return rep;
}

inline double shadow_sum(const ShadowReport& rep, int up_to_level) {
  double acc = 0.0;
  for (const auto& sc : rep.cubes)
    if (sc.level <= up_to_level) acc += sc.s * sc.s;
  return acc;
}

// ---- summability verdict --------------------------------------------------------

struct SummabilityReport {
  std::string chart_name;
  int max_level = 0;
  int theta_grid = 0;
  std::vector<double> partial_sums;
  std::vector<double> increments;  // per-level contribution to sum s^2
  std::vector<double> ratios;      // increment[k] / increment[k-1]
  std::string verdict;             // converging | inconclusive | diverging
};

inline std::string summability_verdict(const std::vector<double>& ratios) {
  if (ratios.size() < 3) return "inconclusive";
  double acc = 0.0;
  for (size_t i = ratios.size() - 3; i < ratios.size(); ++i) acc += ratios[i];
  const double mean = acc / 3.0;
  if (mean <= 0.9) return "converging";
  if (mean >= 1.1) return "diverging";
  return "inconclusive";
}

// Rasterizes the chart's image domain from its traced boundary, decomposes
// it, shadows it, and classifies the growth of the per-level sum increments.
inline SummabilityReport summability_report(const ConformalChart& chart, int max_level,
                                            int theta_grid) {
  const int boundary_pts = std::max(theta_grid, 1024);
  const double r_b = 1.0 - std::pow(2.0, -12);
  std::vector<std::array<double, 2>> boundary(boundary_pts);
  for (int t = 0; t < boundary_pts; ++t) {
    const double a = 2.0 * 3.14159265358979323846 * t / boundary_pts;
    const auto p = chart.phi(r_b * std::complex<double>(std::cos(a), std::sin(a)));
    boundary[t] = {p.real(), p.imag()};
  }
  const Domain domain = Domain::from_polygon(std::move(boundary));
  const WhitneyDecomposition dec = whitney_decompose(domain, max_level);
  const ShadowReport shadows = radial_shadow(chart, dec, theta_grid);

  SummabilityReport rep;
  rep.chart_name = chart.name;
  rep.max_level = max_level;
  rep.theta_grid = theta_grid;
  rep.partial_sums = shadows.partial_sums;
  double prev = 0.0;
  for (double ps : rep.partial_sums) {
    rep.increments.push_back(ps - prev);
    prev = ps;
  }
  for (size_t k = 1; k < rep.increments.size(); ++k)
    if (rep.increments[k - 1] > 0.0)
      rep.ratios.push_back(rep.increments[k] / rep.increments[k - 1]);
  rep.verdict = summability_verdict(rep.ratios);
  return rep;
}

}  // namespace brownian_atlas
